//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := coimpl ("->" formula)?
//! coimpl  := disj ("-<" disj)*
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "~" unary | "false" | "true" | ident | "(" formula ")"
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Identifiers may
//! contain `+` and `-`, but a `-` directly followed by `>` or `<` always
//! starts an operator, so `p->q` lexes as `p`, `->`, `q`.

use thiserror::Error;

use super::{Formula, Letter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    Lexical { pos: usize, ch: char },
    #[error("unbalanced parenthesis at byte {pos}")]
    Unbalanced { pos: usize },
    #[error("operator {op:?} at byte {pos} is missing an operand")]
    Dangling { pos: usize, op: String },
    #[error("unexpected {found} at byte {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("empty formula")]
    Empty,
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Lexical { pos, .. }
            | ParseError::Unbalanced { pos }
            | ParseError::Dangling { pos, .. }
            | ParseError::Unexpected { pos, .. } => Some(*pos),
            ParseError::Empty => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    False,
    True,
    Not,
    And,
    Or,
    Coimpl,
    Impl,
    LParen,
    RParen,
    Ident(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::False => "'false'".into(),
            Tok::True => "'true'".into(),
            Tok::Not => "'~'".into(),
            Tok::And => "'&'".into(),
            Tok::Or => "'|'".into(),
            Tok::Coimpl => "'-<'".into(),
            Tok::Impl => "'->'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Ident(s) => format!("letter {s:?}"),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, Tok::And | Tok::Or | Tok::Coimpl | Tok::Impl)
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'~' => {
                toks.push((i, Tok::Not));
                i += 1;
            }
            b'&' => {
                toks.push((i, Tok::And));
                i += 1;
            }
            b'|' => {
                toks.push((i, Tok::Or));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                toks.push((i, Tok::Impl));
                i += 2;
            }
            b'-' if bytes.get(i + 1) == Some(&b'<') => {
                toks.push((i, Tok::Coimpl));
                i += 2;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    let d = bytes[i];
                    let op_follows = d == b'-' && matches!(bytes.get(i + 1), Some(b'>') | Some(b'<'));
                    if op_follows || !(d.is_ascii_alphanumeric() || matches!(d, b'_' | b'+' | b'-')) {
                        break;
                    }
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "false" => Tok::False,
                    "true" => Tok::True,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((start, tok));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::Lexical { pos: i, ch });
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.coimpl()?;
        if self.eat(&Tok::Impl) {
            let rhs = self.operand_after("->", Self::formula)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn coimpl(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.disj()?;
        while self.eat(&Tok::Coimpl) {
            let rhs = self.operand_after("-<", Self::disj)?;
            lhs = Formula::coimplies(lhs, rhs);
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conj()?;
        while self.eat(&Tok::Or) {
            let rhs = self.operand_after("|", Self::conj)?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.operand_after("&", Self::unary)?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    /// Parses the right operand of a binary operator that was just consumed.
    fn operand_after(
        &mut self,
        op: &str,
        next: fn(&mut Self) -> Result<Formula, ParseError>,
    ) -> Result<Formula, ParseError> {
        let op_pos = self.toks[self.pos - 1].0;
        match self.peek() {
            None | Some(Tok::RParen) => Err(ParseError::Dangling { pos: op_pos, op: op.to_string() }),
            Some(t) if t.is_binary() => Err(ParseError::Dangling { pos: op_pos, op: op.to_string() }),
            _ => next(self),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let here = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(if self.toks.is_empty() {
                ParseError::Empty
            } else {
                ParseError::Unexpected { pos: here, found: "end of input".into() }
            });
        };
        self.pos += 1;
        match tok {
            Tok::Not => {
                if self.peek().is_none() {
                    return Err(ParseError::Dangling { pos: here, op: "~".into() });
                }
                Ok(Formula::neg(self.unary()?))
            }
            Tok::False => Ok(Formula::Bottom),
            Tok::True => Ok(Formula::top()),
            Tok::Ident(name) => {
                let l = Letter::new(&name).map_err(|_| ParseError::Unexpected { pos: here, found: format!("letter {name:?}") })?;
                Ok(Formula::Atom(l))
            }
            Tok::LParen => {
                if self.peek() == Some(&Tok::RParen) {
                    return Err(ParseError::Unexpected { pos: self.offset(), found: "')'".into() });
                }
                let inner = self.formula()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ParseError::Unbalanced { pos: here });
                }
                Ok(inner)
            }
            Tok::RParen => Err(ParseError::Unbalanced { pos: here }),
            t => Err(ParseError::Dangling { pos: here, op: t.describe().trim_matches('\'').to_string() }),
        }
    }
}

/// Parses a formula from its concrete syntax.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.formula()?;
    if let Some((pos, tok)) = p.toks.get(p.pos) {
        return Err(match tok {
            Tok::RParen => ParseError::Unbalanced { pos: *pos },
            t => ParseError::Unexpected { pos: *pos, found: t.describe() },
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::letter("p")
    }
    fn q() -> Formula {
        Formula::letter("q")
    }
    fn r() -> Formula {
        Formula::letter("r")
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("p -> (q -< false)").unwrap(),
            Formula::implies(p(), Formula::coimplies(q(), Formula::Bottom))
        );
        assert_eq!(parse("~p").unwrap(), Formula::implies(p(), Formula::Bottom));
        assert_eq!(parse("p & q | r").unwrap(), Formula::or(Formula::and(p(), q()), r()));
        assert_eq!(parse("true").unwrap(), Formula::implies(Formula::Bottom, Formula::Bottom));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("p -< q -> r").unwrap(),
            Formula::implies(Formula::coimplies(p(), q()), r())
        );
        assert_eq!(parse("p -> q -> r").unwrap(), Formula::implies(p(), Formula::implies(q(), r())));
        assert_eq!(parse("p -< q -< r").unwrap(), Formula::coimplies(Formula::coimplies(p(), q()), r()));
        assert_eq!(parse("~p & q").unwrap(), Formula::and(Formula::neg(p()), q()));
        assert_eq!(parse("p | q -< r").unwrap(), Formula::coimplies(Formula::or(p(), q()), r()));
    }

    #[test]
    fn identifiers_with_signs() {
        assert_eq!(parse("q+a->q-b").unwrap(), Formula::implies(Formula::letter("q+a"), Formula::letter("q-b")));
        assert_eq!(parse("p-<q").unwrap(), Formula::coimplies(p(), q()));
        assert_eq!(parse("r-1 & s+2").unwrap(), Formula::and(Formula::letter("r-1"), Formula::letter("s+2")));
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse("p # the letter\n & q").unwrap(), Formula::and(p(), q()));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("p $ q"), Err(ParseError::Lexical { pos: 2, ch: '$' }));
        assert_eq!(parse("(p & q"), Err(ParseError::Unbalanced { pos: 0 }));
        assert_eq!(parse("p & q)"), Err(ParseError::Unbalanced { pos: 5 }));
        assert_eq!(parse("p ->"), Err(ParseError::Dangling { pos: 2, op: "->".into() }));
        assert_eq!(parse("p & | q"), Err(ParseError::Dangling { pos: 2, op: "&".into() }));
        assert_eq!(parse("& q"), Err(ParseError::Dangling { pos: 0, op: "&".into() }));
        assert_eq!(parse("~"), Err(ParseError::Dangling { pos: 0, op: "~".into() }));
        assert_eq!(parse("  "), Err(ParseError::Empty));
        assert!(matches!(parse("p q"), Err(ParseError::Unexpected { pos: 2, .. })));
    }
}
