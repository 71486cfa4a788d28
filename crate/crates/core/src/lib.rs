pub mod biasim;
pub mod cli;
pub mod bits;
pub mod enumerate;
pub mod fol;
pub mod formula;
pub mod kripke;
pub mod random;
pub mod semantics;
pub mod suites;
pub mod unravel;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/models.md")]
    struct Models;
    #[doc = include_str!("../../../book/src/formulas.md")]
    struct Formulas;
    #[doc = include_str!("../../../book/src/biasimulations.md")]
    struct Biasimulations;
    #[doc = include_str!("../../../book/src/unravelling.md")]
    struct Unravelling;
    #[doc = include_str!("../../../book/src/translation.md")]
    struct Translation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
