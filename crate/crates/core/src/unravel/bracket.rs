use std::collections::HashMap;

use crate::formula::Letter;
use crate::kripke::{normalize, KripkeModel, ModelFile, Mode};

use super::UnravelError;

/// World ids may contain characters that letters cannot; those become `_`.
fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '+' | '-') { c } else { '_' }).collect()
}

/// The name of `q⁺_w`, true exactly on the worlds above `w`.
pub fn plus_letter(world: &str) -> Letter {
    Letter::new(&format!("q+{}", sanitize(world))).expect("sanitized names are letters")
}

/// The name of `q⁻_w`, false exactly on the worlds below `w`.
pub fn minus_letter(world: &str) -> Letter {
    Letter::new(&format!("q-{}", sanitize(world))).expect("sanitized names are letters")
}

/// `m` expanded with `q⁺_w` and `q⁻_w` for every world `w`.
pub fn bracket(m: &KripkeModel) -> Result<KripkeModel, UnravelError> {
    let mut file: ModelFile = m.to_file(None);
    let mut owner: HashMap<String, String> = HashMap::new();
    for (i, w) in m.worlds().iter().enumerate() {
        let plus = plus_letter(w);
        let minus = minus_letter(w);
        for l in [&plus, &minus] {
            if m.signature().contains(l) {
                return Err(UnravelError::LetterCollision(l.to_string()));
            }
            if let Some(first) = owner.insert(l.to_string(), w.clone()) {
                return Err(UnravelError::BracketNameClash { letter: l.to_string(), first, second: w.clone() });
            }
        }
        let above = m.up(i).iter().map(|j| m.world(j).to_string()).collect();
        let outside_below = (0..m.len()).filter(|&j| !m.leq(j, i)).map(|j| m.world(j).to_string()).collect();
        file.signature.push(plus.to_string());
        file.signature.push(minus.to_string());
        file.valuation.insert(plus.to_string(), above);
        file.valuation.insert(minus.to_string(), outside_below);
    }
    Ok(normalize(&file, Mode::Strict)?)
}
