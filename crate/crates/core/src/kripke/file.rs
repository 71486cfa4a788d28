use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// The JSON model format.
///
/// ```json
/// {"signature": ["p", "q"], "worlds": ["a", "b"], "order": [["a", "b"]],
///  "valuation": {"p": ["b"], "q": []}, "point": "a"}
/// ```
///
/// `order` lists generating pairs; the loader always takes the reflexive and
/// transitive closure. Letters missing from `valuation` are false everywhere.
/// `point` is optional. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub signature: Vec<String>,
    pub worlds: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

impl ModelFile {
    pub fn from_parts(
        signature: &[&str],
        worlds: &[&str],
        order: &[(&str, &str)],
        valuation: &[(&str, &[&str])],
    ) -> ModelFile {
        ModelFile {
            signature: signature.iter().map(|s| s.to_string()).collect(),
            worlds: worlds.iter().map(|s| s.to_string()).collect(),
            order: order.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            valuation: valuation
                .iter()
                .map(|(l, ws)| (l.to_string(), ws.iter().map(|s| s.to_string()).collect()))
                .collect(),
            point: None,
        }
    }

    pub fn from_json(text: &str) -> serde_json::Result<ModelFile> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }
}
