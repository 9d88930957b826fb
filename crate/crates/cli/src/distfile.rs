//! Sparse JSON distribution files.
//!
//! ```json
//! {
//!   "variables": ["S", "Y", "Z"],
//!   "alphabets": {"S": ["0", "1"], "Y": ["0", "1"], "Z": ["0", "1"]},
//!   "entries": [{"state": ["0", "0", "0"], "p": "1/4"}, ...]
//! }
//! ```
//!
//! States absent from `entries` have probability zero. Probabilities are
//! decimal strings, fractions `"a/b"` or plain JSON numbers.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use pidlab::dist::{Alphabet, JointDist, Variable, DEFAULT_TOLERANCE};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistFile {
    pub variables: Vec<String>,
    pub alphabets: BTreeMap<String, Vec<String>>,
    pub entries: Vec<Entry>,
    /// Free-form provenance, e.g. the generating family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub state: Vec<String>,
    pub p: Prob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Text(String),
    Number(f64),
}

impl Prob {
    pub fn value(&self) -> CliResult<f64> {
        match self {
            Prob::Number(v) => Ok(*v),
            Prob::Text(s) => parse_probability(s),
        }
    }
}

/// Decimal or `"numerator/denominator"`.
pub fn parse_probability(s: &str) -> CliResult<f64> {
    let bad = || CliError::Parse(format!("bad probability `{s}`"));
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let v = match s.split_once('/') {
        Some((num, den)) => {
            let den = number(den)?;
            if den == 0.0 {
                return Err(bad());
            }
            number(num)? / den
        }
        None => number(s)?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

impl DistFile {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// Dense distribution; rejects unknown labels, repeated states and mass
    /// that is negative or off unit total by more than `1e-9`.
    pub fn to_dist(&self) -> CliResult<JointDist> {
        let invalid = CliError::Validation;
        let mut vars = Vec::with_capacity(self.variables.len());
        for name in &self.variables {
            let labels = self
                .alphabets
                .get(name)
                .ok_or_else(|| invalid(format!("no alphabet for variable `{name}`")))?;
            let alphabet = Alphabet::new(labels.iter().cloned()).map_err(CliError::validation)?;
            vars.push(Variable::new(name.clone(), alphabet));
        }
        if let Some(extra) = self.alphabets.keys().find(|k| !self.variables.contains(k)) {
            return Err(invalid(format!("alphabet for undeclared variable `{extra}`")));
        }
        let mut seen = HashSet::new();
        for name in &self.variables {
            if !seen.insert(name) {
                return Err(invalid(format!("variable `{name}` declared twice")));
            }
        }

        let shape: Vec<usize> = vars.iter().map(|v| v.alphabet.len()).collect();
        let cells = shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| invalid("alphabet product overflows".into()))?;
        if cells > pidlab::dist::MAX_CELLS {
            return Err(invalid(format!("{cells} cells exceed the supported size")));
        }
        let mut mass = vec![0.0; cells];
        let mut filled = vec![false; cells];
        for entry in &self.entries {
            if entry.state.len() != vars.len() {
                return Err(invalid(format!(
                    "state {:?} has {} labels for {} variables",
                    entry.state,
                    entry.state.len(),
                    vars.len()
                )));
            }
            let mut flat = 0;
            for (label, v) in entry.state.iter().zip(&vars) {
                let i = v.alphabet.index_of(label).ok_or_else(|| {
                    invalid(format!("label `{label}` not in the alphabet of `{}`", v.name))
                })?;
                flat = flat * v.alphabet.len() + i;
            }
            if std::mem::replace(&mut filled[flat], true) {
                return Err(invalid(format!("state {:?} listed twice", entry.state)));
            }
            let p = entry.p.value()?;
            if p < 0.0 {
                return Err(invalid(format!("negative probability {p} at {:?}", entry.state)));
            }
            mass[flat] = p;
        }
        JointDist::validate(vars, mass, DEFAULT_TOLERANCE).map_err(CliError::validation)
    }

    /// Sparse file listing the nonzero cells of `p` with 17 significant
    /// digits, which reproduces every value exactly on reading.
    pub fn from_dist(p: &JointDist, source: Option<String>) -> Self {
        let vars = p.variables();
        let shape = p.shape();
        let mut entries = Vec::new();
        let mut index = vec![0usize; shape.len()];
        for &m in p.mass() {
            if m > 0.0 {
                entries.push(Entry {
                    state: index
                        .iter()
                        .zip(vars)
                        .map(|(&i, v)| v.alphabet.label(i).to_string())
                        .collect(),
                    p: Prob::Text(format!("{m:.16e}")),
                });
            }
            for k in (0..shape.len()).rev() {
                index[k] += 1;
                if index[k] < shape[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        DistFile {
            variables: vars.iter().map(|v| v.name.clone()).collect(),
            alphabets: vars
                .iter()
                .map(|v| (v.name.clone(), v.alphabet.labels().to_vec()))
                .collect(),
            entries,
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XOR: &str = r#"{
        "variables": ["S", "Y", "Z"],
        "alphabets": {"S": ["0", "1"], "Y": ["0", "1"], "Z": ["0", "1"]},
        "entries": [
            {"state": ["0", "0", "0"], "p": "1/4"},
            {"state": ["1", "0", "1"], "p": "0.25"},
            {"state": ["1", "1", "0"], "p": 0.25},
            {"state": ["0", "1", "1"], "p": "2.5e-1"}
        ]
    }"#;

    #[test]
    fn parses_fractions_and_decimals() {
        let p = DistFile::from_json(XOR).unwrap().to_dist().unwrap();
        assert_eq!(p.get(&[1, 0, 1]), 0.25);
        assert_eq!(p.get(&[1, 1, 1]), 0.0);
        assert_eq!(parse_probability(" 1 / 3 ").unwrap(), 1.0 / 3.0);
        assert!(parse_probability("1/0").is_err());
        assert!(parse_probability("abc").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let p = DistFile::from_json(XOR).unwrap().to_dist().unwrap();
        let vars = p.variables().to_vec();
        let odd = JointDist::new(vars, vec![0.1, 0.2, 0.05, 0.15, 1.0 / 3.0, 0.0, 0.1, 1.0 - 0.9333333333333333]).unwrap();
        let file = DistFile::from_dist(&odd, None);
        let back = DistFile::from_json(&file.to_json()).unwrap().to_dist().unwrap();
        assert_eq!(back, odd);
        assert_eq!(file.entries.len(), 7);
    }

    fn edited(f: impl FnOnce(&mut DistFile)) -> CliResult<JointDist> {
        let mut d = DistFile::from_json(XOR).unwrap();
        f(&mut d);
        d.to_dist()
    }

    #[test]
    fn validation_failures() {
        let cases: Vec<Box<dyn FnOnce(&mut DistFile)>> = vec![
            Box::new(|d| d.entries[0].state[0] = "7".into()),
            Box::new(|d| d.entries[1].state = d.entries[0].state.clone()),
            Box::new(|d| d.entries[0].p = Prob::Text("-0.25".into())),
            Box::new(|d| d.entries.pop().map(|_| ()).unwrap()),
            Box::new(|d| {
                d.alphabets.remove("Z");
            }),
            Box::new(|d| d.entries[0].state.pop().map(|_| ()).unwrap()),
        ];
        for case in cases {
            assert!(matches!(edited(case), Err(CliError::Validation(_))));
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(DistFile::from_json("{"), Err(CliError::Parse(_))));
        assert!(matches!(
            DistFile::from_json(r#"{"variables": [], "alphabets": {}, "entries": [], "extra": 1}"#),
            Err(CliError::Parse(_))
        ));
    }
}
