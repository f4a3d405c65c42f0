use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::queue::SimTime;
use super::MeshError;

/// Per-message delay in simulated milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Latency {
    Fixed(f64),
    Uniform([f64; 2]),
}

impl Latency {
    fn validate(&self) -> Result<(), MeshError> {
        let ok = match *self {
            Latency::Fixed(ms) => ms.is_finite() && ms >= 0.0,
            Latency::Uniform([lo, hi]) => lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(MeshError::InvalidLink(format!("latency {self:?} must be nonnegative with lo <= hi")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> SimTime {
        match *self {
            Latency::Fixed(ms) => SimTime::from_ms(ms),
            Latency::Uniform([lo, hi]) if lo == hi => SimTime::from_ms(lo),
            Latency::Uniform([lo, hi]) => SimTime::from_ms(rng.gen_range(lo..=hi)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub latency: Latency,
    pub drop_probability: f64,
}

/// Latency and loss for every directed link, with per-link overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub default: LinkParams,
    /// Keyed by 0-based `(from, to)`.
    pub overrides: BTreeMap<(usize, usize), LinkParams>,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl LinkModel {
    /// 10 ms fixed latency, no loss.
    pub fn ideal() -> Self {
        Self::uniform_drop(0.0)
    }

    pub fn uniform_drop(p: f64) -> Self {
        Self {
            default: LinkParams {
                latency: Latency::Fixed(10.0),
                drop_probability: p,
            },
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_latency(mut self, latency: Latency) -> Self {
        self.default.latency = latency;
        self
    }

    pub fn with_drop(mut self, from: usize, to: usize, p: f64) -> Self {
        let mut params = self.params(from, to);
        params.drop_probability = p;
        self.overrides.insert((from, to), params);
        self
    }

    pub fn params(&self, from: usize, to: usize) -> LinkParams {
        self.overrides.get(&(from, to)).copied().unwrap_or(self.default)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        for p in std::iter::once(&self.default).chain(self.overrides.values()) {
            p.latency.validate()?;
            if !(0.0..=1.0).contains(&p.drop_probability) {
                return Err(MeshError::InvalidLink(format!(
                    "drop probability {} outside [0, 1]",
                    p.drop_probability
                )));
            }
        }
        Ok(())
    }

    /// Draws the fate of one message: `Some(delay)` if delivered.
    pub(crate) fn transmit<R: Rng>(&self, from: usize, to: usize, rng: &mut R) -> Option<SimTime> {
        let p = self.params(from, to);
        // Both draws always happen so the RNG stream does not depend on outcomes.
        let lost = rng.gen::<f64>() < p.drop_probability;
        let delay = p.latency.sample(rng);
        (!lost).then_some(delay)
    }

    pub fn to_json(&self) -> LinkModelJson {
        LinkModelJson {
            latency_ms: self.default.latency,
            drop: self.default.drop_probability,
            overrides: self
                .overrides
                .iter()
                .map(|(&(from, to), p)| LinkOverrideJson {
                    from: from + 1,
                    to: to + 1,
                    drop: Some(p.drop_probability),
                    latency_ms: (p.latency != self.default.latency).then_some(p.latency),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &LinkModelJson) -> Result<Self, MeshError> {
        let default = LinkParams {
            latency: json.latency_ms,
            drop_probability: json.drop,
        };
        let mut overrides = BTreeMap::new();
        for o in &json.overrides {
            if o.from == 0 || o.to == 0 {
                return Err(MeshError::InvalidLink("override labels are 1-based".into()));
            }
            overrides.insert(
                (o.from - 1, o.to - 1),
                LinkParams {
                    latency: o.latency_ms.unwrap_or(default.latency),
                    drop_probability: o.drop.unwrap_or(default.drop_probability),
                },
            );
        }
        let model = Self { default, overrides };
        model.validate()?;
        Ok(model)
    }
}

/// `{ "latency_ms": x | [lo, hi], "drop": p, "overrides": [{"from": i, "to": j, "drop": p}] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModelJson {
    #[serde(default = "default_latency")]
    pub latency_ms: Latency,
    #[serde(default)]
    pub drop: f64,
    #[serde(default)]
    pub overrides: Vec<LinkOverrideJson>,
}

fn default_latency() -> Latency {
    Latency::Fixed(10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkOverrideJson {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<Latency>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_latency_forms() {
        let fixed: LinkModelJson = serde_json::from_str(r#"{"latency_ms": 5, "drop": 0.1}"#).unwrap();
        assert_eq!(fixed.latency_ms, Latency::Fixed(5.0));
        let json = r#"{"latency_ms": [2, 8], "drop": 0.0, "overrides": [{"from": 1, "to": 2, "drop": 1.0}]}"#;
        let parsed: LinkModelJson = serde_json::from_str(json).unwrap();
        let model = LinkModel::from_json(&parsed).unwrap();
        assert_eq!(model.params(0, 1).drop_probability, 1.0);
        assert_eq!(model.params(1, 0).drop_probability, 0.0);
        assert_eq!(model.params(0, 1).latency, Latency::Uniform([2.0, 8.0]));
        let again = LinkModel::from_json(&model.to_json()).unwrap();
        assert_eq!(again, model);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_drop: LinkModelJson = serde_json::from_str(r#"{"drop": 1.5}"#).unwrap();
        assert!(LinkModel::from_json(&bad_drop).is_err());
        let bad_lat: LinkModelJson = serde_json::from_str(r#"{"latency_ms": [5, 1]}"#).unwrap();
        assert!(LinkModel::from_json(&bad_lat).is_err());
        let bad_label: LinkModelJson = serde_json::from_str(r#"{"overrides": [{"from": 0, "to": 1}]}"#).unwrap();
        assert!(LinkModel::from_json(&bad_label).is_err());
    }
}
