//! Hyperparameter search spaces and their unit-hypercube embedding.
//!
//! A [`HyperparameterSpace`] maps a point `u ∈ [0,1]^d` to a concrete
//! [`Configuration`] (`decode`) and back (`to_unit`). For modeling, a
//! configuration is turned into a [`FeatureVector`]: numeric parameters keep
//! their unit coordinate (log-warped when the scale is log) and categoricals
//! are expanded one-hot.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamKind {
    Continuous { lo: f64, hi: f64, scale: Scale },
    /// Integer-valued on `lo..=hi`.
    Discrete { lo: f64, hi: f64 },
    Categorical { values: Vec<String> },
}

/// A single concrete parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Category(String),
}

impl ParamValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ParamValue::Number(x) => Some(*x),
            ParamValue::Category(_) => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x}"),
            ParamValue::Category(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParamDef", into = "RawParamDef")]
pub struct ParamDef {
    name: String,
    kind: ParamKind,
}

/// Wire form: `{"name", "kind", "range": [lo, hi], "scale"}` for numeric
/// parameters and `{"name", "kind": "categorical", "values": [...]}`.
#[derive(Serialize, Deserialize)]
struct RawParamDef {
    name: String,
    kind: RawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<Scale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Continuous,
    Discrete,
    Categorical,
}

impl TryFrom<RawParamDef> for ParamDef {
    type Error = Error;

    fn try_from(raw: RawParamDef) -> Result<Self> {
        let numeric_range = || {
            raw.range
                .ok_or_else(|| Error::InvalidSpace(alloc::format!("{}: missing range", raw.name)))
        };
        let kind = match raw.kind {
            RawKind::Continuous => {
                let [lo, hi] = numeric_range()?;
                ParamKind::Continuous { lo, hi, scale: raw.scale.unwrap_or_default() }
            }
            RawKind::Discrete => {
                if raw.scale == Some(Scale::Log) {
                    return Err(Error::InvalidSpace(alloc::format!(
                        "{}: log scale is only supported for continuous parameters",
                        raw.name
                    )));
                }
                let [lo, hi] = numeric_range()?;
                ParamKind::Discrete { lo, hi }
            }
            RawKind::Categorical => ParamKind::Categorical {
                values: raw.values.clone().ok_or_else(|| {
                    Error::InvalidSpace(alloc::format!("{}: missing values", raw.name))
                })?,
            },
        };
        ParamDef::new(raw.name, kind)
    }
}

impl From<ParamDef> for RawParamDef {
    fn from(def: ParamDef) -> Self {
        match def.kind {
            ParamKind::Continuous { lo, hi, scale } => RawParamDef {
                name: def.name,
                kind: RawKind::Continuous,
                range: Some([lo, hi]),
                scale: Some(scale),
                values: None,
            },
            ParamKind::Discrete { lo, hi } => RawParamDef {
                name: def.name,
                kind: RawKind::Discrete,
                range: Some([lo, hi]),
                scale: Some(Scale::Linear),
                values: None,
            },
            ParamKind::Categorical { values } => RawParamDef {
                name: def.name,
                kind: RawKind::Categorical,
                range: None,
                scale: None,
                values: Some(values),
            },
        }
    }
}

impl ParamDef {
    pub fn new(name: impl Into<String>, kind: ParamKind) -> Result<Self> {
        let name = name.into();
        let bad = |msg: &str| Err(Error::InvalidSpace(alloc::format!("{name}: {msg}")));
        if name.is_empty() {
            return bad("empty parameter name");
        }
        match &kind {
            ParamKind::Continuous { lo, hi, scale } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad("range must satisfy lo < hi");
                }
                if *scale == Scale::Log && *lo <= 0.0 {
                    return bad("log scale requires lo > 0");
                }
            }
            ParamKind::Discrete { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad("range must satisfy lo < hi");
                }
                if libm::trunc(*lo) != *lo || libm::trunc(*hi) != *hi {
                    return bad("discrete bounds must be integers");
                }
            }
            ParamKind::Categorical { values } => {
                if values.is_empty() {
                    return bad("categorical value list is empty");
                }
                let unique: BTreeSet<&String> = values.iter().collect();
                if unique.len() != values.len() {
                    return bad("categorical values must be unique");
                }
            }
        }
        Ok(Self { name, kind })
    }

    pub fn continuous(name: impl Into<String>, lo: f64, hi: f64, scale: Scale) -> Result<Self> {
        Self::new(name, ParamKind::Continuous { lo, hi, scale })
    }

    pub fn discrete(name: impl Into<String>, lo: i64, hi: i64) -> Result<Self> {
        Self::new(name, ParamKind::Discrete { lo: lo as f64, hi: hi as f64 })
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::new(name, ParamKind::Categorical { values: values.into_iter().map(Into::into).collect() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ParamKind {
        &self.kind
    }

    /// Number of feature columns this parameter occupies.
    pub fn width(&self) -> usize {
        match &self.kind {
            ParamKind::Categorical { values } => values.len(),
            _ => 1,
        }
    }

    fn decode(&self, u: f64) -> ParamValue {
        match &self.kind {
            ParamKind::Continuous { lo, hi, scale } => {
                // Endpoints are returned exactly; exp(ln hi) is not always hi.
                let x = if u <= 0.0 {
                    *lo
                } else if u >= 1.0 {
                    *hi
                } else {
                    match scale {
                        Scale::Linear => lo + u * (hi - lo),
                        Scale::Log => {
                            let (a, b) = (libm::log(*lo), libm::log(*hi));
                            libm::exp(a + u * (b - a))
                        }
                    }
                };
                ParamValue::Number(x.clamp(*lo, *hi))
            }
            ParamKind::Discrete { lo, hi } => {
                let x = lo + libm::floor(u * (hi - lo + 1.0));
                ParamValue::Number(x.min(*hi))
            }
            ParamKind::Categorical { values } => {
                let idx = (libm::floor(u * values.len() as f64) as usize).min(values.len() - 1);
                ParamValue::Category(values[idx].clone())
            }
        }
    }

    fn unit(&self, value: &ParamValue) -> Result<f64> {
        match (&self.kind, value) {
            (ParamKind::Continuous { lo, hi, scale }, ParamValue::Number(x)) => {
                if !(lo <= x && x <= hi) {
                    return Err(domain!("{}: value {x} outside [{lo}, {hi}]", self.name));
                }
                Ok(match scale {
                    Scale::Linear => (x - lo) / (hi - lo),
                    Scale::Log => {
                        let (a, b) = (libm::log(*lo), libm::log(*hi));
                        ((libm::log(*x) - a) / (b - a)).clamp(0.0, 1.0)
                    }
                })
            }
            (ParamKind::Discrete { lo, hi }, ParamValue::Number(x)) => {
                if !(lo <= x && x <= hi) || libm::trunc(*x) != *x {
                    return Err(domain!("{}: {x} is not an integer in [{lo}, {hi}]", self.name));
                }
                // Bucket centre, so floor-bucketing maps it back to x.
                Ok((x - lo + 0.5) / (hi - lo + 1.0))
            }
            (ParamKind::Categorical { values }, ParamValue::Category(s)) => {
                let idx = values
                    .iter()
                    .position(|v| v == s)
                    .ok_or_else(|| domain!("{}: unknown category {s:?}", self.name))?;
                Ok((idx as f64 + 0.5) / values.len() as f64)
            }
            (_, v) => Err(domain!("{}: value {v} has the wrong type", self.name)),
        }
    }
}

/// Ordered, non-empty list of uniquely named parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ParamDef>", into = "Vec<ParamDef>")]
pub struct HyperparameterSpace {
    params: Vec<ParamDef>,
}

impl TryFrom<Vec<ParamDef>> for HyperparameterSpace {
    type Error = Error;

    fn try_from(params: Vec<ParamDef>) -> Result<Self> {
        Self::new(params)
    }
}

impl From<HyperparameterSpace> for Vec<ParamDef> {
    fn from(space: HyperparameterSpace) -> Self {
        space.params
    }
}

/// Encoded configuration: every entry in `[0,1]`, one-hot blocks for categoricals.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub id: usize,
    pub values: Vec<ParamValue>,
}

impl HyperparameterSpace {
    pub fn new(params: Vec<ParamDef>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("space needs at least one parameter".into()));
        }
        let mut names = BTreeSet::new();
        for p in &params {
            if !names.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(alloc::format!("duplicate parameter {}", p.name)));
            }
        }
        Ok(Self { params })
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParamDef] {
        &self.params
    }

    pub fn feature_len(&self) -> usize {
        self.params.iter().map(ParamDef::width).sum()
    }

    pub fn decode(&self, u: &[f64]) -> Result<Vec<ParamValue>> {
        if u.len() != self.dim() {
            return Err(domain!("unit vector has length {}, space has {}", u.len(), self.dim()));
        }
        if let Some(bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(domain!("unit coordinate {bad} outside [0, 1]"));
        }
        Ok(self.params.iter().zip(u).map(|(p, &x)| p.decode(x)).collect())
    }

    /// Inverse of [`decode`](Self::decode): the unit coordinate of each value.
    pub fn to_unit(&self, values: &[ParamValue]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        self.params.iter().zip(values).map(|(p, v)| p.unit(v)).collect()
    }

    pub fn encode(&self, values: &[ParamValue]) -> Result<FeatureVector> {
        self.check_len(values)?;
        let mut out = Vec::with_capacity(self.feature_len());
        for (p, v) in self.params.iter().zip(values) {
            let u = p.unit(v)?;
            match &p.kind {
                ParamKind::Categorical { values: cats } => {
                    let idx = (libm::floor(u * cats.len() as f64) as usize).min(cats.len() - 1);
                    out.extend((0..cats.len()).map(|k| if k == idx { 1.0 } else { 0.0 }));
                }
                _ => out.push(u),
            }
        }
        Ok(FeatureVector(out))
    }

    pub fn validate(&self, values: &[ParamValue]) -> Result<()> {
        self.to_unit(values).map(|_| ())
    }

    fn check_len(&self, values: &[ParamValue]) -> Result<()> {
        if values.len() != self.dim() {
            return Err(domain!(
                "configuration has {} values, space has {}",
                values.len(),
                self.dim()
            ));
        }
        Ok(())
    }
}
