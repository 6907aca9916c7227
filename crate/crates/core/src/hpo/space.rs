use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DimensionKind {
    Integer {
        lo: i64,
        hi: i64,
    },
    /// A real interval; `log` dimensions are sampled, mutated and embedded in log space.
    Real {
        lo: f64,
        hi: f64,
        #[serde(default)]
        log: bool,
    },
    Categorical {
        options: Vec<String>,
    },
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    #[serde(flatten)]
    pub kind: DimensionKind,
}

/// One coordinate of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ParamValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(x) => Some(*x),
            ParamValue::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(x) => write!(f, "{x}"),
            ParamValue::Cat(s) => write!(f, "{s}"),
        }
    }
}

fn to_unit(x: f64, lo: f64, hi: f64, log: bool) -> f64 {
    if log {
        (x.ln() - lo.ln()) / (hi.ln() - lo.ln())
    } else {
        (x - lo) / (hi - lo)
    }
}

fn from_unit(u: f64, lo: f64, hi: f64, log: bool) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let x = if log {
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    } else {
        lo + u * (hi - lo)
    };
    x.clamp(lo, hi)
}

impl Dimension {
    pub fn integer(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        Dimension {
            name: name.into(),
            kind: DimensionKind::Integer { lo, hi },
        }
    }

    pub fn real(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Dimension {
            name: name.into(),
            kind: DimensionKind::Real { lo, hi, log: false },
        }
    }

    pub fn log_real(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Dimension {
            name: name.into(),
            kind: DimensionKind::Real { lo, hi, log: true },
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, options: impl IntoIterator<Item = S>) -> Self {
        Dimension {
            name: name.into(),
            kind: DimensionKind::Categorical {
                options: options.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Dimension {
            name: name.into(),
            kind: DimensionKind::Boolean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::Invariant(format!("dimension `{}`: {why}", self.name)));
        match &self.kind {
            DimensionKind::Integer { lo, hi } if lo >= hi => bad("lo must be < hi"),
            DimensionKind::Real { lo, hi, log } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    bad("lo must be < hi and finite")
                } else if *log && *lo <= 0.0 {
                    bad("log scale needs lo > 0")
                } else {
                    Ok(())
                }
            }
            DimensionKind::Categorical { options } => {
                let distinct: BTreeSet<&String> = options.iter().collect();
                if options.is_empty() {
                    bad("no options")
                } else if distinct.len() != options.len() {
                    bad("duplicate options")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, v: &ParamValue) -> bool {
        match (&self.kind, v) {
            (DimensionKind::Integer { lo, hi }, ParamValue::Int(i)) => lo <= i && i <= hi,
            (DimensionKind::Real { lo, hi, .. }, ParamValue::Real(x)) => *lo <= *x && *x <= *hi,
            (DimensionKind::Categorical { options }, ParamValue::Cat(s)) => options.contains(s),
            (DimensionKind::Boolean, ParamValue::Bool(_)) => true,
            _ => false,
        }
    }

    /// Midpoint of a range (in log space for log reals), the first option, or `false`.
    pub fn default_value(&self) -> ParamValue {
        match &self.kind {
            DimensionKind::Integer { lo, hi } => ParamValue::Int(lo + (hi - lo) / 2),
            DimensionKind::Real { lo, hi, log } => ParamValue::Real(from_unit(0.5, *lo, *hi, *log)),
            DimensionKind::Categorical { options } => ParamValue::Cat(options[0].clone()),
            DimensionKind::Boolean => ParamValue::Bool(false),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> ParamValue {
        match &self.kind {
            DimensionKind::Integer { lo, hi } => ParamValue::Int(rng.gen_range(*lo..=*hi)),
            DimensionKind::Real { lo, hi, log } => ParamValue::Real(from_unit(rng.gen::<f64>(), *lo, *hi, *log)),
            DimensionKind::Categorical { options } => ParamValue::Cat(options[rng.gen_range(0..options.len())].clone()),
            DimensionKind::Boolean => ParamValue::Bool(rng.gen()),
        }
    }

    /// Ranged values move uniformly within `±step` of the range and are
    /// clamped; categorical and boolean values are resampled.
    pub fn mutate(&self, v: &ParamValue, step: f64, rng: &mut impl Rng) -> ParamValue {
        match (&self.kind, v) {
            (DimensionKind::Integer { lo, hi }, ParamValue::Int(i)) => {
                let width = ((hi - lo) as f64 * step).max(1.0);
                let moved = *i as f64 + rng.gen_range(-width..=width);
                ParamValue::Int((moved.round() as i64).clamp(*lo, *hi))
            }
            (DimensionKind::Real { lo, hi, log }, ParamValue::Real(x)) => {
                let u = to_unit(*x, *lo, *hi, *log) + rng.gen_range(-step..=step);
                ParamValue::Real(from_unit(u, *lo, *hi, *log))
            }
            _ => self.sample(rng),
        }
    }

    /// Width of this dimension's embedding.
    pub fn embedding_width(&self) -> usize {
        match &self.kind {
            DimensionKind::Integer { .. } | DimensionKind::Real { .. } => 1,
            DimensionKind::Categorical { options } => options.len(),
            DimensionKind::Boolean => 2,
        }
    }

    fn embed_into(&self, v: &ParamValue, out: &mut Vec<f64>) {
        match (&self.kind, v) {
            (DimensionKind::Integer { lo, hi }, ParamValue::Int(i)) => out.push((*i - lo) as f64 / (hi - lo) as f64),
            (DimensionKind::Real { lo, hi, log }, ParamValue::Real(x)) => out.push(to_unit(*x, *lo, *hi, *log)),
            (DimensionKind::Categorical { options }, ParamValue::Cat(s)) => {
                out.extend(options.iter().map(|o| if o == s { 1.0 } else { 0.0 }))
            }
            (DimensionKind::Boolean, ParamValue::Bool(b)) => out.extend(if *b { [0.0, 1.0] } else { [1.0, 0.0] }),
            _ => unreachable!("value does not match its dimension"),
        }
    }

    fn snap(&self, coords: &[f64]) -> ParamValue {
        let argmax = |c: &[f64]| {
            c.iter()
                .enumerate()
                .fold(0, |best, (i, &x)| if x > c[best] { i } else { best })
        };
        match &self.kind {
            DimensionKind::Integer { lo, hi } => {
                let u = coords[0].clamp(0.0, 1.0);
                ParamValue::Int((*lo as f64 + u * (hi - lo) as f64).round() as i64)
            }
            DimensionKind::Real { lo, hi, log } => ParamValue::Real(from_unit(coords[0], *lo, *hi, *log)),
            DimensionKind::Categorical { options } => ParamValue::Cat(options[argmax(coords)].clone()),
            DimensionKind::Boolean => ParamValue::Bool(argmax(coords) == 1),
        }
    }
}

/// A point of a [`SearchSpace`]: one value per dimension, in dimension order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<ParamValue>);

impl Configuration {
    pub fn values(&self) -> &[ParamValue] {
        &self.0
    }

    /// Exact identity key: equal keys mean equal configurations.
    pub fn key(&self) -> String {
        let mut k = String::new();
        for v in &self.0 {
            match v {
                ParamValue::Bool(b) => k.push(if *b { 'T' } else { 'F' }),
                ParamValue::Int(i) => k.push_str(&format!("i{i}")),
                ParamValue::Real(x) => k.push_str(&format!("r{:016x}", x.to_bits())),
                ParamValue::Cat(s) => k.push_str(&format!("c{}:{s}", s.len())),
            }
            k.push('|');
        }
        k
    }
}

/// Ordered product of named dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub dimensions: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dimensions: Vec<Dimension>) -> Result<Self> {
        let space = SearchSpace { dimensions };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for d in &self.dimensions {
            d.validate()?;
            if !names.insert(d.name.as_str()) {
                return Err(Error::Invariant(format!("duplicate dimension `{}`", d.name)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        c.0.len() == self.dimensions.len() && self.dimensions.iter().zip(&c.0).all(|(d, v)| d.contains(v))
    }

    pub fn check(&self, c: &Configuration) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::Invariant(format!("configuration {} is outside the search space", self.describe(c))))
        }
    }

    pub fn default_configuration(&self) -> Configuration {
        Configuration(self.dimensions.iter().map(Dimension::default_value).collect())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Configuration {
        Configuration(self.dimensions.iter().map(|d| d.sample(rng)).collect())
    }

    pub fn embedding_width(&self) -> usize {
        self.dimensions.iter().map(Dimension::embedding_width).sum()
    }

    /// Ranged dimensions min-max scaled to `[0, 1]`, categoricals and booleans one-hot.
    pub fn embed(&self, c: &Configuration) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.embedding_width());
        for (d, v) in self.dimensions.iter().zip(&c.0) {
            d.embed_into(v, &mut out);
        }
        out
    }

    /// Nearest valid configuration to an embedding.
    pub fn snap(&self, embedding: &[f64]) -> Configuration {
        let mut offset = 0;
        let mut values = Vec::with_capacity(self.dimensions.len());
        for d in &self.dimensions {
            let w = d.embedding_width();
            values.push(d.snap(&embedding[offset..offset + w]));
            offset += w;
        }
        Configuration(values)
    }

    /// `{name: value}` JSON object.
    pub fn to_json(&self, c: &Configuration) -> serde_json::Value {
        let map = self
            .dimensions
            .iter()
            .zip(&c.0)
            .map(|(d, v)| (d.name.clone(), serde_json::to_value(v).expect("plain value")))
            .collect();
        serde_json::Value::Object(map)
    }

    /// Reads a `{name: value}` object, coercing integral numbers for integer dimensions.
    pub fn from_json(&self, v: &serde_json::Value) -> Result<Configuration> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Invariant("configuration must be a JSON object".into()))?;
        let mut values = Vec::with_capacity(self.dimensions.len());
        for d in &self.dimensions {
            let raw = obj
                .get(&d.name)
                .ok_or_else(|| Error::Invariant(format!("configuration lacks `{}`", d.name)))?;
            let value = match (&d.kind, raw) {
                (DimensionKind::Integer { .. }, serde_json::Value::Number(n)) if n.is_i64() => ParamValue::Int(n.as_i64().unwrap()),
                (DimensionKind::Real { .. }, serde_json::Value::Number(n)) => ParamValue::Real(n.as_f64().unwrap()),
                (DimensionKind::Categorical { .. }, serde_json::Value::String(s)) => ParamValue::Cat(s.clone()),
                (DimensionKind::Boolean, serde_json::Value::Bool(b)) => ParamValue::Bool(*b),
                _ => return Err(Error::Invariant(format!("bad value {raw} for `{}`", d.name))),
            };
            values.push(value);
        }
        let c = Configuration(values);
        self.check(&c)?;
        Ok(c)
    }

    pub fn describe(&self, c: &Configuration) -> String {
        self.to_json(c).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn mixed() -> SearchSpace {
        SearchSpace::new(vec![
            Dimension::integer("k", 1, 25),
            Dimension::real("x", -5.0, 5.0),
            Dimension::log_real("alpha", 1e-4, 1e2),
            Dimension::categorical("metric", ["euclidean", "manhattan"]),
            Dimension::boolean("flag"),
        ])
        .unwrap()
    }

    #[test]
    fn defaults_are_midpoints_and_first_options() {
        let s = mixed();
        let d = s.default_configuration();
        assert_eq!(d.0[0], ParamValue::Int(13));
        assert_eq!(d.0[1], ParamValue::Real(0.0));
        let alpha = d.0[2].as_real().unwrap();
        assert!((alpha - 0.1).abs() < 1e-12);
        assert_eq!(d.0[3], ParamValue::Cat("euclidean".into()));
        assert_eq!(d.0[4], ParamValue::Bool(false));
        assert!(s.contains(&d));
    }

    #[test]
    fn samples_and_mutations_stay_in_domain() {
        let s = mixed();
        let mut rng = rng_from_seed(3);
        for _ in 0..500 {
            let c = s.sample(&mut rng);
            assert!(s.contains(&c));
            let m = Configuration(
                s.dimensions
                    .iter()
                    .zip(&c.0)
                    .map(|(d, v)| d.mutate(v, 0.1, &mut rng))
                    .collect(),
            );
            assert!(s.contains(&m));
        }
    }

    #[test]
    fn embed_then_snap_is_identity() {
        let s = mixed();
        let mut rng = rng_from_seed(4);
        for _ in 0..100 {
            let c = s.sample(&mut rng);
            let e = s.embed(&c);
            assert_eq!(e.len(), s.embedding_width());
            let back = s.snap(&e);
            assert_eq!(back.0[0], c.0[0]);
            assert!((back.0[1].as_real().unwrap() - c.0[1].as_real().unwrap()).abs() < 1e-9);
            assert_eq!(back.0[3..], c.0[3..]);
        }
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(SearchSpace::new(vec![Dimension::integer("a", 3, 3)]).is_err());
        assert!(SearchSpace::new(vec![Dimension::log_real("a", 0.0, 1.0)]).is_err());
        assert!(SearchSpace::new(vec![Dimension::categorical("a", ["x", "x"])]).is_err());
        assert!(SearchSpace::new(vec![Dimension::boolean("a"), Dimension::boolean("a")]).is_err());
    }

    #[test]
    fn space_json_round_trip() {
        let s = mixed();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains(r#""kind":"integer""#));
        let back: SearchSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let c = s.default_configuration();
        assert_eq!(s.from_json(&s.to_json(&c)).unwrap(), c);
    }
}
