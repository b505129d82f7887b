//! Discretized parameter search space: every tunable parameter becomes a
//! finite grid of values addressed by an index, and a point of the space is
//! a vector of such indices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::amg::{ConfigError, SolverConfig};
use crate::fingerprint::fnv1a;
use crate::math;

/// A single parameter value as it appears in space and config files.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Symbol(String),
}

impl ParamValue {
    /// Integers first, then reals, anything else is a symbol.
    pub fn parse(text: &str) -> ParamValue {
        let t = text.trim();
        if let Ok(i) = t.parse::<i64>() {
            return ParamValue::Int(i);
        }
        match t.parse::<f64>() {
            Ok(f) if f.is_finite() => ParamValue::Real(f),
            _ => ParamValue::Symbol(t.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            ParamValue::Int(i) => Some(i as f64),
            ParamValue::Real(f) => Some(f),
            ParamValue::Symbol(_) => None,
        }
    }

    /// Integral reals are accepted.
    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            ParamValue::Int(i) => Some(i),
            ParamValue::Real(f) if f == math::round(f) && f.abs() < 9.0e15 => Some(f as i64),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            ParamValue::Symbol(s) => Some(s),
            _ => None,
        }
    }

    /// Grid membership: symbols exactly, numbers to a relative 1e-9.
    pub fn matches(&self, other: &ParamValue) -> bool {
        match (self, other) {
            (ParamValue::Symbol(a), ParamValue::Symbol(b)) => a == b,
            (ParamValue::Symbol(_), _) | (_, ParamValue::Symbol(_)) => false,
            _ => {
                let (a, b) = (self.as_f64().unwrap(), other.as_f64().unwrap());
                (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
            }
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(x) => write!(f, "{x:?}"),
            ParamValue::Symbol(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("parameter `{name}`: {msg}")]
    InvalidSpec { name: String, msg: String },
    #[error("duplicate parameter `{0}`")]
    Duplicate(String),
    #[error("value {value} of `{name}` is not on its grid")]
    OffGrid { name: String, value: String },
    #[error("vector has {found} coordinates, space has {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("index {index} out of range for `{name}` ({k} values)")]
    IndexOutOfRange { name: String, index: usize, k: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// How a parameter's allowed values were specified.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecKind {
    /// `lo, lo + step, …, ≤ hi`.
    ContinuousRange { lo: f64, hi: f64, step: f64 },
    /// Every integer in `[lo, hi]`.
    DiscreteRange { lo: i64, hi: i64 },
    DiscreteList,
}

/// One dimension of the search space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec {
    name: String,
    kind: SpecKind,
    values: Vec<ParamValue>,
}

fn spec_error(name: &str, msg: impl Into<String>) -> ParamError {
    ParamError::InvalidSpec {
        name: name.to_string(),
        msg: msg.into(),
    }
}

impl ParameterSpec {
    pub fn range(name: &str, lo: f64, hi: f64, step: f64) -> Result<Self, ParamError> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
            return Err(spec_error(name, format!("bad range({lo}, {hi}, {step})")));
        }
        let count = math::floor((hi - lo) / step + 1e-9) as usize + 1;
        let values = (0..count)
            .map(|i| ParamValue::Real(math::round((lo + i as f64 * step) * 1e12) / 1e12))
            .collect();
        Ok(ParameterSpec {
            name: name.to_string(),
            kind: SpecKind::ContinuousRange { lo, hi, step },
            values,
        })
    }

    pub fn ints(name: &str, lo: i64, hi: i64) -> Result<Self, ParamError> {
        if hi < lo {
            return Err(spec_error(name, format!("bad ints({lo}, {hi})")));
        }
        Ok(ParameterSpec {
            name: name.to_string(),
            kind: SpecKind::DiscreteRange { lo, hi },
            values: (lo..=hi).map(ParamValue::Int).collect(),
        })
    }

    pub fn list(name: &str, values: Vec<ParamValue>) -> Result<Self, ParamError> {
        if values.is_empty() {
            return Err(spec_error(name, "empty list"));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].iter().any(|u| u.matches(v)) {
                return Err(spec_error(name, format!("repeated value {v}")));
            }
        }
        Ok(ParameterSpec {
            name: name.to_string(),
            kind: SpecKind::DiscreteList,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SpecKind {
        &self.kind
    }

    pub fn values(&self) -> &[ParamValue] {
        &self.values
    }

    /// Number of grid values K_j.
    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn index_of(&self, value: &ParamValue) -> Option<usize> {
        self.values.iter().position(|v| v.matches(value))
    }
}

impl fmt::Display for ParameterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : ", self.name)?;
        match &self.kind {
            SpecKind::ContinuousRange { lo, hi, step } => write!(f, "range({lo}, {hi}, {step})"),
            SpecKind::DiscreteRange { lo, hi } => write!(f, "ints({lo}, {hi})"),
            SpecKind::DiscreteList => {
                f.write_str("list(")?;
                for (i, v) in self.values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A point of the search space: one grid index per parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParameterVector {
    pub indices: Vec<u32>,
}

impl ParameterVector {
    pub fn new(indices: Vec<u32>) -> Self {
        ParameterVector { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Per-coordinate step probabilities of the soft mutation: stay with
/// `p_stay`, otherwise move one grid step up or down with equal odds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftMutation {
    pub p_stay: f64,
}

impl Default for SoftMutation {
    fn default() -> Self {
        SoftMutation { p_stay: 0.5 }
    }
}

/// The ordered list of tunable parameters plus the values frozen for the
/// rest of the solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    specs: Vec<ParameterSpec>,
    frozen: BTreeMap<String, ParamValue>,
}

impl SearchSpace {
    /// A space over arbitrary named parameters.
    pub fn new(
        specs: Vec<ParameterSpec>,
        frozen: BTreeMap<String, ParamValue>,
    ) -> Result<Self, ParamError> {
        for (i, s) in specs.iter().enumerate() {
            if specs[..i].iter().any(|t| t.name == s.name) || frozen.contains_key(&s.name) {
                return Err(ParamError::Duplicate(s.name.clone()));
            }
        }
        Ok(SearchSpace { specs, frozen })
    }

    /// A space over solver parameters: names must be `SolverConfig` keys,
    /// every grid value must be a legal setting, and any field neither tuned
    /// nor frozen is frozen at its value in `base`.
    pub fn for_solver(
        specs: Vec<ParameterSpec>,
        mut frozen: BTreeMap<String, ParamValue>,
        base: &SolverConfig,
    ) -> Result<Self, ParamError> {
        let mut probe = base.clone();
        for (name, v) in &frozen {
            probe.set(name, v)?;
        }
        for s in &specs {
            for v in &s.values {
                probe.set(&s.name, v)?;
            }
        }
        for key in SolverConfig::KEYS {
            if !frozen.contains_key(key) && !specs.iter().any(|s| s.name == key) {
                frozen.insert(key.to_string(), base.get(key)?);
            }
        }
        Self::new(specs, frozen)
    }

    pub fn specs(&self) -> &[ParameterSpec] {
        &self.specs
    }

    pub fn frozen(&self) -> &BTreeMap<String, ParamValue> {
        &self.frozen
    }

    /// Number of tuned parameters N.
    pub fn dims(&self) -> usize {
        self.specs.len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.specs.iter().map(|s| s.k()).collect()
    }

    /// Exact number of points, ∏ K_j.
    pub fn cardinality(&self) -> BigUint {
        self.specs
            .iter()
            .fold(BigUint::from(1u32), |acc, s| acc * BigUint::from(s.k()))
    }

    /// Cardinality when it fits in a `u64`.
    pub fn cardinality_u64(&self) -> Option<u64> {
        self.specs
            .iter()
            .try_fold(1u64, |acc, s| acc.checked_mul(s.k() as u64))
    }

    /// Canonical text form, one parameter per line; frozen values sorted.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for s in &self.specs {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        for (k, v) in &self.frozen {
            out.push_str(&format!("{k} : frozen({v})\n"));
        }
        out
    }

    /// Hash of [`canonical`](Self::canonical); ties datasets and models to a space.
    pub fn fingerprint(&self) -> u64 {
        fnv1a(self.canonical().as_bytes())
    }

    pub fn check(&self, v: &ParameterVector) -> Result<(), ParamError> {
        if v.len() != self.dims() {
            return Err(ParamError::WrongLength {
                expected: self.dims(),
                found: v.len(),
            });
        }
        for (s, &i) in self.specs.iter().zip(&v.indices) {
            if i as usize >= s.k() {
                return Err(ParamError::IndexOutOfRange {
                    name: s.name.clone(),
                    index: i as usize,
                    k: s.k(),
                });
            }
        }
        Ok(())
    }

    pub fn values_of(&self, v: &ParameterVector) -> Result<Vec<(&str, &ParamValue)>, ParamError> {
        self.check(v)?;
        Ok(self
            .specs
            .iter()
            .zip(&v.indices)
            .map(|(s, &i)| (s.name.as_str(), &s.values[i as usize]))
            .collect())
    }

    /// Concrete solver configuration for `v`, frozen fields included.
    pub fn decode(&self, v: &ParameterVector) -> Result<SolverConfig, ParamError> {
        let mut cfg = SolverConfig::default();
        for (k, val) in &self.frozen {
            cfg.set(k, val)?;
        }
        for (name, val) in self.values_of(v)? {
            cfg.set(name, val)?;
        }
        Ok(cfg)
    }

    /// Grid indices of a configuration; every tuned field must sit on its grid.
    pub fn encode(&self, cfg: &SolverConfig) -> Result<ParameterVector, ParamError> {
        let mut indices = Vec::with_capacity(self.dims());
        for s in &self.specs {
            let value = cfg.get(&s.name)?;
            let idx = s.index_of(&value).ok_or_else(|| ParamError::OffGrid {
                name: s.name.clone(),
                value: value.to_string(),
            })?;
            indices.push(idx as u32);
        }
        Ok(ParameterVector { indices })
    }

    /// Grid point whose decoded configuration is exactly `cfg`, frozen
    /// fields included; `None` when `cfg` is off-grid or disagrees with a
    /// frozen value.
    pub fn encode_exact(&self, cfg: &SolverConfig) -> Option<ParameterVector> {
        let v = self.encode(cfg).ok()?;
        let back = self.decode(&v).ok()?;
        SolverConfig::KEYS
            .iter()
            .all(|k| match (back.get(k), cfg.get(k)) {
                (Ok(a), Ok(b)) => a.matches(&b),
                _ => false,
            })
            .then_some(v)
    }

    /// Uniform independent index per parameter.
    pub fn random_vector<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ParameterVector {
        ParameterVector {
            indices: self
                .specs
                .iter()
                .map(|s| rng.gen_range(0..s.k()) as u32)
                .collect(),
        }
    }

    /// Moves every coordinate independently by 0 or ±1 grid step, clamped
    /// to the grid.
    pub fn soft_mutate<R: rand::Rng + ?Sized>(
        &self,
        v: &ParameterVector,
        rng: &mut R,
        m: &SoftMutation,
    ) -> ParameterVector {
        let step_up = 0.5 * (1.0 - m.p_stay);
        let indices = self
            .specs
            .iter()
            .zip(&v.indices)
            .map(|(s, &i)| {
                let u: f64 = rng.gen();
                let max = s.k() as i64 - 1;
                let shifted = if u < m.p_stay {
                    i as i64
                } else if u < m.p_stay + step_up {
                    i as i64 + 1
                } else {
                    i as i64 - 1
                };
                shifted.clamp(0, max.max(0)) as u32
            })
            .collect();
        ParameterVector { indices }
    }

    /// Network input encoding: `index / (K_j − 1)`, 0 for single-valued grids.
    pub fn normalize(&self, v: &ParameterVector) -> Vec<f64> {
        self.specs
            .iter()
            .zip(&v.indices)
            .map(|(s, &i)| {
                if s.k() <= 1 {
                    0.0
                } else {
                    i as f64 / (s.k() - 1) as f64
                }
            })
            .collect()
    }

    pub fn lowest(&self) -> ParameterVector {
        ParameterVector {
            indices: alloc::vec![0; self.dims()],
        }
    }

    pub fn highest(&self) -> ParameterVector {
        ParameterVector {
            indices: self.specs.iter().map(|s| s.k() as u32 - 1).collect(),
        }
    }

    /// Every point in lexicographic order (last coordinate fastest).
    pub fn enumerate(&self) -> Enumerate<'_> {
        Enumerate {
            ks: self.cardinalities(),
            next: if self.specs.iter().all(|s| s.k() > 0) {
                Some(self.lowest())
            } else {
                None
            },
            _space: self,
        }
    }
}

pub struct Enumerate<'a> {
    ks: Vec<usize>,
    next: Option<ParameterVector>,
    _space: &'a SearchSpace,
}

impl Iterator for Enumerate<'_> {
    type Item = ParameterVector;

    fn next(&mut self) -> Option<ParameterVector> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut j = succ.indices.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            succ.indices[j] += 1;
            if (succ.indices[j] as usize) < self.ks[j] {
                self.next = Some(succ);
                break;
            }
            succ.indices[j] = 0;
        }
        Some(current)
    }
}
