use alloc::format;
use alloc::string::{String, ToString};

use crate::space::ParamValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CycleType {
    V,
    W,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coarsening {
    /// Ruge–Stüben first pass.
    ClassicalRs,
    /// Parallel-modified independent set with hashed tie-breaking.
    PmisLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interpolation {
    Direct,
    Classical,
}

impl CycleType {
    pub fn as_str(self) -> &'static str {
        match self {
            CycleType::V => "V",
            CycleType::W => "W",
            CycleType::F => "F",
        }
    }
}

impl Coarsening {
    pub fn as_str(self) -> &'static str {
        match self {
            Coarsening::ClassicalRs => "classical_rs",
            Coarsening::PmisLike => "pmis_like",
        }
    }
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::Direct => "direct",
            Interpolation::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown solver parameter `{0}`")]
    UnknownKey(String),
    #[error("parameter `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        msg: msg.into(),
    }
}

/// Full solver configuration: BiCGStab outer loop, multigrid preconditioner
/// and the pre/post Chebyshev smoothers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub cycle: CycleType,
    pub precond_iters: usize,
    pub max_row_sum: f64,
    pub coarse_matrix_size: usize,
    pub coarsening: Coarsening,
    pub interpolation: Interpolation,
    pub strength_threshold: f64,
    pub trunc_factor: f64,
    pub p_max_elements: usize,
    pub pre_cheby_order: usize,
    pub pre_spectrum_fraction: f64,
    pub post_cheby_order: usize,
    pub post_spectrum_fraction: f64,
    pub outer_max_iters: usize,
    pub outer_rel_tol: f64,
}

impl Default for SolverConfig {
    /// Baseline elliptic configuration (V(2,2)-Chebyshev, classical AMG,
    /// 50 BiCGStab iterations).
    fn default() -> Self {
        SolverConfig {
            cycle: CycleType::V,
            precond_iters: 1,
            max_row_sum: 1.0,
            coarse_matrix_size: 500,
            coarsening: Coarsening::ClassicalRs,
            interpolation: Interpolation::Classical,
            strength_threshold: 0.25,
            trunc_factor: 0.5,
            p_max_elements: 4,
            pre_cheby_order: 2,
            pre_spectrum_fraction: 0.3,
            post_cheby_order: 2,
            post_spectrum_fraction: 0.3,
            outer_max_iters: 50,
            outer_rel_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    /// Field names, in declaration order; also the keys of the text format.
    pub const KEYS: [&'static str; 15] = [
        "cycle",
        "precond_iters",
        "max_row_sum",
        "coarse_matrix_size",
        "coarsening",
        "interpolation",
        "strength_threshold",
        "trunc_factor",
        "p_max_elements",
        "pre_cheby_order",
        "pre_spectrum_fraction",
        "post_cheby_order",
        "post_spectrum_fraction",
        "outer_max_iters",
        "outer_rel_tol",
    ];

    pub fn is_key(key: &str) -> bool {
        Self::KEYS.contains(&key)
    }

    pub fn get(&self, key: &str) -> Result<ParamValue, ConfigError> {
        use ParamValue::*;
        Ok(match key {
            "cycle" => Symbol(self.cycle.as_str().into()),
            "precond_iters" => Int(self.precond_iters as i64),
            "max_row_sum" => Real(self.max_row_sum),
            "coarse_matrix_size" => Int(self.coarse_matrix_size as i64),
            "coarsening" => Symbol(self.coarsening.as_str().into()),
            "interpolation" => Symbol(self.interpolation.as_str().into()),
            "strength_threshold" => Real(self.strength_threshold),
            "trunc_factor" => Real(self.trunc_factor),
            "p_max_elements" => Int(self.p_max_elements as i64),
            "pre_cheby_order" => Int(self.pre_cheby_order as i64),
            "pre_spectrum_fraction" => Real(self.pre_spectrum_fraction),
            "post_cheby_order" => Int(self.post_cheby_order as i64),
            "post_spectrum_fraction" => Real(self.post_spectrum_fraction),
            "outer_max_iters" => Int(self.outer_max_iters as i64),
            "outer_rel_tol" => Real(self.outer_rel_tol),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        })
    }

    /// Assigns one field, checking its type and domain.
    pub fn set(&mut self, key: &str, value: &ParamValue) -> Result<(), ConfigError> {
        let real = |lo: f64, hi: f64, lo_open: bool| -> Result<f64, ConfigError> {
            let v = value
                .as_f64()
                .ok_or_else(|| invalid(key, format!("expected a number, got {value}")))?;
            let lo_ok = if lo_open { v > lo } else { v >= lo };
            if !(lo_ok && v <= hi) {
                let open = if lo_open { "(" } else { "[" };
                return Err(invalid(key, format!("{v} outside {open}{lo}, {hi}]")));
            }
            Ok(v)
        };
        let int = |lo: i64, hi: i64| -> Result<usize, ConfigError> {
            let v = value
                .as_i64()
                .ok_or_else(|| invalid(key, format!("expected an integer, got {value}")))?;
            if v < lo || v > hi {
                return Err(invalid(key, format!("{v} outside [{lo}, {hi}]")));
            }
            Ok(v as usize)
        };
        let sym = || -> Result<&str, ConfigError> {
            value
                .as_symbol()
                .ok_or_else(|| invalid(key, format!("expected a name, got {value}")))
        };
        match key {
            "cycle" => {
                self.cycle = match sym()? {
                    "V" | "v" => CycleType::V,
                    "W" | "w" => CycleType::W,
                    "F" | "f" => CycleType::F,
                    s => return Err(invalid(key, format!("unknown cycle `{s}`"))),
                }
            }
            "precond_iters" => self.precond_iters = int(1, 3)?,
            "max_row_sum" => self.max_row_sum = real(0.0, 1.0, true)?,
            "coarse_matrix_size" => self.coarse_matrix_size = int(1, i64::MAX)?,
            "coarsening" => {
                self.coarsening = match sym()? {
                    "classical_rs" => Coarsening::ClassicalRs,
                    "pmis_like" => Coarsening::PmisLike,
                    s => return Err(invalid(key, format!("unknown coarsening `{s}`"))),
                }
            }
            "interpolation" => {
                self.interpolation = match sym()? {
                    "direct" => Interpolation::Direct,
                    "classical" => Interpolation::Classical,
                    s => return Err(invalid(key, format!("unknown interpolation `{s}`"))),
                }
            }
            "strength_threshold" => self.strength_threshold = real(0.0, 0.9, false)?,
            "trunc_factor" => self.trunc_factor = real(0.0, 0.9, false)?,
            "p_max_elements" => self.p_max_elements = int(0, 10)?,
            "pre_cheby_order" => self.pre_cheby_order = int(1, 4)?,
            "pre_spectrum_fraction" => self.pre_spectrum_fraction = real(0.0, 0.9, true)?,
            "post_cheby_order" => self.post_cheby_order = int(1, 4)?,
            "post_spectrum_fraction" => self.post_spectrum_fraction = real(0.0, 0.9, true)?,
            "outer_max_iters" => self.outer_max_iters = int(0, i64::MAX)?,
            "outer_rel_tol" => self.outer_rel_tol = real(0.0, f64::MAX, true)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Re-checks every field against its domain.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut probe = SolverConfig::default();
        for key in Self::KEYS {
            probe.set(key, &self.get(key)?)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips_through_keys() {
        let d = SolverConfig::default();
        d.validate().unwrap();
        let mut c = SolverConfig {
            cycle: CycleType::W,
            ..SolverConfig::default()
        };
        for k in SolverConfig::KEYS {
            c.set(k, &d.get(k).unwrap()).unwrap();
        }
        assert_eq!(c, d);
    }

    #[test]
    fn domains_are_enforced() {
        let mut c = SolverConfig::default();
        assert!(c.set("precond_iters", &ParamValue::Int(4)).is_err());
        assert!(c.set("max_row_sum", &ParamValue::Real(0.0)).is_err());
        assert!(c.set("max_row_sum", &ParamValue::Real(1e-10)).is_ok());
        assert!(c.set("strength_threshold", &ParamValue::Real(0.95)).is_err());
        assert!(c.set("cycle", &ParamValue::Symbol("X".into())).is_err());
        assert!(c.set("p_max_elements", &ParamValue::Real(2.5)).is_err());
        assert!(c.set("trunc_factor", &ParamValue::Int(0)).is_ok());
        assert!(matches!(
            c.set("mg_num_paths", &ParamValue::Int(1)),
            Err(ConfigError::UnknownKey(_))
        ));
    }
}
