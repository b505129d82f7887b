//! `key = value` solver configuration files.
//!
//! Keys absent from a file keep their default values. `#` starts a comment.

use std::fmt::Write as _;

use amgtune_core::amg::ConfigError;
use amgtune_core::space::ParamValue;
use amgtune_core::SolverConfig;

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ConfigFileError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_config(text: &str) -> Result<SolverConfig, ConfigFileError> {
    let mut cfg = SolverConfig::default();
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| ConfigFileError { line, msg };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if seen.contains(&key) {
            return Err(err(format!("`{key}` set twice")));
        }
        seen.push(key);
        cfg.set(key, &ParamValue::parse(value)).map_err(|e| match e {
            ConfigError::UnknownKey(k) => err(format!("unknown key `{k}`")),
            e => err(e.to_string()),
        })?;
    }
    cfg.validate().map_err(|e| ConfigFileError {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(cfg)
}

/// Every field, in declaration order.
pub fn format_config(cfg: &SolverConfig) -> String {
    let mut s = String::new();
    for key in SolverConfig::KEYS {
        let _ = writeln!(s, "{key} = {}", cfg.get(key).expect("known key"));
    }
    s
}
