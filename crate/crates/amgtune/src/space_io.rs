//! Search-space files, one parameter per line:
//!
//! ```text
//! coarsening : list(classical_rs, pmis_like)
//! p_max_elements : ints(0, 10)
//! strength_threshold : range(0, 0.9, 0.1)
//! max_row_sum : frozen(0.9)
//! ```
//!
//! Solver fields not mentioned are frozen at their defaults.

use std::collections::BTreeMap;

use amgtune_core::space::{ParamError, ParamValue, ParameterSpec};
use amgtune_core::{SearchSpace, SolverConfig};

#[derive(Debug, thiserror::Error)]
pub enum SpaceFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Param {
        line: usize,
        #[source]
        source: ParamError,
    },
    #[error(transparent)]
    Space(#[from] ParamError),
}

fn args(body: &str) -> Vec<&str> {
    body.split(',').map(str::trim).collect()
}

fn number(tok: &str, line: usize) -> Result<f64, SpaceFileError> {
    ParamValue::parse(tok).as_f64().ok_or_else(|| SpaceFileError::Syntax {
        line,
        msg: format!("expected a number, got `{tok}`"),
    })
}

fn integer(tok: &str, line: usize) -> Result<i64, SpaceFileError> {
    ParamValue::parse(tok).as_i64().ok_or_else(|| SpaceFileError::Syntax {
        line,
        msg: format!("expected an integer, got `{tok}`"),
    })
}

enum Entry {
    Spec(ParameterSpec),
    Frozen(String, ParamValue),
}

fn parse_line(content: &str, line: usize) -> Result<Entry, SpaceFileError> {
    let syntax = |msg: String| SpaceFileError::Syntax { line, msg };
    let (name, rhs) = content
        .split_once(':')
        .ok_or_else(|| syntax(format!("expected `name : kind(...)`, got `{content}`")))?;
    let name = name.trim();
    let rhs = rhs.trim();
    let open = rhs.find('(').ok_or_else(|| syntax(format!("expected `kind(...)`, got `{rhs}`")))?;
    let body = rhs[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| syntax("missing closing parenthesis".into()))?;
    let a = args(body);
    let arity = |n: usize| {
        if a.len() == n {
            Ok(())
        } else {
            Err(syntax(format!("`{}` takes {n} arguments, got {}", &rhs[..open], a.len())))
        }
    };
    let param = |source| SpaceFileError::Param { line, source };
    Ok(match rhs[..open].trim() {
        "range" => {
            arity(3)?;
            let spec = ParameterSpec::range(name, number(a[0], line)?, number(a[1], line)?, number(a[2], line)?);
            Entry::Spec(spec.map_err(param)?)
        }
        "ints" => {
            arity(2)?;
            Entry::Spec(ParameterSpec::ints(name, integer(a[0], line)?, integer(a[1], line)?).map_err(param)?)
        }
        "list" => {
            if a.iter().any(|t| t.is_empty()) {
                return Err(syntax("empty list element".into()));
            }
            Entry::Spec(ParameterSpec::list(name, a.iter().map(|t| ParamValue::parse(t)).collect()).map_err(param)?)
        }
        "frozen" => {
            arity(1)?;
            Entry::Frozen(name.to_string(), ParamValue::parse(a[0]))
        }
        k => return Err(syntax(format!("unknown kind `{k}`"))),
    })
}

/// Parses a space over solver parameters. Names must be solver keys and
/// every listed value a legal setting.
pub fn parse_space(text: &str) -> Result<SearchSpace, SpaceFileError> {
    let mut specs = Vec::new();
    let mut frozen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let entry = parse_line(content, line)?;
        let name = match &entry {
            Entry::Spec(s) => s.name().to_string(),
            Entry::Frozen(n, _) => n.clone(),
        };
        if !SolverConfig::is_key(&name) {
            return Err(SpaceFileError::Syntax {
                line,
                msg: format!("unknown solver parameter `{name}`"),
            });
        }
        if specs.iter().any(|s: &ParameterSpec| s.name() == name) || frozen.contains_key(&name) {
            return Err(SpaceFileError::Param {
                line,
                source: ParamError::Duplicate(name),
            });
        }
        let mut probe = SolverConfig::default();
        let values = match &entry {
            Entry::Spec(s) => s.values(),
            Entry::Frozen(_, v) => std::slice::from_ref(v),
        };
        for v in values {
            probe.set(&name, v).map_err(|e| SpaceFileError::Param {
                line,
                source: e.into(),
            })?;
        }
        match entry {
            Entry::Spec(s) => specs.push(s),
            Entry::Frozen(n, v) => {
                frozen.insert(n, v);
            }
        }
    }
    Ok(SearchSpace::for_solver(specs, frozen, &SolverConfig::default())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample
coarsening : list(classical_rs, pmis_like)
p_max_elements : ints(0, 10)
strength_threshold : range(0, 0.9, 0.1)
max_row_sum : frozen(0.9)
";

    #[test]
    fn parses_and_fills_defaults() {
        let s = parse_space(SAMPLE).unwrap();
        assert_eq!(s.cardinalities(), vec![2, 11, 10]);
        assert_eq!(s.frozen().len(), SolverConfig::KEYS.len() - 3);
        let cfg = s.decode(&s.lowest()).unwrap();
        assert_eq!(cfg.max_row_sum, 0.9);
        assert_eq!(cfg.strength_threshold, 0.0);
    }

    #[test]
    fn canonical_text_reparses_to_the_same_space() {
        let s = parse_space(SAMPLE).unwrap();
        let t = parse_space(&s.canonical()).unwrap();
        assert_eq!(s.fingerprint(), t.fingerprint());
        assert_eq!(s, t);
    }

    #[test]
    fn errors() {
        for (text, line) in [
            ("coarsening : list(classical_rs, bogus)\n", 1),
            ("\nfoo : ints(0, 1)\n", 2),
            ("cycle : list(V, W)\ncycle : frozen(V)\n", 2),
            ("cycle list(V)\n", 1),
            ("p_max_elements : ints(0)\n", 1),
            ("p_max_elements : ints(0, 1\n", 1),
            ("trunc_factor : range(0.5, 0.1, 0.1)\n", 1),
        ] {
            let e = parse_space(text).unwrap_err().to_string();
            assert!(e.contains(&format!("line {line}")) || line == 0, "{text}: {e}");
        }
    }
}
