//! Space and configuration files shipped with the tool.

use amgtune_core::{SearchSpace, SolverConfig};

pub const SPACE7: &str = include_str!("../spaces/space7.space");
pub const SPACE13: &str = include_str!("../spaces/space13.space");
pub const TINY: &str = include_str!("../spaces/tiny.space");
pub const DEFAULT_CFG: &str = include_str!("../configs/default.cfg");

fn parse(text: &str) -> SearchSpace {
    crate::space_io::parse_space(text).expect("shipped space parses")
}

pub fn space7() -> SearchSpace {
    parse(SPACE7)
}

pub fn space13() -> SearchSpace {
    parse(SPACE13)
}

pub fn tiny() -> SearchSpace {
    parse(TINY)
}

/// A shipped space by name (`space7`, `space13`, `tiny`).
pub fn named_space(name: &str) -> Option<SearchSpace> {
    match name {
        "space7" => Some(space7()),
        "space13" => Some(space13()),
        "tiny" => Some(tiny()),
        _ => None,
    }
}

pub fn default_config() -> SolverConfig {
    crate::config_io::parse_config(DEFAULT_CFG).expect("shipped config parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config_io::format_config;

    #[test]
    fn shipped_files() {
        assert_eq!(default_config(), SolverConfig::default());
        assert_eq!(format_config(&SolverConfig::default()), DEFAULT_CFG);
        assert_eq!(space7().cardinalities(), vec![2, 2, 11, 4, 10, 4, 10]);
        assert_eq!(space13().dims(), 13);
        assert_eq!(tiny().cardinality_u64(), Some(1920));
        for s in [space7(), space13(), tiny()] {
            assert_eq!(s.specs().len() + s.frozen().len(), SolverConfig::KEYS.len());
        }
    }
}
