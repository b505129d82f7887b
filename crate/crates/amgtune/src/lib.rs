//! File formats, command-line interface and experiments around
//! [`amgtune_core`].

pub mod bench;
pub mod builtin;
pub mod cli;
pub mod clock;
pub mod config_io;
pub mod dataset_io;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod model_io;
pub mod mtx;
pub mod oracle;
pub mod problem;
pub mod space_io;
