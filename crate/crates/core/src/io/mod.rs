//! Configuration parsing, mode drivers and eigensystem persistence.

pub mod config;
pub mod persist;
pub mod run;

pub use config::{parse_config, ConfigError, InitialState, Mode, RunConfig, StateSource};
pub use persist::{decode_eigensystem, encode_eigensystem, load_eigensystem, save_eigensystem, PersistError};
pub use run::{run, RunError};
