//! Command-line front end: configuration files and the `bellstab` commands.

pub mod app;
pub mod config;

pub use config::{parse_config, parse_config_str, to_config_string, ConfigError};
