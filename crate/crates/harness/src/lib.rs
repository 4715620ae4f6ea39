//! Executable surface for `rekanren-core`: example templates, scenario
//! files, the law checker, benchmarks and JSON formats.

pub mod bench;
pub mod export;
pub mod json;
pub mod laws;
pub mod registry;
pub mod scenario;
pub mod selector;
pub mod wire;
