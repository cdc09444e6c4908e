//! Experiment driver library behind the `dirac-mti` binary: declarative
//! JSON run configs, reference-snapshot management, restartable parameter
//! sweeps, and the limiting-model study.

pub mod config;
pub mod expr;
pub mod limit;
pub mod refcache;
pub mod report;
pub mod sweep;
