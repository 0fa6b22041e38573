use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Constraint, ValidationReport};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{name} = {value:e} must be positive and finite")]
    NonPositive { name: &'static str, value: f64 },
    #[error("violates {constraint}: {detail}")]
    Constraint { constraint: Constraint, detail: String },
    #[error("invalid configuration:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownLaw { kind: &'static str, name: String, known: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("failed to parse configuration: {0}")]
    Parse(String),
    #[error("invalid run specification: {0}")]
    RunSpec(String),
}

/// Failures while stepping either engine.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial lattice is empty: every cell count rounds down to zero")]
    EmptyLattice,
    #[error("ECM update would turn negative at site {site}: tau * kappa_E * M = {factor:e} > 1")]
    EcmPositivity { site: usize, factor: f64 },
    #[error("MDE update unstable: {0}")]
    MdeStability(String),
    #[error("degenerate time step {0:e}")]
    DegenerateStep(f64),
    #[error("scheme failure at t = {t:e}: {field}[{index}] = {value:e} is negative")]
    Negativity { t: f64, field: &'static str, index: usize, value: f64 },
    #[error("{0}")]
    Analysis(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed snapshot file {path}: {detail}")]
    Snapshot { path: PathBuf, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
