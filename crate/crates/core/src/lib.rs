//! Phenotype-structured haptotactic invasion: a stochastic lattice model, a
//! deterministic continuum solver for the same system, and travelling-wave
//! diagnostics used to validate both.
//!
//! Both engines take a validated [`model::Model`] and produce
//! [`snapshot::Snapshot`]s with a common layout, so the analysis in
//! [`wave`] and the file formats in [`io`] work on either.

pub mod continuum;
pub mod error;
pub mod ibm;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod run;
pub mod snapshot;
pub mod wave;

pub use error::{ConfigError, Error, Result, SimError};
pub use model::Model;
pub use snapshot::{Snapshot, SpaceGrid};
