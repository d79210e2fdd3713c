//! Feature selection by maximizing a variational lower bound on the mutual
//! information between a feature subset and a class label.
//!
//! The crate also ships plug-in information estimators, classical MI-based
//! selection baselines and a cross-validated 3-NN benchmark harness.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimators;
pub mod numeric;
pub mod selection;
pub mod verify;
pub mod vmi;

pub use data::{Column, ColumnKind, Dataset};
pub use error::{Error, Result};
pub use selection::{ConfigEcho, SelectionResult, StepRecord};
pub use vmi::{select, QDistKind, SelectionState, VmiConfig};
