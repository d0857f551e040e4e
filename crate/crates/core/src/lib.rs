//! Complete test-suite generation for deterministic input/output transition
//! systems with respect to the ioco conformance relation.
//!
//! The pipeline: build or parse a specification ([`model`], [`format`]),
//! close it under quiescence, derive preambles, covers and harmonized state
//! identifiers ([`testgen`]), then run the suite against implementations or
//! check it exhaustively over a bounded fault domain ([`execution`]).
//! Decision procedures for ioco, reduction and distinguishability live in
//! [`relations`].

pub mod error;
pub mod execution;
pub mod format;
pub mod model;
pub mod relations;
pub mod samples;
pub mod testgen;

pub use error::{Diagnostic, Error, Result};
pub use model::{Action, Iots, StateClass, StateId, Trace, Transition};
