//! Test-suite construction: preambles (state cover), (s, x)-covers
//! (transition cover), separators and harmonized state identifiers, chained
//! and completed with a fail state.
//!
//! Preambles and separators come out of the same reachability game (see
//! `game`): the tester controls inputs, the implementation controls outputs,
//! and the kept strategy always moves to a position of strictly smaller
//! rank, so the result is acyclic.

mod cover;
mod game;
mod identifiers;
mod preamble;
mod separator;
mod suite;

pub use cover::{sx_cover, transition_cover, transition_cover_from, CoverElement, SxCover};
pub use identifiers::{harmonized_identifiers, Identifiers};
pub use preamble::{build_preamble, preamble_violations, state_cover, Preamble};
pub use separator::{
    build_separator, distinguishers, remove_sink, separator_violations, Distinguisher, Separator,
};
pub use suite::{
    check_generation_preconditions, complete_test_case, generate_suite, suite_parts, Provenance,
    SuiteCase, SuiteParts, TestCase, TestSuite, FAIL,
};

use crate::error::{Error, Result};
use crate::model::{validate, Iots, Property};

/// The specification must be closed under quiescence and a member of the
/// specification class.
pub(crate) fn require_spec(spec: &Iots) -> Result<()> {
    if !spec.is_quiescent() {
        return Err(Error::NotClosed);
    }
    let report = validate(spec, &Property::MEMBERSHIP);
    if let Some((p, w)) = report.failures().first() {
        return Err(Error::InvalidMachine(format!("{p}: {w}")));
    }
    Ok(())
}
