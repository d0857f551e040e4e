use std::collections::BTreeSet;

use super::game::{prune, solve};
use super::require_spec;
use crate::error::{Error, Result};
use crate::model::{check_submachine, is_acyclic, Iots, StateId};

/// A single-input acyclic submachine steering every conforming
/// implementation from the initial state into a reduction of `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preamble {
    pub machine: Iots,
    pub target: StateId,
}

/// Builds the preamble of input state `s`, or reports that `s` is not
/// certainly reachable.
///
/// At a quasi-stable state the preamble may send an input instead of
/// observing; the implementation is assumed to consume it before any output.
pub fn build_preamble(spec: &Iots, s: &StateId) -> Result<Preamble> {
    require_spec(spec)?;
    if !spec.contains(s) {
        return Err(Error::UnknownState(s.clone()));
    }
    if !spec.is_input_state(s) {
        return Err(Error::NotInputState(s.clone()));
    }
    let strategy = solve(spec, &BTreeSet::from([s.clone()]));
    if !strategy.wins(spec.initial()) {
        return Err(Error::NotCReachable(s.clone()));
    }
    Ok(Preamble {
        machine: prune(spec, &strategy, &format!("C_{s}")),
        target: s.clone(),
    })
}

/// Input state cover: one preamble per input state. Every state that is not
/// certainly reachable is named in the error.
pub fn state_cover(spec: &Iots) -> Result<Vec<Preamble>> {
    require_spec(spec)?;
    let mut cover = Vec::new();
    let mut missing = Vec::new();
    for s in spec.input_states() {
        match build_preamble(spec, &s) {
            Ok(p) => cover.push(p),
            Err(Error::NotCReachable(s)) => missing.push(s),
            Err(e) => return Err(e),
        }
    }
    match missing.len() {
        0 => Ok(cover),
        1 => Err(Error::NotCReachable(missing.remove(0))),
        _ => Err(Error::NotCReachableMany(missing)),
    }
}

/// Checks a preamble against its defining properties, independently of how
/// it was built. Returns one message per violation.
///
/// A state sending an input is exempt from output preservation; it must
/// enable nothing else.
pub fn preamble_violations(spec: &Iots, p: &Preamble) -> Vec<String> {
    let m = &p.machine;
    let mut v = Vec::new();
    if let Err(e) = check_submachine(m, spec) {
        v.push(e.to_string());
    }
    if m.initial() != spec.initial() {
        v.push(format!("initial state {} differs from {}", m.initial(), spec.initial()));
    }
    if !is_acyclic(m) {
        v.push("not acyclic".into());
    }
    let sinks = m.sinks();
    if sinks != [p.target.clone()] {
        let names: Vec<&str> = sinks.iter().map(StateId::as_str).collect();
        v.push(format!("sinks [{}], expected only {}", names.join(" "), p.target));
    }
    for s in m.states() {
        let inp = m.inp(s);
        if inp.len() > 1 {
            v.push(format!("state {s} sends more than one input"));
        } else if inp.len() == 1 {
            if !m.out(s).is_empty() {
                v.push(format!("state {s} sends an input and observes outputs"));
            }
        } else if !m.is_sink(s) && m.out(s) != spec.out(s) {
            v.push(format!("state {s} drops outputs of the specification"));
        }
    }
    v
}
