use std::collections::{BTreeMap, VecDeque};

use super::preamble::{state_cover, Preamble};
use super::require_spec;
use crate::error::{Error, Result};
use crate::model::{chain_with_renaming, indexed_id, Action, Iots, IotsParts, StateId, Transition};

/// Unfolding of input `x` at input state `source` followed by every
/// output-only continuation, each branch closed by δ at a stable state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SxCover {
    pub tree: Iots,
    pub source: StateId,
    pub input: Action,
    /// Tree nodes where an input state of the specification is reached,
    /// paired with that state. A quasi-stable state met mid-run is one as
    /// well as the stable state closing each branch (the node before δ).
    pub identification_points: Vec<(StateId, StateId)>,
    /// Specification state of every tree node.
    pub labels: BTreeMap<StateId, StateId>,
}

pub fn sx_cover(spec: &Iots, s: &StateId, x: &str) -> Result<SxCover> {
    if !spec.is_quiescent() {
        return Err(Error::NotClosed);
    }
    if !spec.contains(s) {
        return Err(Error::UnknownState(s.clone()));
    }
    let input = Action::input(x);
    let Some(first) = spec.step(s, &input) else {
        return Err(Error::InputNotEnabled {
            state: s.clone(),
            input: x.to_owned(),
        });
    };

    // nodes are numbered in creation order; ids assigned once the count is known
    let mut labels: Vec<StateId> = vec![s.clone(), first.clone()];
    let mut edges: Vec<(usize, Action, usize)> = vec![(0, input.clone(), 1)];
    let mut points: Vec<(usize, StateId)> = Vec::new();
    let mut queue = VecDeque::from([1usize]);
    while let Some(n) = queue.pop_front() {
        let u = labels[n].clone();
        if spec.is_input_state(&u) {
            points.push((n, u.clone()));
        }
        for o in spec.out(&u) {
            let t = spec.step(&u, &o).expect("enabled output").clone();
            let child = labels.len();
            labels.push(t);
            edges.push((n, o.clone(), child));
            if !o.is_quiescence() {
                queue.push_back(child);
            }
        }
    }
    let total = labels.len();
    let id = |i: usize| indexed_id("c", i, total);
    let parts = IotsParts {
        name: format!("Cov_{s}_{x}"),
        initial: id(0),
        inputs: spec.inputs().clone(),
        outputs: spec.outputs().clone(),
        quiescent: true,
        states: (0..total).map(id).collect(),
        transitions: edges
            .into_iter()
            .map(|(a, l, b)| Transition::new(id(a), l, id(b)))
            .collect(),
    };
    Ok(SxCover {
        tree: Iots::from_parts(parts)?,
        source: s.clone(),
        input,
        identification_points: points.into_iter().map(|(n, u)| (id(n), u)).collect(),
        labels: labels.into_iter().enumerate().map(|(i, u)| (id(i), u)).collect(),
    })
}

/// One element of the transition cover: a preamble chained with an
/// (s, x)-cover, with the identification points carried over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverElement {
    pub machine: Iots,
    pub source: StateId,
    pub input: Action,
    pub identification_points: Vec<(StateId, StateId)>,
}

/// Transition cover of `spec`; builds the state cover first.
pub fn transition_cover(spec: &Iots) -> Result<Vec<CoverElement>> {
    let z = state_cover(spec)?;
    transition_cover_from(spec, &z)
}

/// Transition cover over an already computed state cover.
pub fn transition_cover_from(spec: &Iots, z: &[Preamble]) -> Result<Vec<CoverElement>> {
    require_spec(spec)?;
    let mut v = Vec::new();
    for p in z {
        for x in spec.inputs() {
            let cov = sx_cover(spec, &p.target, x)?;
            let (machine, map) = chain_with_renaming(&p.machine, &p.target, &cov.tree)?;
            let machine = machine.with_name(format!("V_{}_{x}", p.target));
            v.push(CoverElement {
                machine,
                source: p.target.clone(),
                input: cov.input,
                identification_points: cov
                    .identification_points
                    .into_iter()
                    .map(|(n, u)| (map[&n].clone(), u))
                    .collect(),
            });
        }
    }
    Ok(v)
}
