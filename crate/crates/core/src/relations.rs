//! Decision procedures over pairs of machines or pairs of states: ioco,
//! state reduction, compatibility, input-state minimality and the
//! input-state homeomorphism diagnostic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    bridge_traces, format_trace, intersection, rebase, validate, Action, Iots, Property, StateId,
    Trace,
};

/// Largest input-state count accepted by the homeomorphism search.
pub const HOMEOMORPHISM_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterExample {
    /// A trace of the specification that the implementation can perform.
    pub trace: Trace,
    /// An output the implementation enables after `trace` and the
    /// specification does not.
    pub output: Action,
}

impl fmt::Display for CounterExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "after [{}] output {}", format_trace(&self.trace), self.output)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub conforms: bool,
    pub counterexample: Option<CounterExample>,
}

fn require_closed(m: &Iots) -> Result<()> {
    if m.is_quiescent() {
        Ok(())
    } else {
        Err(Error::NotClosed)
    }
}

fn require_state(m: &Iots, s: &StateId) -> Result<()> {
    if m.contains(s) {
        Ok(())
    } else {
        Err(Error::UnknownState(s.clone()))
    }
}

/// Decides `implementation ioco specification`.
///
/// Breadth-first traversal of the pairs reachable by common traces; the
/// reported counterexample is the shortlex-least violating trace, with the
/// least offending output.
pub fn ioco_check(implementation: &Iots, specification: &Iots) -> Result<Verdict> {
    require_closed(implementation)?;
    require_closed(specification)?;
    if !implementation.same_alphabet(specification) {
        return Err(Error::AlphabetMismatch);
    }
    let report = validate(specification, &[Property::InputComplete]);
    if !report.ok() {
        return Err(Error::InvalidMachine(
            "specification is not input-complete".into(),
        ));
    }
    let root = (implementation.initial().clone(), specification.initial().clone());
    let mut seen = BTreeSet::from([root.clone()]);
    let mut queue = VecDeque::from([(root, Vec::new())]);
    while let Some(((p, s), access)) = queue.pop_front() {
        for o in implementation.out(&p) {
            if specification.step(&s, &o).is_none() {
                return Ok(Verdict {
                    conforms: false,
                    counterexample: Some(CounterExample {
                        trace: access,
                        output: o,
                    }),
                });
            }
        }
        for (a, s2) in specification.enabled(&s) {
            let Some(p2) = implementation.step(&p, a) else { continue };
            let pair = (p2.clone(), s2.clone());
            if seen.insert(pair.clone()) {
                let mut next = access.clone();
                next.push(a.clone());
                queue.push_back((pair, next));
            }
        }
    }
    Ok(Verdict {
        conforms: true,
        counterexample: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionResult {
    pub holds: bool,
    /// First pair `(s, s')` of the intersection with `out((s,s')) ≠ out(s)`.
    pub witness: Option<(StateId, StateId)>,
}

/// Whether state `s1` is a reduction of `s2`: every state `(s, s')` of
/// `spec/s1 ∩ spec/s2` enables exactly the outputs of `s`.
pub fn is_reduction(spec: &Iots, s1: &StateId, s2: &StateId) -> Result<ReductionResult> {
    require_closed(spec)?;
    require_state(spec, s1)?;
    require_state(spec, s2)?;
    let p = intersection(&rebase(spec, s1)?, &rebase(spec, s2)?)?;
    for (q, (l, r)) in &p.origin {
        if p.product.out(q) != spec.out(l) {
            return Ok(ReductionResult {
                holds: false,
                witness: Some((l.clone(), r.clone())),
            });
        }
    }
    Ok(ReductionResult {
        holds: true,
        witness: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkWitness {
    pub pair: (StateId, StateId),
    pub access: Trace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityResult {
    pub compatible: bool,
    pub sink_witness: Option<SinkWitness>,
}

/// Two states are compatible iff the intersection of the machine rebased at
/// each has no reachable sink. The witness is the first sink in
/// breadth-first order with its shortlex-least access trace.
pub fn compatible(spec: &Iots, s1: &StateId, s2: &StateId) -> Result<CompatibilityResult> {
    require_closed(spec)?;
    require_state(spec, s1)?;
    require_state(spec, s2)?;
    let p = intersection(&rebase(spec, s1)?, &rebase(spec, s2)?)?;
    let sink = p
        .product
        .reachable_with_access(p.product.initial())
        .into_iter()
        .find(|(q, _)| p.product.is_sink(q));
    Ok(match sink {
        None => CompatibilityResult {
            compatible: true,
            sink_witness: None,
        },
        Some((q, access)) => CompatibilityResult {
            compatible: false,
            sink_witness: Some(SinkWitness {
                pair: p.origin[&q].clone(),
                access,
            }),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityResult {
    pub minimal: bool,
    /// First (lexicographic) pair of compatible input states.
    pub compatible_pair: Option<(StateId, StateId)>,
}

/// Whether every two distinct input states are distinguishable.
pub fn is_input_state_minimal(spec: &Iots) -> Result<MinimalityResult> {
    require_closed(spec)?;
    let ins = spec.input_states();
    for (i, s1) in ins.iter().enumerate() {
        for s2 in &ins[i + 1..] {
            if compatible(spec, s1, s2)?.compatible {
                return Ok(MinimalityResult {
                    minimal: false,
                    compatible_pair: Some((s1.clone(), s2.clone())),
                });
            }
        }
    }
    Ok(MinimalityResult {
        minimal: true,
        compatible_pair: None,
    })
}

/// Searches for a bijection φ from the input states of `implementation` to
/// those of `specification` such that `φ(p)-after-γ = φ(p-after-γ)` for
/// every bridge trace γ of every input state `p`. The initial states anchor
/// the map: when the implementation's initial state is an input state it
/// must map to the specification's initial state.
///
/// Exhaustive over bijections; at most [`HOMEOMORPHISM_LIMIT`] input states.
pub fn check_input_state_homeomorphic(
    implementation: &Iots,
    specification: &Iots,
) -> Result<Option<BTreeMap<StateId, StateId>>> {
    require_closed(implementation)?;
    require_closed(specification)?;
    if !implementation.same_alphabet(specification) {
        return Err(Error::AlphabetMismatch);
    }
    let p_in = implementation.input_states();
    let s_in = specification.input_states();
    if p_in.len() > HOMEOMORPHISM_LIMIT {
        return Err(Error::TooManyInputStates {
            limit: HOMEOMORPHISM_LIMIT,
            actual: p_in.len(),
        });
    }
    if p_in.len() != s_in.len() {
        return Ok(None);
    }
    let mut bridges: Vec<Vec<(Trace, usize)>> = Vec::with_capacity(p_in.len());
    for p in &p_in {
        let mut v = Vec::new();
        for gamma in bridge_traces(implementation, p)? {
            let target = implementation
                .after(p, &gamma)
                .expect("bridge trace is executable");
            let idx = p_in.binary_search(&target).expect("bridge ends in an input state");
            v.push((gamma, idx));
        }
        bridges.push(v);
    }
    let anchor = p_in
        .binary_search(implementation.initial())
        .ok()
        .map(|i| (i, s_in.binary_search(specification.initial())));

    let mut perm: Vec<usize> = (0..s_in.len()).collect();
    loop {
        let anchored = match anchor {
            None => true,
            Some((i, Ok(j))) => perm[i] == j,
            Some((_, Err(_))) => false,
        };
        let consistent = anchored
            && bridges.iter().enumerate().all(|(i, v)| {
                v.iter().all(|(gamma, target)| {
                    specification.after(&s_in[perm[i]], gamma).as_ref() == Some(&s_in[perm[*target]])
                })
            });
        if consistent {
            return Ok(Some(
                p_in.iter()
                    .cloned()
                    .zip(perm.iter().map(|&j| s_in[j].clone()))
                    .collect(),
            ));
        }
        if !next_permutation(&mut perm) {
            return Ok(None);
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
