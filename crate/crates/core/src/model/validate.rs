use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Action, Iots, StateId, Transition};

/// Structural properties that membership in the specification class requires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Deterministic,
    InputComplete,
    Progressive,
    InitiallyConnected,
    DeltaClosed,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Deterministic,
        Property::InputComplete,
        Property::Progressive,
        Property::InitiallyConnected,
        Property::DeltaClosed,
    ];

    /// The four properties of the specification class (closure excluded).
    pub const MEMBERSHIP: [Property; 4] = [
        Property::Deterministic,
        Property::InputComplete,
        Property::Progressive,
        Property::InitiallyConnected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Deterministic => "deterministic",
            Property::InputComplete => "input-complete",
            Property::Progressive => "progressive",
            Property::InitiallyConnected => "initially-connected",
            Property::DeltaClosed => "delta-closed",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evidence that a property fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A state violating a local condition (missing input, sink, missing δ loop).
    State(StateId),
    /// A cycle whose transitions are all output-labelled.
    Cycle(Vec<Transition>),
    /// A state not reachable from the initial state.
    Unreachable(StateId),
    /// A misplaced transition (δ that is not a self-loop at a stable state).
    Transition(Transition),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::State(s) => write!(f, "state {s}"),
            Witness::Unreachable(s) => write!(f, "unreachable state {s}"),
            Witness::Transition(t) => write!(f, "transition {t}"),
            Witness::Cycle(c) => {
                let parts: Vec<String> = c.iter().map(ToString::to_string).collect();
                write!(f, "output cycle [{}]", parts.join(" "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    required: BTreeSet<Property>,
    results: BTreeMap<Property, Option<Witness>>,
}

impl ValidationReport {
    pub fn holds(&self, p: Property) -> bool {
        matches!(self.results.get(&p), Some(None))
    }

    pub fn witness(&self, p: Property) -> Option<&Witness> {
        self.results.get(&p).and_then(Option::as_ref)
    }

    pub fn required(&self) -> &BTreeSet<Property> {
        &self.required
    }

    /// Failed required properties with their witnesses.
    pub fn failures(&self) -> Vec<(Property, &Witness)> {
        self.required
            .iter()
            .filter_map(|p| self.witness(*p).map(|w| (*p, w)))
            .collect()
    }

    pub fn ok(&self) -> bool {
        self.required.iter().all(|p| self.holds(*p))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, w) in &self.results {
            let req = if self.required.contains(p) { "" } else { " (not required)" };
            match w {
                None => writeln!(f, "{p}: yes{req}")?,
                Some(w) => writeln!(f, "{p}: no, {w}{req}")?,
            }
        }
        Ok(())
    }
}

/// Checks every property and flags those in `require`.
///
/// Determinism always holds for a constructed [`Iots`]; it is still reported
/// so the report covers the whole class definition. Progressiveness means no
/// sink states and no cycle made only of output transitions (δ self-loops are
/// not divergence and are ignored).
pub fn validate(m: &Iots, require: &[Property]) -> ValidationReport {
    let mut results = BTreeMap::new();
    results.insert(Property::Deterministic, None);
    results.insert(Property::InputComplete, input_complete(m));
    results.insert(Property::Progressive, progressive(m));
    results.insert(Property::InitiallyConnected, initially_connected(m));
    results.insert(Property::DeltaClosed, delta_closed(m));
    ValidationReport {
        required: require.iter().copied().collect(),
        results,
    }
}

fn input_complete(m: &Iots) -> Option<Witness> {
    let all = m.inputs().len();
    m.states()
        .iter()
        .find(|s| {
            let n = m.inp(s).len();
            n > 0 && n < all
        })
        .map(|s| Witness::State(s.clone()))
}

fn initially_connected(m: &Iots) -> Option<Witness> {
    let reach = m.reachable_from(m.initial());
    m.states()
        .iter()
        .find(|s| !reach.contains(*s))
        .map(|s| Witness::Unreachable(s.clone()))
}

fn delta_closed(m: &Iots) -> Option<Witness> {
    if !m.is_quiescent() {
        return Some(Witness::State(m.initial().clone()));
    }
    for t in m.transitions() {
        if t.label == Action::Quiescence && (t.source != t.target || !m.is_stable(&t.source)) {
            return Some(Witness::Transition(t));
        }
    }
    m.states()
        .iter()
        .find(|s| m.is_stable(s) && m.step(s, &Action::Quiescence) != Some(*s))
        .map(|s| Witness::State(s.clone()))
}

fn progressive(m: &Iots) -> Option<Witness> {
    if let Some(s) = m.states().iter().find(|s| m.is_sink(s)) {
        return Some(Witness::State(s.clone()));
    }
    output_cycle(m).map(Witness::Cycle)
}

/// First cycle of proper-output transitions found by depth-first search in
/// state order.
pub(crate) fn output_cycle(m: &Iots) -> Option<Vec<Transition>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        OnStack,
        Done,
    }
    let mut mark: BTreeMap<&StateId, Mark> = m.states().iter().map(|s| (s, Mark::Fresh)).collect();
    for root in m.states() {
        if mark[root] != Mark::Fresh {
            continue;
        }
        // explicit stack of (state, remaining output edges); path mirrors it
        let mut stack: Vec<(&StateId, Vec<(&Action, &StateId)>)> = Vec::new();
        let mut path: Vec<Transition> = Vec::new();
        let succ = |s: &StateId| -> Vec<(&Action, &StateId)> {
            let mut v: Vec<_> = m
                .enabled(s)
                .filter(|(a, _)| matches!(a, Action::Output(_)))
                .collect();
            v.reverse();
            v
        };
        mark.insert(root, Mark::OnStack);
        stack.push((root, succ(root)));
        while let Some(top) = stack.last_mut() {
            let s: &StateId = top.0;
            match top.1.pop() {
                Some((a, t)) => match mark[t] {
                    Mark::Fresh => {
                        path.push(Transition::new(s.clone(), a.clone(), t.clone()));
                        mark.insert(t, Mark::OnStack);
                        let next = succ(t);
                        stack.push((t, next));
                    }
                    Mark::OnStack => {
                        path.push(Transition::new(s.clone(), a.clone(), t.clone()));
                        let start = path
                            .iter()
                            .position(|e| &e.source == t)
                            .expect("target is on the current path");
                        return Some(path.split_off(start));
                    }
                    Mark::Done => {}
                },
                None => {
                    mark.insert(s, Mark::Done);
                    stack.pop();
                    path.pop();
                }
            }
        }
    }
    None
}
