//! Input/output transition systems.
//!
//! An [`Iots`] is a finite, deterministic transition system whose labels are
//! split into inputs (controlled by the environment) and outputs (produced
//! autonomously). Quiescence is an ordinary output with the reserved name
//! `delta`; it only appears after an explicit [`delta_closure`].
//!
//! Every collection is ordered, so every algorithm built on top of this type
//! visits states and labels in lexicographic order and is reproducible.

mod ops;
mod validate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub use ops::{
    bridge_traces, chain, chain_with_renaming, completed_traces, default_depth_bound,
    delta_closure, intersection, is_acyclic, is_output_preserving_submachine, rebase,
    strip_quiescence, traces_up_to, truncate_at, OutputPreservation, ProductIots,
};
pub use validate::{validate, Property, ValidationReport, Witness};

pub(crate) use ops::{check_submachine, indexed_id};

/// Reserved token for the quiescence label.
pub const DELTA: &str = "delta";

/// Opaque state identifier. Ordered lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(String);

impl StateId {
    pub fn new(id: impl Into<String>) -> Self {
        StateId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId(s.to_owned())
    }
}

impl From<String> for StateId {
    fn from(s: String) -> Self {
        StateId(s)
    }
}

impl From<&StateId> for StateId {
    fn from(s: &StateId) -> Self {
        s.clone()
    }
}

/// A transition label. The derived order puts inputs before outputs and
/// quiescence last, then orders by name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Input(String),
    Output(String),
    Quiescence,
}

impl Action {
    pub fn input(name: impl Into<String>) -> Self {
        Action::Input(name.into())
    }

    pub fn output(name: impl Into<String>) -> Self {
        Action::Output(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Action::Input(n) | Action::Output(n) => n,
            Action::Quiescence => DELTA,
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Action::Input(_))
    }

    /// Outputs include quiescence.
    pub fn is_output(&self) -> bool {
        !self.is_input()
    }

    pub fn is_quiescence(&self) -> bool {
        matches!(self, Action::Quiescence)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sequence of actions.
pub type Trace = Vec<Action>;

/// Renders a trace as space-separated label tokens (`-` for the empty trace).
pub fn format_trace(trace: &[Action]) -> String {
    if trace.is_empty() {
        return "-".to_owned();
    }
    trace
        .iter()
        .map(Action::name)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub label: Action,
    pub target: StateId,
}

impl Transition {
    pub fn new(source: impl Into<StateId>, label: Action, target: impl Into<StateId>) -> Self {
        Transition {
            source: source.into(),
            label,
            target: target.into(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.source, self.label, self.target)
    }
}

/// Classification of a state by its enabled actions. Quiescence is ignored,
/// so the class of a state does not change under closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateClass {
    Sink,
    StableInput,
    QuasiStableInput,
    Output,
}

impl StateClass {
    pub fn is_input(self) -> bool {
        matches!(self, StateClass::StableInput | StateClass::QuasiStableInput)
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StateClass::Sink => "sink",
            StateClass::StableInput => "stable",
            StateClass::QuasiStableInput => "quasi-stable",
            StateClass::Output => "output",
        };
        f.write_str(s)
    }
}

/// Unvalidated constituents of an [`Iots`].
#[derive(Clone, Debug, Default)]
pub struct IotsParts {
    pub name: String,
    pub initial: StateId,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub quiescent: bool,
    /// Extra states beyond those mentioned by `initial` and the transitions.
    pub states: BTreeSet<StateId>,
    pub transitions: Vec<Transition>,
}

/// A deterministic input/output transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iots {
    name: String,
    states: BTreeSet<StateId>,
    initial: StateId,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
    quiescent: bool,
    edges: BTreeMap<StateId, BTreeMap<Action, StateId>>,
}

impl Iots {
    pub fn builder(name: impl Into<String>) -> IotsBuilder {
        IotsBuilder::new(name)
    }

    /// Builds a machine, rejecting overlapping or reserved alphabets,
    /// labels outside the alphabet and nondeterminism.
    pub fn from_parts(parts: IotsParts) -> Result<Self> {
        let IotsParts {
            name,
            initial,
            inputs,
            outputs,
            quiescent,
            states: extra,
            transitions,
        } = parts;
        if inputs.contains(DELTA) || outputs.contains(DELTA) {
            return Err(Error::ReservedSymbol);
        }
        if let Some(x) = inputs.intersection(&outputs).next() {
            return Err(Error::OverlappingAlphabets(x.clone()));
        }
        let mut states = extra;
        states.insert(initial.clone());
        let mut edges: BTreeMap<StateId, BTreeMap<Action, StateId>> = BTreeMap::new();
        for t in transitions {
            let in_alphabet = match &t.label {
                Action::Input(x) => inputs.contains(x),
                Action::Output(o) => outputs.contains(o),
                Action::Quiescence => quiescent,
            };
            if !in_alphabet {
                return Err(Error::LabelOutsideAlphabet {
                    source_state: t.source.clone(),
                    label: t.label.name().to_owned(),
                });
            }
            states.insert(t.source.clone());
            states.insert(t.target.clone());
            let row = edges.entry(t.source.clone()).or_default();
            match row.get(&t.label) {
                Some(existing) if *existing != t.target => {
                    return Err(Error::Nondeterministic {
                        state: t.source,
                        label: t.label,
                        first: existing.clone(),
                        second: t.target,
                    });
                }
                Some(_) => {}
                None => {
                    row.insert(t.label, t.target);
                }
            }
        }
        Ok(Iots {
            name,
            states,
            initial,
            inputs,
            outputs,
            quiescent,
            edges,
        })
    }

    pub fn to_parts(&self) -> IotsParts {
        IotsParts {
            name: self.name.clone(),
            initial: self.initial.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            quiescent: self.quiescent,
            states: self.states.clone(),
            transitions: self.transitions().collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    pub fn inputs(&self) -> &BTreeSet<String> {
        &self.inputs
    }

    /// Declared outputs, never containing `delta`.
    pub fn outputs(&self) -> &BTreeSet<String> {
        &self.outputs
    }

    /// Whether quiescence belongs to the output alphabet.
    pub fn is_quiescent(&self) -> bool {
        self.quiescent
    }

    pub fn contains(&self, s: &StateId) -> bool {
        self.states.contains(s)
    }

    pub fn input_actions(&self) -> Vec<Action> {
        self.inputs.iter().cloned().map(Action::Input).collect()
    }

    /// Output alphabet as actions, including quiescence when closed.
    pub fn output_actions(&self) -> Vec<Action> {
        let mut v: Vec<Action> = self.outputs.iter().cloned().map(Action::Output).collect();
        if self.quiescent {
            v.push(Action::Quiescence);
        }
        v
    }

    /// Whether `other` has the same inputs, outputs and closure status.
    pub fn same_alphabet(&self, other: &Iots) -> bool {
        self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.quiescent == other.quiescent
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.edges.iter().flat_map(|(s, row)| {
            row.iter()
                .map(move |(a, t)| Transition::new(s.clone(), a.clone(), t.clone()))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.edges.values().map(BTreeMap::len).sum()
    }

    /// Enabled actions of `s` with their targets, in label order.
    pub fn enabled(&self, s: &StateId) -> impl Iterator<Item = (&Action, &StateId)> + '_ {
        self.edges.get(s).into_iter().flat_map(|row| row.iter())
    }

    pub fn step(&self, s: &StateId, a: &Action) -> Option<&StateId> {
        self.edges.get(s).and_then(|row| row.get(a))
    }

    pub fn init(&self, s: &StateId) -> BTreeSet<Action> {
        self.enabled(s).map(|(a, _)| a.clone()).collect()
    }

    pub fn inp(&self, s: &StateId) -> BTreeSet<Action> {
        self.enabled(s)
            .filter(|(a, _)| a.is_input())
            .map(|(a, _)| a.clone())
            .collect()
    }

    /// Enabled outputs, including quiescence.
    pub fn out(&self, s: &StateId) -> BTreeSet<Action> {
        self.enabled(s)
            .filter(|(a, _)| a.is_output())
            .map(|(a, _)| a.clone())
            .collect()
    }

    fn has_input(&self, s: &StateId) -> bool {
        self.enabled(s).any(|(a, _)| a.is_input())
    }

    fn has_proper_output(&self, s: &StateId) -> bool {
        self.enabled(s)
            .any(|(a, _)| matches!(a, Action::Output(_)))
    }

    pub fn is_sink(&self, s: &StateId) -> bool {
        self.enabled(s).next().is_none()
    }

    pub fn is_input_state(&self, s: &StateId) -> bool {
        self.has_input(s)
    }

    /// Class of a known state; unknown ids are reported as sinks.
    pub fn class_of(&self, s: &StateId) -> StateClass {
        if self.is_sink(s) {
            StateClass::Sink
        } else if self.has_input(s) {
            if self.has_proper_output(s) {
                StateClass::QuasiStableInput
            } else {
                StateClass::StableInput
            }
        } else {
            StateClass::Output
        }
    }

    pub fn classify(&self, s: &StateId) -> Result<StateClass> {
        if !self.contains(s) {
            return Err(Error::UnknownState(s.clone()));
        }
        Ok(self.class_of(s))
    }

    pub fn is_stable(&self, s: &StateId) -> bool {
        self.class_of(s) == StateClass::StableInput
    }

    pub fn is_quasi_stable(&self, s: &StateId) -> bool {
        self.class_of(s) == StateClass::QuasiStableInput
    }

    pub fn input_states(&self) -> Vec<StateId> {
        self.states
            .iter()
            .filter(|s| self.is_input_state(s))
            .cloned()
            .collect()
    }

    pub fn sinks(&self) -> Vec<StateId> {
        self.states
            .iter()
            .filter(|s| self.is_sink(s))
            .cloned()
            .collect()
    }

    /// The unique state reached from `s` by `trace`, or `None` when the trace
    /// is not executable from `s`.
    pub fn after(&self, s: &StateId, trace: &[Action]) -> Option<StateId> {
        if !self.contains(s) {
            return None;
        }
        let mut cur = s;
        for a in trace {
            cur = self.step(cur, a)?;
        }
        Some(cur.clone())
    }

    pub fn is_trace(&self, s: &StateId, trace: &[Action]) -> bool {
        self.after(s, trace).is_some()
    }

    /// States reachable from `from`, with their shortlex-least access traces,
    /// in breadth-first order.
    pub fn reachable_with_access(&self, from: &StateId) -> Vec<(StateId, Trace)> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        if !self.contains(from) {
            return order;
        }
        seen.insert(from.clone());
        queue.push_back((from.clone(), Vec::new()));
        while let Some((s, access)) = queue.pop_front() {
            for (a, t) in self.enabled(&s) {
                if seen.insert(t.clone()) {
                    let mut next = access.clone();
                    next.push(a.clone());
                    queue.push_back((t.clone(), next));
                }
            }
            order.push((s, access));
        }
        order
    }

    pub fn reachable_from(&self, from: &StateId) -> BTreeSet<StateId> {
        self.reachable_with_access(from)
            .into_iter()
            .map(|(s, _)| s)
            .collect()
    }

    /// Renames states through `map`; ids missing from `map` are kept.
    pub fn rename_states(&self, map: &BTreeMap<StateId, StateId>) -> Result<Iots> {
        let r = |s: &StateId| map.get(s).cloned().unwrap_or_else(|| s.clone());
        let mut parts = self.to_parts();
        parts.initial = r(&self.initial);
        parts.states = self.states.iter().map(r).collect();
        parts.transitions = self
            .transitions()
            .map(|t| Transition::new(r(&t.source), t.label, r(&t.target)))
            .collect();
        let renamed = Iots::from_parts(parts)?;
        if renamed.states.len() != self.states.len() {
            return Err(Error::Precondition("state renaming is not injective".into()));
        }
        Ok(renamed)
    }

    /// Renames reachable states to `{prefix}{index}` in breadth-first order
    /// (zero-padded so lexicographic order matches discovery order) and drops
    /// unreachable states. Two initially-connected deterministic machines are
    /// isomorphic iff their canonical forms are equal.
    pub fn canonical(&self, prefix: &str) -> Iots {
        self.canonical_with_map(prefix).0
    }

    /// [`Iots::canonical`] together with the renaming it applied.
    pub fn canonical_with_map(&self, prefix: &str) -> (Iots, BTreeMap<StateId, StateId>) {
        let order = self.reachable_with_access(&self.initial);
        let width = order.len().saturating_sub(1).to_string().len();
        let map: BTreeMap<StateId, StateId> = order
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (s.clone(), StateId::new(format!("{prefix}{i:0width$}"))))
            .collect();
        let mut parts = self.to_parts();
        parts.initial = map[&self.initial].clone();
        parts.states = map.values().cloned().collect();
        parts.transitions = self
            .transitions()
            .filter(|t| map.contains_key(&t.source))
            .map(|t| Transition::new(map[&t.source].clone(), t.label, map[&t.target].clone()))
            .collect();
        let m = Iots::from_parts(parts).expect("canonical relabelling preserves validity");
        (m, map)
    }

    /// A state id not used by this machine, derived from `base`.
    pub fn fresh_state(&self, base: &str) -> StateId {
        fresh_id(base, |s| self.contains(s))
    }
}

pub(crate) fn fresh_id(base: &str, taken: impl Fn(&StateId) -> bool) -> StateId {
    let candidate = StateId::new(base);
    if !taken(&candidate) {
        return candidate;
    }
    (1..)
        .map(|i| StateId::new(format!("{base}_{i}")))
        .find(|c| !taken(c))
        .expect("unbounded search")
}

/// Convenience builder resolving label tokens against the declared alphabet.
#[derive(Clone, Debug)]
pub struct IotsBuilder {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    quiescent: bool,
    initial: Option<StateId>,
    states: Vec<StateId>,
    transitions: Vec<(StateId, String, StateId)>,
}

impl IotsBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        IotsBuilder {
            name: name.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            quiescent: false,
            initial: None,
            states: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn inputs<I, S>(mut self, inputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.inputs.extend(inputs.into_iter().map(Into::into));
        self
    }

    pub fn outputs<I, S>(mut self, outputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.outputs.extend(outputs.into_iter().map(Into::into));
        self
    }

    pub fn quiescent(mut self, on: bool) -> Self {
        self.quiescent = on;
        self
    }

    pub fn initial(mut self, s: impl Into<StateId>) -> Self {
        self.initial = Some(s.into());
        self
    }

    pub fn state(mut self, s: impl Into<StateId>) -> Self {
        self.states.push(s.into());
        self
    }

    /// Adds a transition; `label` is resolved against the alphabet at build
    /// time (`delta` denotes quiescence and implies closure).
    pub fn trans(
        mut self,
        source: impl Into<StateId>,
        label: impl Into<String>,
        target: impl Into<StateId>,
    ) -> Self {
        self.transitions
            .push((source.into(), label.into(), target.into()));
        self
    }

    pub fn build(self) -> Result<Iots> {
        let inputs: BTreeSet<String> = self.inputs.into_iter().collect();
        let outputs: BTreeSet<String> = self.outputs.into_iter().collect();
        let mut quiescent = self.quiescent;
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for (s, l, t) in self.transitions {
            let label = if l == DELTA {
                quiescent = true;
                Action::Quiescence
            } else if inputs.contains(&l) {
                Action::Input(l)
            } else if outputs.contains(&l) {
                Action::Output(l)
            } else {
                return Err(Error::LabelOutsideAlphabet {
                    source_state: s,
                    label: l,
                });
            };
            transitions.push(Transition::new(s, label, t));
        }
        let initial = self
            .initial
            .ok_or_else(|| Error::Precondition("initial state not set".into()))?;
        Iots::from_parts(IotsParts {
            name: self.name,
            initial,
            inputs,
            outputs,
            quiescent,
            states: self.states.into_iter().collect(),
            transitions,
        })
    }
}
