use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::game::{prune, solve};
use super::require_spec;
use crate::error::{Error, Result};
use crate::model::{
    format_trace, intersection, is_acyclic, rebase, Action, Iots, IotsParts, StateId, Transition,
};
use crate::relations::compatible;

/// Acyclic single-input machine whose two sinks tell the states of `pair`
/// apart: `sinks.0` is reached only by traces of `pair.0` that `pair.1`
/// cannot perform, and symmetrically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separator {
    pub machine: Iots,
    pub sinks: (StateId, StateId),
    pub pair: (StateId, StateId),
    /// Specification state pair of every non-sink node.
    pub origin: BTreeMap<StateId, (StateId, StateId)>,
}

/// Builds a separator on the intersection of the machine rebased at `s1`
/// and at `s2`, extended with the two sinks on every disagreeing output.
/// Among the winning moves at a node, observation is preferred over
/// sending an input, and inputs are tried by name.
pub fn build_separator(spec: &Iots, s1: &StateId, s2: &StateId) -> Result<Separator> {
    require_spec(spec)?;
    for s in [s1, s2] {
        if !spec.contains(s) {
            return Err(Error::UnknownState(s.clone()));
        }
        if !spec.is_input_state(s) {
            return Err(Error::NotInputState(s.clone()));
        }
    }
    if compatible(spec, s1, s2)?.compatible {
        return Err(Error::Compatible(s1.clone(), s2.clone()));
    }
    let prod = intersection(&rebase(spec, s1)?, &rebase(spec, s2)?)?;
    let bot1 = prod.product.fresh_state("bot1");
    let bot2 = prod.product.fresh_state("bot2");
    let mut parts = prod.product.to_parts();
    for (q, (l, r)) in &prod.origin {
        let (ol, or) = (spec.out(l), spec.out(r));
        for o in ol.difference(&or) {
            parts.transitions.push(Transition::new(q.clone(), o.clone(), bot1.clone()));
        }
        for o in or.difference(&ol) {
            parts.transitions.push(Transition::new(q.clone(), o.clone(), bot2.clone()));
        }
    }
    parts.states.insert(bot1.clone());
    parts.states.insert(bot2.clone());
    let extended = Iots::from_parts(parts)?;
    let strategy = solve(&extended, &BTreeSet::from([bot1.clone(), bot2.clone()]));
    if !strategy.wins(extended.initial()) {
        return Err(Error::NoSeparator(s1.clone(), s2.clone()));
    }
    let machine = prune(&extended, &strategy, &format!("R_{s1}_{s2}"));
    let origin = prod
        .origin
        .into_iter()
        .filter(|(q, _)| machine.contains(q))
        .collect();
    Ok(Separator {
        machine,
        sinks: (bot1, bot2),
        pair: (s1.clone(), s2.clone()),
        origin,
    })
}

/// Checks both separator conditions by replaying every separator trace on
/// the specification, plus the structural shape. One message per violation.
///
/// The output condition is checked at observing nodes; a node sending an
/// input enables nothing else.
pub fn separator_violations(spec: &Iots, sep: &Separator) -> Vec<String> {
    let m = &sep.machine;
    let (b1, b2) = &sep.sinks;
    let (s1, s2) = &sep.pair;
    let mut v = Vec::new();
    if !is_acyclic(m) {
        v.push("not acyclic".into());
        return v;
    }
    let sinks: BTreeSet<StateId> = m.sinks().into_iter().collect();
    if sinks != BTreeSet::from([b1.clone(), b2.clone()]) {
        v.push(format!("sinks are not exactly {b1} and {b2}"));
    }
    for s in m.states() {
        let inp = m.inp(s);
        if inp.len() > 1 || (inp.len() == 1 && !m.out(s).is_empty()) {
            v.push(format!("node {s} is not single-input"));
        }
    }
    let mut stack: Vec<(StateId, Vec<Action>)> = vec![(m.initial().clone(), Vec::new())];
    while let Some((n, alpha)) = stack.pop() {
        let in1 = spec.after(s1, &alpha);
        let in2 = spec.after(s2, &alpha);
        if &n == b1 && !(in1.is_some() && in2.is_none()) {
            v.push(format!("trace [{}] reaches {b1} but is not only a trace of {s1}", format_trace(&alpha)));
        }
        if &n == b2 && !(in2.is_some() && in1.is_none()) {
            v.push(format!("trace [{}] reaches {b2} but is not only a trace of {s2}", format_trace(&alpha)));
        }
        if m.inp(&n).is_empty() && !m.is_sink(&n) {
            let mut expected = BTreeSet::new();
            for s in [&in1, &in2].into_iter().flatten() {
                expected.extend(spec.out(s));
            }
            if m.out(&n) != expected {
                v.push(format!(
                    "node {n} after [{}] does not observe every output of both states",
                    format_trace(&alpha)
                ));
            }
        }
        for (a, t) in m.enabled(&n) {
            let mut next = alpha.clone();
            next.push(a.clone());
            stack.push((t.clone(), next));
        }
    }
    v
}

/// A separator with one sink removed: reaching `sink` shows the
/// implementation was not in a state behaving like `distinguished_from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinguisher {
    pub machine: Iots,
    pub sink: StateId,
    /// The state this distinguisher identifies.
    pub state: StateId,
    /// `None` for the quiescence distinguisher.
    pub distinguished_from: Option<StateId>,
}

impl Distinguisher {
    /// Validates shape: acyclic, single-input, `sink` its only sink.
    pub fn new(
        machine: Iots,
        sink: StateId,
        state: StateId,
        distinguished_from: Option<StateId>,
    ) -> Result<Self> {
        if !machine.contains(&sink) {
            return Err(Error::InvalidDistinguisher(format!("sink {sink} is not a state")));
        }
        if machine.sinks() != [sink.clone()] {
            return Err(Error::InvalidDistinguisher(format!(
                "{} sinks, expected exactly {sink}",
                machine.sinks().len()
            )));
        }
        if !is_acyclic(&machine) {
            return Err(Error::InvalidDistinguisher("not acyclic".into()));
        }
        if let Some(s) = machine.states().iter().find(|s| {
            let n = machine.inp(s).len();
            n > 1 || (n == 1 && !machine.out(s).is_empty())
        }) {
            return Err(Error::InvalidDistinguisher(format!("node {s} is not single-input")));
        }
        Ok(Distinguisher {
            machine,
            sink,
            state,
            distinguished_from,
        })
    }

    /// `W^δ(s)`: a single δ transition into the sink.
    pub fn quiescence(spec: &Iots, s: &StateId) -> Result<Self> {
        if !spec.is_quiescent() {
            return Err(Error::NotClosed);
        }
        if !spec.contains(s) {
            return Err(Error::UnknownState(s.clone()));
        }
        if !spec.is_stable(s) {
            return Err(Error::Precondition(format!("state {s} is not stable")));
        }
        let parts = IotsParts {
            name: format!("Wd_{s}"),
            initial: StateId::new("w0"),
            inputs: spec.inputs().clone(),
            outputs: spec.outputs().clone(),
            quiescent: true,
            states: BTreeSet::new(),
            transitions: vec![Transition::new("w0", Action::Quiescence, "bot")],
        };
        Distinguisher::new(Iots::from_parts(parts)?, StateId::new("bot"), s.clone(), None)
    }

    /// Machine and sink after canonical renaming; equal keys mean the same
    /// distinguisher up to state names.
    pub fn canonical_key(&self) -> (Iots, StateId) {
        let (m, map) = self.machine.canonical_with_map("w");
        (m.with_name(""), map[&self.sink].clone())
    }

    pub fn label(&self) -> String {
        match &self.distinguished_from {
            Some(t) => format!("W({},{t})", self.state),
            None => format!("Wd({})", self.state),
        }
    }
}

impl fmt::Display for Distinguisher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Deletes `sink` with its incoming transitions and every state that becomes
/// unreachable.
pub fn remove_sink(m: &Iots, sink: &StateId) -> Result<Iots> {
    if !m.contains(sink) {
        return Err(Error::UnknownState(sink.clone()));
    }
    if !m.is_sink(sink) {
        return Err(Error::NotSink(sink.clone()));
    }
    if sink == m.initial() {
        return Err(Error::InvalidDistinguisher("cannot remove the initial state".into()));
    }
    let mut parts = m.to_parts();
    parts.states.remove(sink);
    parts.transitions.retain(|t| &t.target != sink);
    rebase(&Iots::from_parts(parts)?, m.initial())
}

/// `(W(s1,s2), W(s2,s1))` from a separator of `(s1, s2)`.
pub fn distinguishers(sep: &Separator) -> Result<(Distinguisher, Distinguisher)> {
    let (s1, s2) = &sep.pair;
    let (b1, b2) = &sep.sinks;
    let w12 = remove_sink(&sep.machine, b2)?.with_name(format!("W_{s1}_{s2}"));
    let w21 = remove_sink(&sep.machine, b1)?.with_name(format!("W_{s2}_{s1}"));
    Ok((
        Distinguisher::new(w12, b1.clone(), s1.clone(), Some(s2.clone()))?,
        Distinguisher::new(w21, b2.clone(), s2.clone(), Some(s1.clone()))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{delta_closure, Action};
    use crate::samples::spec_a;

    fn sid(s: &str) -> StateId {
        StateId::new(s)
    }

    fn closed_a() -> Iots {
        delta_closure(&spec_a()).unwrap()
    }

    fn edges_from_root(m: &Iots) -> Vec<(Action, StateId)> {
        m.enabled(m.initial()).map(|(a, t)| (a.clone(), t.clone())).collect()
    }

    #[test]
    fn simple_separator_of_spec_a() {
        let m = closed_a();
        let sep = build_separator(&m, &sid("s1"), &sid("s2")).unwrap();
        assert!(separator_violations(&m, &sep).is_empty());
        assert_eq!(sep.machine.states().len(), 3);
        assert_eq!(
            edges_from_root(&sep.machine),
            vec![
                (Action::output("1"), sep.sinks.1.clone()),
                (Action::Quiescence, sep.sinks.0.clone()),
            ]
        );
        assert!(sep.machine.inp(sep.machine.initial()).is_empty());
    }

    #[test]
    fn separator_is_symmetric() {
        let m = closed_a();
        let a = build_separator(&m, &sid("s1"), &sid("s2")).unwrap();
        let b = build_separator(&m, &sid("s2"), &sid("s1")).unwrap();
        let (ca, ma) = a.machine.canonical_with_map("r");
        let (cb, mb) = b.machine.canonical_with_map("r");
        assert_eq!(ca.with_name(""), cb.with_name(""));
        assert_eq!(ma[&a.sinks.0], mb[&b.sinks.1]);
        assert_eq!(ma[&a.sinks.1], mb[&b.sinks.0]);
    }

    #[test]
    fn compatible_states_are_rejected() {
        let m = closed_a();
        assert_eq!(
            build_separator(&m, &sid("s1"), &sid("s1")),
            Err(Error::Compatible(sid("s1"), sid("s1")))
        );
    }

    /// Two stable states that agree on quiescence and differ after input x.
    fn two_stable() -> Iots {
        delta_closure(
            &Iots::builder("two")
                .inputs(["x", "y"])
                .outputs(["0", "1"])
                .initial("s")
                .trans("s", "x", "p")
                .trans("s", "y", "t")
                .trans("p", "0", "s")
                .trans("t", "x", "r")
                .trans("t", "y", "s")
                .trans("r", "1", "t")
                .build()
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn separator_after_one_input() {
        let m = two_stable();
        let sep = build_separator(&m, &sid("s"), &sid("t")).unwrap();
        assert!(separator_violations(&m, &sep).is_empty(), "{:?}", separator_violations(&m, &sep));
        let root = sep.machine.initial();
        assert_eq!(sep.machine.inp(root).len(), 1);
        assert!(sep.machine.out(root).is_empty());
        let longest = crate::model::completed_traces(&sep.machine)
            .into_iter()
            .map(|t| t.len())
            .max()
            .unwrap();
        assert!(longest >= 2);
    }

    #[test]
    fn distinguishers_of_spec_a() {
        let m = closed_a();
        let sep = build_separator(&m, &sid("s1"), &sid("s2")).unwrap();
        let (w12, w21) = distinguishers(&sep).unwrap();
        assert_eq!(edges_from_root(&w12.machine), vec![(Action::Quiescence, w12.sink.clone())]);
        assert_eq!(edges_from_root(&w21.machine), vec![(Action::output("1"), w21.sink.clone())]);
        assert_ne!(w12.canonical_key(), w21.canonical_key());
        let wd = Distinguisher::quiescence(&m, &sid("s1")).unwrap();
        assert_eq!(wd.canonical_key(), w12.canonical_key());
        assert_eq!(w12.label(), "W(s1,s2)");
        assert_eq!(wd.label(), "Wd(s1)");
    }

    #[test]
    fn quiescence_distinguisher_needs_stable_state() {
        assert!(Distinguisher::quiescence(&closed_a(), &sid("s2")).is_err());
    }

    #[test]
    fn removing_both_sinks_is_invalid() {
        let m = closed_a();
        let sep = build_separator(&m, &sid("s1"), &sid("s2")).unwrap();
        let mut parts = sep.machine.to_parts();
        parts.states.retain(|s| s != &sep.sinks.0 && s != &sep.sinks.1);
        parts
            .transitions
            .retain(|t| t.target != sep.sinks.0 && t.target != sep.sinks.1);
        let bare = Iots::from_parts(parts).unwrap();
        assert!(matches!(
            Distinguisher::new(bare, sep.sinks.0.clone(), sid("s1"), Some(sid("s2"))),
            Err(Error::InvalidDistinguisher(_))
        ));
    }

    #[test]
    fn violations_detect_a_wrong_sink() {
        let m = closed_a();
        let mut sep = build_separator(&m, &sid("s1"), &sid("s2")).unwrap();
        sep.sinks = (sep.sinks.1.clone(), sep.sinks.0.clone());
        assert!(!separator_violations(&m, &sep).is_empty());
    }

    #[test]
    fn unwinnable_pair_is_reported() {
        // s and t differ only after x 1, but the machine may always answer 0
        let m = delta_closure(
            &Iots::builder("u")
                .inputs(["x"])
                .outputs(["0", "1", "2"])
                .initial("s")
                .trans("s", "x", "p")
                .trans("p", "0", "t")
                .trans("p", "1", "u")
                .trans("t", "x", "q")
                .trans("q", "0", "s")
                .trans("q", "1", "v")
                .trans("u", "x", "p")
                .trans("v", "x", "w")
                .trans("w", "2", "v")
                .build()
                .unwrap(),
        )
        .unwrap();
        assert!(!compatible(&m, &sid("s"), &sid("t")).unwrap().compatible);
        assert_eq!(
            build_separator(&m, &sid("s"), &sid("t")),
            Err(Error::NoSeparator(sid("s"), sid("t")))
        );
    }
}
