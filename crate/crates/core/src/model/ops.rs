use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{fresh_id, Action, Iots, IotsParts, StateId, Trace, Transition};
use crate::error::{Error, Result};

/// Adds a δ self-loop to every stable input state and δ to the outputs.
pub fn delta_closure(m: &Iots) -> Result<Iots> {
    if m.is_quiescent() {
        return Err(Error::AlreadyClosed);
    }
    let mut parts = m.to_parts();
    parts.quiescent = true;
    for s in m.states() {
        if m.is_stable(s) {
            parts
                .transitions
                .push(Transition::new(s.clone(), Action::Quiescence, s.clone()));
        }
    }
    Iots::from_parts(parts)
}

/// Inverse of [`delta_closure`]: drops δ from the alphabet and every δ
/// transition.
pub fn strip_quiescence(m: &Iots) -> Iots {
    let mut parts = m.to_parts();
    parts.quiescent = false;
    parts.transitions.retain(|t| !t.label.is_quiescence());
    Iots::from_parts(parts).expect("removing transitions keeps a machine valid")
}

/// Reachable synchronous product of two machines with a map back to the
/// component states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductIots {
    pub product: Iots,
    pub origin: BTreeMap<StateId, (StateId, StateId)>,
}

impl ProductIots {
    pub fn left(&self, q: &StateId) -> Option<&StateId> {
        self.origin.get(q).map(|(l, _)| l)
    }

    pub fn right(&self, q: &StateId) -> Option<&StateId> {
        self.origin.get(q).map(|(_, r)| r)
    }

    /// Product state built from the given pair, if reachable.
    pub fn state_of(&self, left: &StateId, right: &StateId) -> Option<&StateId> {
        self.origin
            .iter()
            .find(|(_, (l, r))| l == left && r == right)
            .map(|(q, _)| q)
    }
}

pub(crate) fn indexed_id(prefix: &str, i: usize, total: usize) -> StateId {
    let width = total.saturating_sub(1).to_string().len();
    StateId::new(format!("{prefix}{i:0width$}"))
}

/// Intersection of two machines over identical alphabets. Product states are
/// named `p0, p1, …` in breadth-first discovery order.
pub fn intersection(a: &Iots, b: &Iots) -> Result<ProductIots> {
    if !a.same_alphabet(b) {
        return Err(Error::AlphabetMismatch);
    }
    let root = (a.initial().clone(), b.initial().clone());
    let mut index: BTreeMap<(StateId, StateId), usize> = BTreeMap::new();
    let mut pairs = vec![root.clone()];
    index.insert(root, 0);
    let mut edges: Vec<(usize, Action, usize)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (s, p) = pairs[i].clone();
        for (x, s2) in a.enabled(&s) {
            let Some(p2) = b.step(&p, x) else { continue };
            let pair = (s2.clone(), p2.clone());
            let j = match index.get(&pair) {
                Some(&j) => j,
                None => {
                    let j = pairs.len();
                    pairs.push(pair.clone());
                    index.insert(pair, j);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((i, x.clone(), j));
        }
    }
    let n = pairs.len();
    let ids: Vec<StateId> = (0..n).map(|i| indexed_id("p", i, n)).collect();
    let parts = IotsParts {
        name: format!("{}_x_{}", a.name(), b.name()),
        initial: ids[0].clone(),
        inputs: a.inputs().clone(),
        outputs: a.outputs().clone(),
        quiescent: a.is_quiescent(),
        states: ids.iter().cloned().collect(),
        transitions: edges
            .into_iter()
            .map(|(i, x, j)| Transition::new(ids[i].clone(), x, ids[j].clone()))
            .collect(),
    };
    let product = Iots::from_parts(parts)?;
    let origin = ids.into_iter().zip(pairs).collect();
    Ok(ProductIots { product, origin })
}

/// `m/s`: initial state moved to `s`, unreachable part removed.
pub fn rebase(m: &Iots, s: &StateId) -> Result<Iots> {
    if !m.contains(s) {
        return Err(Error::UnknownState(s.clone()));
    }
    Ok(restrict_to_reachable(m, s))
}

fn restrict_to_reachable(m: &Iots, from: &StateId) -> Iots {
    let keep = m.reachable_from(from);
    let mut parts = m.to_parts();
    parts.initial = from.clone();
    parts.states = keep.clone();
    parts.transitions.retain(|t| keep.contains(&t.source));
    Iots::from_parts(parts).expect("restriction keeps a machine valid")
}

/// Removes the outgoing transitions of `node` (making it a sink) and every
/// state that becomes unreachable.
pub fn truncate_at(m: &Iots, node: &StateId) -> Result<Iots> {
    if !m.contains(node) {
        return Err(Error::UnknownState(node.clone()));
    }
    let mut parts = m.to_parts();
    parts.transitions.retain(|t| &t.source != node);
    let cut = Iots::from_parts(parts)?;
    Ok(restrict_to_reachable(&cut, m.initial()))
}

/// `a @_s b`: identifies the initial state of `b` with the sink `s` of `a`.
/// States of `b` are renamed apart from those of `a`.
pub fn chain(a: &Iots, s: &StateId, b: &Iots) -> Result<Iots> {
    chain_with_renaming(a, s, b).map(|(m, _)| m)
}

/// Like [`chain`], also returning where each state of `b` ended up.
pub fn chain_with_renaming(
    a: &Iots,
    s: &StateId,
    b: &Iots,
) -> Result<(Iots, BTreeMap<StateId, StateId>)> {
    if !a.contains(s) {
        return Err(Error::UnknownState(s.clone()));
    }
    if !a.is_sink(s) {
        return Err(Error::NotSink(s.clone()));
    }
    if !a.same_alphabet(b) {
        return Err(Error::AlphabetMismatch);
    }
    let mut taken: BTreeSet<StateId> = a.states().clone();
    let mut map = BTreeMap::new();
    map.insert(b.initial().clone(), s.clone());
    for x in b.states() {
        if x == b.initial() {
            continue;
        }
        let id = fresh_id(x.as_str(), |c| taken.contains(c));
        taken.insert(id.clone());
        map.insert(x.clone(), id);
    }
    let mut parts = a.to_parts();
    parts.states.extend(map.values().cloned());
    parts.transitions.extend(
        b.transitions()
            .map(|t| Transition::new(map[&t.source].clone(), t.label, map[&t.target].clone())),
    );
    Ok((Iots::from_parts(parts)?, map))
}

/// Traces from input state `s` that end in an input state and pass no input
/// state strictly in between.
pub fn bridge_traces(m: &Iots, s: &StateId) -> Result<BTreeSet<Trace>> {
    if !m.contains(s) {
        return Err(Error::UnknownState(s.clone()));
    }
    if !m.is_input_state(s) {
        return Err(Error::NotInputState(s.clone()));
    }
    let bound = default_depth_bound(m);
    let mut found = BTreeSet::new();
    let mut stack: Vec<(StateId, Trace)> = Vec::new();
    for (a, t) in m.enabled(s) {
        stack.push((t.clone(), vec![a.clone()]));
    }
    while let Some((t, trace)) = stack.pop() {
        if m.is_input_state(&t) {
            found.insert(trace);
            continue;
        }
        if trace.len() >= bound {
            continue;
        }
        for (a, u) in m.enabled(&t) {
            let mut next = trace.clone();
            next.push(a.clone());
            stack.push((u.clone(), next));
        }
    }
    Ok(found)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPreservation {
    pub preserving: bool,
    /// First non-sink state of the submachine missing an output, with it.
    pub witness: Option<(StateId, Action)>,
}

/// Checks that `sub` is a submachine of `m` and that every non-sink state of
/// `sub` keeps all outputs `m` enables there.
pub fn is_output_preserving_submachine(sub: &Iots, m: &Iots) -> Result<OutputPreservation> {
    check_submachine(sub, m)?;
    for s in sub.states() {
        if sub.is_sink(s) {
            continue;
        }
        for o in m.out(s) {
            if sub.step(s, &o).is_none() {
                return Ok(OutputPreservation {
                    preserving: false,
                    witness: Some((s.clone(), o)),
                });
            }
        }
    }
    Ok(OutputPreservation {
        preserving: true,
        witness: None,
    })
}

pub(crate) fn check_submachine(sub: &Iots, m: &Iots) -> Result<()> {
    if !sub.same_alphabet(m) {
        return Err(Error::NotSubmachine("alphabets differ".into()));
    }
    if let Some(s) = sub.states().iter().find(|s| !m.contains(s)) {
        return Err(Error::NotSubmachine(format!("state {s} not in machine")));
    }
    if let Some(t) = sub
        .transitions()
        .find(|t| m.step(&t.source, &t.label) != Some(&t.target))
    {
        return Err(Error::NotSubmachine(format!("transition {t} not in machine")));
    }
    Ok(())
}

/// `|states| × (|O| + 1) + 1`, with δ counted in `O` when present.
pub fn default_depth_bound(m: &Iots) -> usize {
    m.states().len() * (m.output_actions().len() + 1) + 1
}

/// All traces of length at most `depth` from `s`, the empty trace included.
pub fn traces_up_to(m: &Iots, s: &StateId, depth: usize) -> BTreeSet<Trace> {
    let mut out = BTreeSet::new();
    if !m.contains(s) {
        return out;
    }
    let mut stack = vec![(s.clone(), Vec::new())];
    while let Some((q, trace)) = stack.pop() {
        if trace.len() < depth {
            for (a, t) in m.enabled(&q) {
                let mut next = trace.clone();
                next.push(a.clone());
                stack.push((t.clone(), next));
            }
        }
        out.insert(trace);
    }
    out
}

/// Traces from the initial state that end in a sink, up to the default
/// depth bound.
pub fn completed_traces(m: &Iots) -> BTreeSet<Trace> {
    let bound = default_depth_bound(m);
    let mut out = BTreeSet::new();
    let mut stack = vec![(m.initial().clone(), Vec::new())];
    while let Some((q, trace)) = stack.pop() {
        if m.is_sink(&q) {
            out.insert(trace);
            continue;
        }
        if trace.len() >= bound {
            continue;
        }
        for (a, t) in m.enabled(&q) {
            let mut next = trace.clone();
            next.push(a.clone());
            stack.push((t.clone(), next));
        }
    }
    out
}

/// Whether the transition graph (all states) has no cycle.
pub fn is_acyclic(m: &Iots) -> bool {
    let mut indegree: BTreeMap<&StateId, usize> = m.states().iter().map(|s| (s, 0)).collect();
    for s in m.states() {
        for (_, t) in m.enabled(s) {
            *indegree.get_mut(t).expect("endpoint is a state") += 1;
        }
    }
    let mut ready: Vec<&StateId> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(s, _)| *s)
        .collect();
    let mut removed = 0;
    while let Some(s) = ready.pop() {
        removed += 1;
        for (_, t) in m.enabled(s) {
            let d = indegree.get_mut(t).expect("endpoint is a state");
            *d -= 1;
            if *d == 0 {
                ready.push(t);
            }
        }
    }
    removed == m.states().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{spec_a, spec_a_builder};

    fn sid(s: &str) -> StateId {
        StateId::new(s)
    }

    fn tr(tokens: &[&str], m: &Iots) -> Trace {
        tokens
            .iter()
            .map(|t| {
                if *t == "delta" {
                    Action::Quiescence
                } else if m.inputs().contains(*t) {
                    Action::input(*t)
                } else {
                    Action::output(*t)
                }
            })
            .collect()
    }

    #[test]
    fn closure_adds_one_loop_per_stable_state() {
        let m = spec_a();
        let closed = delta_closure(&m).unwrap();
        let added: Vec<Transition> = closed
            .transitions()
            .filter(|t| t.label.is_quiescence())
            .collect();
        // oracle: recompute the class of every state of the open machine
        let stable: Vec<StateId> = m.states().iter().filter(|s| m.is_stable(s)).cloned().collect();
        assert_eq!(stable, vec![sid("s1")]);
        assert_eq!(added, vec![Transition::new("s1", Action::Quiescence, "s1")]);
        assert_eq!(closed.transition_count(), m.transition_count() + 1);
        assert_eq!(delta_closure(&closed), Err(Error::AlreadyClosed));
        assert_eq!(strip_quiescence(&closed), m);
    }

    #[test]
    fn closure_without_stable_states_only_extends_alphabet() {
        let m = Iots::builder("x")
            .inputs(["a"])
            .outputs(["0"])
            .initial("s")
            .trans("s", "a", "s")
            .trans("s", "0", "t")
            .trans("t", "a", "t")
            .trans("t", "0", "s")
            .build()
            .unwrap();
        let closed = delta_closure(&m).unwrap();
        assert!(closed.is_quiescent());
        assert_eq!(
            closed.transitions().collect::<Vec<_>>(),
            m.transitions().collect::<Vec<_>>()
        );
    }

    #[test]
    fn closure_of_single_state_machine() {
        let m = Iots::builder("x")
            .inputs(["a"])
            .initial("s0")
            .trans("s0", "a", "s0")
            .build()
            .unwrap();
        let closed = delta_closure(&m).unwrap();
        assert_eq!(closed.step(&sid("s0"), &Action::Quiescence), Some(&sid("s0")));
    }

    #[test]
    fn self_intersection_is_isomorphic() {
        let m = delta_closure(&spec_a()).unwrap();
        let p = intersection(&m, &m).unwrap();
        assert_eq!(p.product.states().len(), 4);
        for (q, (l, r)) in &p.origin {
            assert_eq!(l, r);
            assert_eq!(p.product.out(q), m.out(l));
        }
        assert_eq!(p.product.canonical("n").to_parts().transitions, m.canonical("n").to_parts().transitions);
    }

    #[test]
    fn intersection_of_rebased_states_has_sink() {
        let m = delta_closure(&spec_a()).unwrap();
        let a = rebase(&m, &sid("s1")).unwrap();
        let b = rebase(&m, &sid("s2")).unwrap();
        let p = intersection(&a, &b).unwrap();
        let q = p.state_of(&sid("q1"), &sid("s1")).expect("pair reached by a");
        assert!(p.product.is_sink(q));
        assert_eq!(
            p.product.after(p.product.initial(), &tr(&["a"], &m)),
            Some(q.clone())
        );
    }

    #[test]
    fn intersection_with_empty_common_init_is_single_sink() {
        let a = Iots::builder("a")
            .inputs(["x", "y"])
            .outputs(["0", "1"])
            .initial("s")
            .trans("s", "0", "s")
            .build()
            .unwrap();
        let b = Iots::builder("b")
            .inputs(["x", "y"])
            .outputs(["0", "1"])
            .initial("t")
            .trans("t", "1", "t")
            .build()
            .unwrap();
        let p = intersection(&a, &b).unwrap();
        assert_eq!(p.product.states().len(), 1);
        assert!(p.product.is_sink(p.product.initial()));
    }

    #[test]
    fn intersection_rejects_alphabet_mismatch() {
        let m = spec_a();
        let closed = delta_closure(&m).unwrap();
        assert_eq!(intersection(&m, &closed), Err(Error::AlphabetMismatch));
    }

    #[test]
    fn rebase_examples() {
        let m = spec_a();
        assert_eq!(rebase(&m, &sid("s1")).unwrap(), m);
        let at_s2 = rebase(&m, &sid("s2")).unwrap();
        assert_eq!(at_s2.initial(), &sid("s2"));
        assert_eq!(at_s2.states().len(), 4);
        let at_q2 = rebase(&m, &sid("q2")).unwrap();
        assert_eq!(at_q2.initial(), &sid("q2"));
        assert_eq!(at_q2.states().len(), 4);
        assert_eq!(rebase(&m, &sid("nope")), Err(Error::UnknownState(sid("nope"))));
    }

    #[test]
    fn rebase_drops_unreachable_part() {
        let m = Iots::builder("x")
            .inputs(["a"])
            .initial("s")
            .trans("s", "a", "t")
            .trans("t", "a", "t")
            .build()
            .unwrap();
        let r = rebase(&m, &sid("t")).unwrap();
        assert_eq!(r.states().iter().collect::<Vec<_>>(), vec![&sid("t")]);
    }

    #[test]
    fn chain_with_trivial_machine_is_identity_up_to_renaming() {
        let b = delta_closure(&spec_a()).unwrap();
        let trivial = Iots::builder("t")
            .inputs(["a", "b"])
            .outputs(["0", "1"])
            .quiescent(true)
            .initial("root")
            .build()
            .unwrap();
        let c = chain(&trivial, &sid("root"), &b).unwrap();
        assert_eq!(c.canonical("n").to_parts().transitions, b.canonical("n").to_parts().transitions);
    }

    #[test]
    fn chain_at_non_sink_fails() {
        let m = spec_a();
        assert_eq!(chain(&m, &sid("s1"), &m), Err(Error::NotSink(sid("s1"))));
    }

    #[test]
    fn chain_renames_clashing_states() {
        let a = Iots::builder("a")
            .inputs(["x"])
            .initial("n0")
            .trans("n0", "x", "n1")
            .build()
            .unwrap();
        let (c, map) = chain_with_renaming(&a, &sid("n1"), &a).unwrap();
        assert_eq!(map[&sid("n0")], sid("n1"));
        assert_eq!(map[&sid("n1")], sid("n1_1"));
        let trace = vec![Action::input("x"), Action::input("x")];
        assert_eq!(c.after(c.initial(), &trace), Some(sid("n1_1")));
    }

    #[test]
    fn bridge_traces_of_spec_a() {
        let m = spec_a();
        let from_s1 = bridge_traces(&m, &sid("s1")).unwrap();
        let want: BTreeSet<Trace> = [tr(&["a", "0"], &m), tr(&["a", "1"], &m), tr(&["b"], &m)]
            .into_iter()
            .collect();
        assert_eq!(from_s1, want);
        let from_s2 = bridge_traces(&m, &sid("s2")).unwrap();
        let want: BTreeSet<Trace> = [tr(&["a"], &m), tr(&["b", "0"], &m), tr(&["1"], &m)]
            .into_iter()
            .collect();
        assert_eq!(from_s2, want);
        assert_eq!(bridge_traces(&m, &sid("q1")), Err(Error::NotInputState(sid("q1"))));
    }

    #[test]
    fn bridge_traces_of_input_only_machine_are_single_inputs() {
        let m = Iots::builder("x")
            .inputs(["a", "b"])
            .initial("s")
            .trans("s", "a", "t")
            .trans("s", "b", "s")
            .trans("t", "a", "s")
            .trans("t", "b", "t")
            .build()
            .unwrap();
        let bt = bridge_traces(&m, &sid("s")).unwrap();
        assert!(bt.iter().all(|t| t.len() == 1));
        assert_eq!(bt.len(), 2);
    }

    #[test]
    fn output_preservation_examples() {
        let m = spec_a();
        let preamble = Iots::builder("c")
            .inputs(["a", "b"])
            .outputs(["0", "1"])
            .initial("s1")
            .trans("s1", "a", "q1")
            .trans("q1", "0", "s2")
            .trans("q1", "1", "s2")
            .build()
            .unwrap();
        let r = is_output_preserving_submachine(&preamble, &m).unwrap();
        assert!(r.preserving);

        let dropped = Iots::builder("c")
            .inputs(["a", "b"])
            .outputs(["0", "1"])
            .initial("s1")
            .trans("s1", "a", "q1")
            .trans("q1", "0", "s2")
            .build()
            .unwrap();
        let r = is_output_preserving_submachine(&dropped, &m).unwrap();
        assert_eq!(r.witness, Some((sid("q1"), Action::output("1"))));

        let trivial = Iots::builder("c")
            .inputs(["a", "b"])
            .outputs(["0", "1"])
            .initial("s1")
            .build()
            .unwrap();
        assert!(is_output_preserving_submachine(&trivial, &m).unwrap().preserving);

        let foreign = spec_a_builder().trans("s9", "a", "s1").build().unwrap();
        assert!(matches!(
            is_output_preserving_submachine(&foreign, &m),
            Err(Error::NotSubmachine(_))
        ));
    }

    #[test]
    fn acyclicity() {
        assert!(!is_acyclic(&spec_a()));
        let tree = Iots::builder("t")
            .inputs(["a"])
            .outputs(["0"])
            .initial("r")
            .trans("r", "a", "x")
            .trans("x", "0", "y")
            .build()
            .unwrap();
        assert!(is_acyclic(&tree));
        assert_eq!(completed_traces(&tree).len(), 1);
    }

    #[test]
    fn truncation_removes_subtree() {
        let tree = Iots::builder("t")
            .inputs(["a"])
            .outputs(["0"])
            .initial("r")
            .trans("r", "a", "x")
            .trans("x", "0", "y")
            .build()
            .unwrap();
        let cut = truncate_at(&tree, &sid("x")).unwrap();
        assert!(cut.is_sink(&sid("x")));
        assert!(!cut.contains(&sid("y")));
    }
}
