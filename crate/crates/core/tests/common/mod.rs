//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ioco_core::model::{delta_closure, validate, Action, Iots, Property, StateId, Trace, Transition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INPUTS: [&str; 2] = ["a", "b"];
pub const OUTPUTS: [&str; 2] = ["0", "1"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sid(i: usize) -> StateId {
    StateId::new(format!("s{i}"))
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Stable,
    Quasi,
    Output,
}

/// Random open specification with at most `max_states` states over
/// `{a, b}` / `{0, 1}`. State 0 is stable; output transitions only go to
/// lower-numbered states, so there are no output cycles. Retries until the
/// machine is initially connected.
pub fn random_spec(r: &mut ChaCha8Rng, max_states: usize) -> Iots {
    loop {
        let n = r.gen_range(2..=max_states.max(2));
        let mut ts = Vec::new();
        for i in 0..n {
            let kind = if i == 0 {
                Kind::Stable
            } else {
                *[Kind::Stable, Kind::Quasi, Kind::Output, Kind::Output]
                    .choose(r)
                    .unwrap()
            };
            if kind != Kind::Output {
                for x in INPUTS {
                    ts.push(Transition::new(sid(i), Action::input(x), sid(r.gen_range(0..n))));
                }
            }
            if kind != Kind::Stable {
                let mut outs: Vec<&str> = OUTPUTS.to_vec();
                outs.shuffle(r);
                let count = r.gen_range(1..=2);
                for o in &outs[..count] {
                    ts.push(Transition::new(sid(i), Action::output(*o), sid(r.gen_range(0..i))));
                }
            }
        }
        let mut b = Iots::builder("rand")
            .inputs(INPUTS)
            .outputs(OUTPUTS)
            .initial("s0");
        for i in 0..n {
            b = b.state(sid(i));
        }
        for t in ts {
            b = b.trans(t.source, t.label.name().to_owned(), t.target);
        }
        let m = b.build().expect("generator builds deterministic machines");
        if validate(&m, &Property::MEMBERSHIP).ok() {
            return m;
        }
    }
}

pub fn random_closed_spec(r: &mut ChaCha8Rng, max_states: usize) -> Iots {
    delta_closure(&random_spec(r, max_states)).unwrap()
}

/// A closed implementation: either an independent random machine or the
/// specification after a few random edits (retarget, drop or add an output,
/// swap an output label). Edits may break progressiveness; that is fine for
/// an implementation model.
pub fn random_implementation(r: &mut ChaCha8Rng, spec_open: &Iots, max_states: usize) -> Iots {
    if r.gen_bool(0.3) {
        return random_closed_spec(r, max_states);
    }
    let states: Vec<StateId> = spec_open.states().iter().cloned().collect();
    let mut ts: Vec<Transition> = spec_open.transitions().collect();
    for _ in 0..r.gen_range(0..=3) {
        let i = r.gen_range(0..ts.len());
        match r.gen_range(0..4) {
            0 => ts[i].target = states.choose(r).unwrap().clone(),
            1 => {
                if ts[i].label.is_output() && ts.iter().filter(|t| t.source == ts[i].source).count() > 1 {
                    ts.remove(i);
                }
            }
            2 => {
                let s = states.choose(r).unwrap().clone();
                let o = Action::output(*OUTPUTS.choose(r).unwrap());
                if !ts.iter().any(|t| t.source == s && t.label == o) {
                    ts.push(Transition::new(s, o, states.choose(r).unwrap().clone()));
                }
            }
            _ => {
                if let Action::Output(o) = &ts[i].label {
                    let other = Action::output(if o == "0" { "1" } else { "0" });
                    if !ts.iter().any(|t| t.source == ts[i].source && t.label == other) {
                        ts[i].label = other;
                    }
                }
            }
        }
    }
    let mut parts = spec_open.to_parts();
    parts.name = "impl".into();
    parts.transitions = ts;
    delta_closure(&Iots::from_parts(parts).unwrap()).unwrap()
}

/// Every trace of `m` from `s` of length at most `depth`, by plain
/// enumeration.
pub fn traces(m: &Iots, s: &StateId, depth: usize) -> BTreeSet<Trace> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(s.clone(), Vec::new())];
    while let Some((q, t)) = stack.pop() {
        if t.len() < depth {
            for (a, q2) in m.enabled(&q) {
                let mut next = t.clone();
                next.push(a.clone());
                stack.push((q2.clone(), next));
            }
        }
        out.insert(t);
    }
    out
}

/// Length of the shortest trace σ of the specification after which the
/// implementation enables an output the specification does not, or `None`
/// when `implementation ioco spec`. Explores traces layer by layer, keeping
/// only the pair of states each trace leads to (both machines are
/// deterministic), up to length `|P|·|S|`.
pub fn ioco_oracle(implementation: &Iots, spec: &Iots) -> Option<usize> {
    let bound = implementation.states().len() * spec.states().len();
    let mut layer: BTreeSet<(StateId, StateId)> =
        BTreeSet::from([(implementation.initial().clone(), spec.initial().clone())]);
    for len in 0..=bound {
        let mut next = BTreeSet::new();
        for (p, s) in &layer {
            let allowed = spec.out(s);
            if implementation.out(p).iter().any(|o| !allowed.contains(o)) {
                return Some(len);
            }
            for (a, s2) in spec.enabled(s) {
                if let Some(p2) = implementation.step(p, a) {
                    next.insert((p2.clone(), s2.clone()));
                }
            }
        }
        layer = next;
    }
    None
}

/// Whether `ce` is a genuine violation: a spec trace the implementation
/// performs, followed by an output only the implementation enables.
pub fn is_violation(implementation: &Iots, spec: &Iots, trace: &[Action], output: &Action) -> bool {
    let Some(s) = spec.after(spec.initial(), trace) else { return false };
    let Some(p) = implementation.after(implementation.initial(), trace) else { return false };
    implementation.step(&p, output).is_some() && spec.step(&s, output).is_none()
}

/// Depth-first acyclicity check.
pub fn acyclic(m: &Iots) -> bool {
    fn visit(m: &Iots, s: &StateId, on_path: &mut BTreeSet<StateId>, done: &mut BTreeSet<StateId>) -> bool {
        if done.contains(s) {
            return true;
        }
        if !on_path.insert(s.clone()) {
            return false;
        }
        let ok = m.enabled(s).all(|(_, t)| visit(m, t, on_path, done));
        on_path.remove(s);
        done.insert(s.clone());
        ok
    }
    let mut done = BTreeSet::new();
    m.states()
        .iter()
        .all(|s| visit(m, s, &mut BTreeSet::new(), &mut done))
}

/// All paths of an acyclic machine from its initial state, as
/// (trace, state reached) pairs, the empty path included.
pub fn paths(m: &Iots) -> Vec<(Trace, StateId)> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), m.initial().clone())];
    while let Some((t, s)) = stack.pop() {
        for (a, s2) in m.enabled(&s) {
            let mut next = t.clone();
            next.push(a.clone());
            stack.push((next, s2.clone()));
        }
        out.push((t, s));
    }
    out
}
