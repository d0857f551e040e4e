use std::collections::{BTreeMap, BTreeSet};

use super::cover::transition_cover_from;
use super::identifiers::{harmonized_identifiers, Identifiers};
use super::preamble::state_cover;
use super::require_spec;
use crate::error::{Error, Result};
use crate::model::{chain, indexed_id, is_acyclic, truncate_at, Action, Iots, StateId, Trace, Transition};

/// Name of the fail state in canonical test cases.
pub const FAIL: &str = "fail";

/// An acyclic, single-input, output-complete machine with a designated
/// `fail` sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub machine: Iots,
    pub fail: StateId,
}

impl TestCase {
    /// Wraps an already completed machine, rejecting anything that violates
    /// the test-case invariants.
    pub fn new(machine: Iots, fail: StateId) -> Result<Self> {
        let tc = TestCase { machine, fail };
        let v = tc.violations();
        if v.is_empty() {
            Ok(tc)
        } else {
            Err(Error::InvalidMachine(v.join("; ")))
        }
    }

    /// Every trace of the machine, grouped by whether it ends in `fail`.
    fn all_traces(&self) -> (BTreeSet<Trace>, BTreeSet<Trace>) {
        let mut pass = BTreeSet::new();
        let mut fail = BTreeSet::new();
        let mut stack = vec![(self.machine.initial().clone(), Vec::new())];
        while let Some((n, t)) = stack.pop() {
            for (a, u) in self.machine.enabled(&n) {
                let mut next = t.clone();
                next.push(a.clone());
                stack.push((u.clone(), next));
            }
            if n == self.fail {
                fail.insert(t);
            } else {
                pass.insert(t);
            }
        }
        (pass, fail)
    }

    pub fn fail_traces(&self) -> BTreeSet<Trace> {
        self.all_traces().1
    }

    pub fn pass_traces(&self) -> BTreeSet<Trace> {
        self.all_traces().0
    }

    /// Completed traces split into (ending in fail, ending elsewhere). Both
    /// trace sets are determined by this pair, so it serves as the
    /// deduplication key.
    pub fn verdict_key(&self) -> (BTreeSet<Trace>, BTreeSet<Trace>) {
        let mut fail = BTreeSet::new();
        let mut pass = BTreeSet::new();
        let mut stack = vec![(self.machine.initial().clone(), Vec::new())];
        while let Some((n, t)) = stack.pop() {
            if self.machine.is_sink(&n) {
                if n == self.fail {
                    fail.insert(t);
                } else {
                    pass.insert(t);
                }
                continue;
            }
            for (a, u) in self.machine.enabled(&n) {
                let mut next = t.clone();
                next.push(a.clone());
                stack.push((u.clone(), next));
            }
        }
        (fail, pass)
    }

    /// Length of the longest trace.
    pub fn depth(&self) -> usize {
        fn go(m: &Iots, n: &StateId, memo: &mut BTreeMap<StateId, usize>) -> usize {
            if let Some(&d) = memo.get(n) {
                return d;
            }
            let d = m
                .enabled(n)
                .map(|(_, t)| 1 + go(m, t, memo))
                .max()
                .unwrap_or(0);
            memo.insert(n.clone(), d);
            d
        }
        go(&self.machine, self.machine.initial(), &mut BTreeMap::new())
    }

    /// Renames states to `t0, t1, ...` in breadth-first order, `fail` kept
    /// as [`FAIL`].
    pub fn canonical(&self) -> TestCase {
        let order = self.machine.reachable_with_access(self.machine.initial());
        let total = order.len() - usize::from(order.iter().any(|(s, _)| s == &self.fail));
        let mut map = BTreeMap::new();
        let mut i = 0;
        for (s, _) in order {
            if s == self.fail {
                map.insert(s, StateId::new(FAIL));
            } else {
                map.insert(s, indexed_id("t", i, total));
                i += 1;
            }
        }
        let machine = self
            .machine
            .rename_states(&map)
            .expect("canonical renaming is injective");
        TestCase {
            machine,
            fail: StateId::new(FAIL),
        }
    }

    /// Test-case invariants: acyclic, single-input, controllable,
    /// output-complete wherever an output is observed, `fail` a sink.
    pub fn violations(&self) -> Vec<String> {
        let m = &self.machine;
        let mut v = Vec::new();
        if !m.is_quiescent() {
            v.push("alphabet lacks quiescence".into());
        }
        if !m.contains(&self.fail) {
            v.push(format!("fail state {} missing", self.fail));
        } else if !m.is_sink(&self.fail) {
            v.push(format!("fail state {} is not a sink", self.fail));
        }
        if !is_acyclic(m) {
            v.push("not acyclic".into());
        }
        let reach = m.reachable_from(m.initial());
        if let Some(s) = m.states().iter().find(|s| !reach.contains(*s)) {
            v.push(format!("state {s} is unreachable"));
        }
        let all_outputs: BTreeSet<Action> = m.output_actions().into_iter().collect();
        for s in m.states() {
            let inp = m.inp(s);
            let out = m.out(s);
            if inp.len() > 1 {
                v.push(format!("state {s} sends more than one input"));
            }
            if !inp.is_empty() && !out.is_empty() {
                v.push(format!("state {s} is uncontrollable"));
            }
            if !out.is_empty() && out != all_outputs {
                v.push(format!("state {s} is not output-complete"));
            }
        }
        v
    }
}

/// `TC(u)`: adds a fail sink and, wherever `u` observes outputs, a
/// transition to it for every output (δ included) not expected there.
pub fn complete_test_case(u: &Iots) -> Result<TestCase> {
    if !u.is_quiescent() {
        return Err(Error::NotClosed);
    }
    if !is_acyclic(u) {
        return Err(Error::Cyclic);
    }
    for s in u.states() {
        let inp = u.inp(s);
        if inp.len() > 1 {
            return Err(Error::NotSingleInput(s.clone()));
        }
        if !inp.is_empty() && !u.out(s).is_empty() {
            return Err(Error::Uncontrollable(s.clone()));
        }
    }
    let fail = u.fresh_state(FAIL);
    let all = u.output_actions();
    let mut parts = u.to_parts();
    for s in u.states() {
        let out = u.out(s);
        if out.is_empty() {
            continue;
        }
        for o in &all {
            if !out.contains(o) {
                parts.transitions.push(Transition::new(s.clone(), o.clone(), fail.clone()));
            }
        }
    }
    parts.states.insert(fail.clone());
    Ok(TestCase {
        machine: Iots::from_parts(parts)?,
        fail,
    })
}

/// Where a test case comes from: the cover element, the point where the
/// identifier was attached, and the identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    /// `Z:s` for the preamble of `s`, `V:s:x` for the transition-cover
    /// element of `(s, x)`.
    pub cover: String,
    /// Specification state identified, with the access trace inside the
    /// cover element for transition-cover elements (`s1@a.0.1`).
    pub point: String,
    pub identifier: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteCase {
    pub id: String,
    pub case: TestCase,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSuite {
    pub name: String,
    /// Generation parameters, written into the bundle header.
    pub params: BTreeMap<String, String>,
    pub cases: Vec<SuiteCase>,
}

impl TestSuite {
    pub fn case(&self, id: &str) -> Option<&SuiteCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    pub fn max_depth(&self) -> usize {
        self.cases.iter().map(|c| c.case.depth()).max().unwrap_or(0)
    }
}

fn access_token(trace: &[Action]) -> String {
    trace.iter().map(Action::name).collect::<Vec<_>>().join(".")
}

/// Everything the suite is built from, kept for statistics and checks.
#[derive(Clone, Debug)]
pub struct SuiteParts {
    pub state_cover: Vec<super::Preamble>,
    pub transition_cover: Vec<super::CoverElement>,
    pub identifiers: Identifiers,
}

/// Checks every precondition of suite generation, naming the offending item.
pub fn check_generation_preconditions(spec: &Iots) -> Result<()> {
    require_spec(spec)?;
    if !spec.is_stable(spec.initial()) {
        return Err(Error::InitialNotStable(spec.initial().clone()));
    }
    Ok(())
}

/// Builds the cover sets and identifiers the suite is derived from.
pub fn suite_parts(spec: &Iots) -> Result<SuiteParts> {
    check_generation_preconditions(spec)?;
    let identifiers = harmonized_identifiers(spec)?;
    let z = state_cover(spec)?;
    let v = transition_cover_from(spec, &z)?;
    Ok(SuiteParts {
        state_cover: z,
        transition_cover: v,
        identifiers,
    })
}

/// Chains every identifier onto every sink of the state cover and every
/// identification point of the transition cover, completes each result
/// with a fail state and drops cases with the same trace sets as an
/// earlier one.
pub fn generate_suite(spec: &Iots) -> Result<TestSuite> {
    let parts = suite_parts(spec)?;
    let ids = &parts.identifiers;
    let mut raw: Vec<(Iots, Provenance)> = Vec::new();
    for p in &parts.state_cover {
        for w in &ids[&p.target] {
            raw.push((
                chain(&p.machine, &p.target, &w.machine)?,
                Provenance {
                    cover: format!("Z:{}", p.target),
                    point: p.target.to_string(),
                    identifier: w.label(),
                },
            ));
        }
    }
    for e in &parts.transition_cover {
        let access: BTreeMap<StateId, Trace> = e
            .machine
            .reachable_with_access(e.machine.initial())
            .into_iter()
            .collect();
        for (node, t) in &e.identification_points {
            let cut = truncate_at(&e.machine, node)?;
            for w in &ids[t] {
                raw.push((
                    chain(&cut, node, &w.machine)?,
                    Provenance {
                        cover: format!("V:{}:{}", e.source, e.input.name()),
                        point: format!("{t}@{}", access_token(&access[node])),
                        identifier: w.label(),
                    },
                ));
            }
        }
    }

    let mut seen = BTreeSet::new();
    let mut kept = Vec::new();
    for (u, prov) in raw {
        let tc = complete_test_case(&u)?.canonical();
        if seen.insert(tc.verdict_key()) {
            kept.push((tc, prov));
        }
    }
    let width = kept.len().max(1).to_string().len().max(3);
    let cases = kept
        .into_iter()
        .enumerate()
        .map(|(i, (tc, provenance))| {
            let id = format!("tc{:0width$}", i + 1);
            SuiteCase {
                case: TestCase {
                    machine: tc.machine.with_name(id.clone()),
                    fail: tc.fail,
                },
                id,
                provenance,
            }
        })
        .collect();
    let mut params = BTreeMap::new();
    params.insert("k".to_owned(), spec.input_states().len().to_string());
    params.insert("generator".to_owned(), format!("iocogen-{}", env!("CARGO_PKG_VERSION")));
    Ok(TestSuite {
        name: spec.name().to_owned(),
        params,
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{completed_traces, delta_closure, intersection};
    use crate::samples::spec_a;
    use crate::testgen::{build_preamble, build_separator, distinguishers};

    fn sid(s: &str) -> StateId {
        StateId::new(s)
    }

    fn closed_a() -> Iots {
        delta_closure(&spec_a()).unwrap()
    }

    #[test]
    fn completion_adds_missing_outputs() {
        let u = Iots::builder("u")
            .inputs(["a"])
            .outputs(["0", "1"])
            .quiescent(true)
            .initial("n0")
            .trans("n0", "0", "n1")
            .build()
            .unwrap();
        let tc = complete_test_case(&u).unwrap();
        let mut to_fail: Vec<Action> = tc
            .machine
            .enabled(&sid("n0"))
            .filter(|(_, t)| **t == tc.fail)
            .map(|(a, _)| a.clone())
            .collect();
        to_fail.sort();
        assert_eq!(to_fail, vec![Action::output("1"), Action::Quiescence]);
        assert!(tc.violations().is_empty());
    }

    #[test]
    fn completion_of_preamble_and_distinguisher() {
        let m = closed_a();
        let c = build_preamble(&m, &sid("s2")).unwrap();
        let sep = build_separator(&m, &sid("s2"), &sid("s1")).unwrap();
        let (w21, _) = distinguishers(&sep).unwrap();
        let u = chain(&c.machine, &sid("s2"), &w21.machine).unwrap();
        let tc = complete_test_case(&u).unwrap();
        let fails_at = |s: &str| -> BTreeSet<Action> {
            tc.machine
                .enabled(&sid(s))
                .filter(|(_, t)| **t == tc.fail)
                .map(|(a, _)| a.clone())
                .collect()
        };
        assert_eq!(fails_at("q1"), BTreeSet::from([Action::Quiescence]));
        assert_eq!(
            fails_at("s2"),
            BTreeSet::from([Action::output("0"), Action::Quiescence])
        );
        assert!(fails_at("s1").is_empty());
        assert!(tc.violations().is_empty());
    }

    #[test]
    fn uncontrollable_node_is_rejected() {
        let u = Iots::builder("u")
            .inputs(["a"])
            .outputs(["0"])
            .quiescent(true)
            .initial("n0")
            .trans("n0", "0", "n1")
            .trans("n0", "a", "n2")
            .build()
            .unwrap();
        assert_eq!(complete_test_case(&u), Err(Error::Uncontrollable(sid("n0"))));
    }

    #[test]
    fn suite_of_spec_a() {
        let m = closed_a();
        let ts = generate_suite(&m).unwrap();
        assert!(!ts.cases.is_empty());
        for c in &ts.cases {
            assert!(c.case.violations().is_empty(), "{}", c.id);
            // the specification passes its own suite
            let p = intersection(&m, &c.case.machine).unwrap();
            assert!(p.origin.values().all(|(_, t)| t != &c.case.fail), "{}", c.id);
        }
        // every completed trace of Z and V is a pass trace of some case
        let parts = suite_parts(&m).unwrap();
        let pass: BTreeSet<Trace> = ts.cases.iter().flat_map(|c| c.case.pass_traces()).collect();
        for p in &parts.state_cover {
            for t in completed_traces(&p.machine) {
                assert!(pass.contains(&t));
            }
        }
        for e in &parts.transition_cover {
            for t in completed_traces(&e.machine) {
                assert!(pass.contains(&t), "{t:?}");
            }
        }
        // size bound
        let max_points = parts
            .transition_cover
            .iter()
            .map(|e| e.identification_points.len())
            .max()
            .unwrap_or(1)
            .max(1);
        let max_id = parts.identifiers.values().map(Vec::len).max().unwrap();
        let bound = (parts.state_cover.len() + parts.transition_cover.len()) * max_points * max_id;
        assert!(ts.cases.len() <= bound);
    }

    #[test]
    fn suite_is_deterministic() {
        let m = closed_a();
        assert_eq!(generate_suite(&m).unwrap(), generate_suite(&m).unwrap());
    }

    #[test]
    fn degenerate_single_state_suite() {
        let m = delta_closure(
            &Iots::builder("x")
                .inputs(["a"])
                .outputs(["0"])
                .initial("s")
                .trans("s", "a", "q")
                .trans("q", "0", "s")
                .build()
                .unwrap(),
        )
        .unwrap();
        let ts = generate_suite(&m).unwrap();
        // Z case: δ alone; V case: a 0 δ
        assert_eq!(ts.cases.len(), 2);
        assert!(ts.cases.iter().all(|c| c.provenance.identifier == "Wd(s)"));
    }

    #[test]
    fn quasi_stable_initial_state_is_rejected() {
        let open = Iots::builder("x")
            .inputs(["a"])
            .outputs(["0"])
            .initial("s")
            .trans("s", "a", "t")
            .trans("s", "0", "t")
            .trans("t", "a", "s")
            .build()
            .unwrap();
        let m = delta_closure(&open).unwrap();
        assert_eq!(generate_suite(&m), Err(Error::InitialNotStable(sid("s"))));
    }

    #[test]
    fn dedup_keeps_fail_trace_union() {
        let m = closed_a();
        let parts = suite_parts(&m).unwrap();
        let ts = generate_suite(&m).unwrap();
        let kept: BTreeSet<Trace> = ts.cases.iter().flat_map(|c| c.case.fail_traces()).collect();
        // rebuild without dedup
        let mut all = BTreeSet::new();
        for p in &parts.state_cover {
            for w in &parts.identifiers[&p.target] {
                let u = chain(&p.machine, &p.target, &w.machine).unwrap();
                all.extend(complete_test_case(&u).unwrap().fail_traces());
            }
        }
        for e in &parts.transition_cover {
            for (n, t) in &e.identification_points {
                for w in &parts.identifiers[t] {
                    let u = chain(&truncate_at(&e.machine, n).unwrap(), n, &w.machine).unwrap();
                    all.extend(complete_test_case(&u).unwrap().fail_traces());
                }
            }
        }
        assert_eq!(kept, all);
    }
}
