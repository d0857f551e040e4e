//! Running test cases against implementation models.
//!
//! Verdicts are decided on the synchronous intersection of implementation
//! and test case: a case fails iff its `fail` state is reachable there.
//! [`simulate_input_eager`] replays the same run operationally, with a
//! one-slot input queue. [`enumerate_fault_domain`] and
//! [`completeness_experiment`] check a suite against every mutant of a
//! bounded neighbourhood of the specification.

mod eager;
mod experiment;
mod fault;

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{intersection, Iots, Trace};
use crate::testgen::{TestCase, TestSuite};

pub use eager::{simulate_input_eager, EagerRun, EagerStep, InputQueue};
pub use experiment::{completeness_experiment, run_experiment, ExperimentReport, MutantRecord};
pub use fault::{
    enumerate_fault_domain, FaultDomain, FaultDomainSpec, Mutant, Operator, CANDIDATE_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RunVerdict {
    Pass,
    Fail,
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunVerdict::Pass => "pass",
            RunVerdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub verdict: RunVerdict,
    /// Shortlex-least trace of the intersection reaching `fail`.
    pub witness: Option<Trace>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.verdict == RunVerdict::Pass
    }
}

fn require_runnable(implementation: &Iots, tc: &TestCase) -> Result<()> {
    if !implementation.is_quiescent() {
        return Err(Error::NotClosed);
    }
    if !implementation.same_alphabet(&tc.machine) {
        return Err(Error::AlphabetMismatch);
    }
    Ok(())
}

/// Runs one test case: fail iff the intersection reaches the fail state.
pub fn run_verdict(implementation: &Iots, tc: &TestCase) -> Result<RunOutcome> {
    require_runnable(implementation, tc)?;
    let prod = intersection(implementation, &tc.machine)?;
    let witness = prod
        .product
        .reachable_with_access(prod.product.initial())
        .into_iter()
        .find(|(q, _)| prod.right(q) == Some(&tc.fail))
        .map(|(_, t)| t);
    Ok(RunOutcome {
        verdict: if witness.is_some() {
            RunVerdict::Fail
        } else {
            RunVerdict::Pass
        },
        witness,
    })
}

/// Shortlex-least pass trace of `tc` that the implementation cannot
/// perform, if any. `None` means `Tr_pass(tc) ⊆ Tr(implementation)`.
pub fn coverage_gap(implementation: &Iots, tc: &TestCase) -> Result<Option<Trace>> {
    require_runnable(implementation, tc)?;
    let m = &tc.machine;
    let mut queue = VecDeque::from([(m.initial().clone(), implementation.initial().clone(), Vec::new())]);
    while let Some((n, p, t)) = queue.pop_front() {
        for (a, n2) in m.enabled(&n) {
            if n2 == &tc.fail {
                continue;
            }
            let mut next = t.clone();
            next.push(a.clone());
            match implementation.step(&p, a) {
                Some(p2) => queue.push_back((n2.clone(), p2.clone(), next)),
                None => return Ok(Some(next)),
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub id: String,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SuiteOutcome {
    pub results: Vec<CaseResult>,
}

impl SuiteOutcome {
    /// True for an empty suite.
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.outcome.passed())
    }

    pub fn failing(&self) -> impl Iterator<Item = &CaseResult> {
        self.results.iter().filter(|r| !r.outcome.passed())
    }
}

pub fn run_suite(implementation: &Iots, ts: &TestSuite) -> Result<SuiteOutcome> {
    let results = ts
        .cases
        .iter()
        .map(|c| {
            Ok(CaseResult {
                id: c.id.clone(),
                outcome: run_verdict(implementation, &c.case)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SuiteOutcome { results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{delta_closure, format_trace, Action, StateId};
    use crate::samples::{spec_a, spec_a_builder};
    use crate::testgen::generate_suite;

    fn closed_spec() -> Iots {
        delta_closure(&spec_a()).unwrap()
    }

    fn q2_retarget() -> Iots {
        let mut parts = spec_a().to_parts();
        for t in &mut parts.transitions {
            if t.source.as_str() == "q2" {
                t.target = StateId::new("s2");
            }
        }
        delta_closure(&Iots::from_parts(parts).unwrap()).unwrap()
    }

    #[test]
    fn spec_passes_its_suite() {
        let s = closed_spec();
        let ts = generate_suite(&s).unwrap();
        let out = run_suite(&s, &ts).unwrap();
        assert!(out.passed());
        assert_eq!(out.results.len(), ts.cases.len());
    }

    #[test]
    fn q2_retarget_fails_the_observing_case() {
        let ts = generate_suite(&closed_spec()).unwrap();
        let m = q2_retarget();
        let out = run_suite(&m, &ts).unwrap();
        let failing: Vec<_> = out.failing().map(|r| r.id.as_str()).collect();
        assert!(!failing.is_empty());
        // the case chaining C_s2, the b-cover of s2 and W^δ(s1)
        let tc = ts
            .cases
            .iter()
            .find(|c| c.provenance.cover == "V:s2:b" && c.provenance.identifier == "Wd(s1)")
            .unwrap();
        let r = run_verdict(&m, &tc.case).unwrap();
        assert_eq!(r.verdict, RunVerdict::Fail);
        assert_eq!(format_trace(r.witness.as_ref().unwrap()), "a 0 b 0 1");
    }

    #[test]
    fn witness_reaches_fail_by_hand() {
        let spec = delta_closure(&spec_a()).unwrap();
        let ts = generate_suite(&spec).unwrap();
        for c in &ts.cases {
            let r = run_verdict(&q2_retarget(), &c.case).unwrap();
            if let Some(w) = &r.witness {
                assert_eq!(c.case.machine.after(c.case.machine.initial(), w), Some(c.case.fail.clone()));
                assert!(q2_retarget().is_trace(q2_retarget().initial(), w));
            }
        }
    }

    #[test]
    fn empty_suite_passes() {
        let ts = TestSuite {
            name: "empty".into(),
            params: Default::default(),
            cases: vec![],
        };
        assert!(run_suite(&q2_retarget(), &ts).unwrap().passed());
    }

    #[test]
    fn missing_optional_output_is_a_coverage_gap_only() {
        // q1 keeps only output 0
        let parts = {
            let mut p = spec_a().to_parts();
            p.transitions.retain(|t| !(t.source.as_str() == "q1" && t.label == Action::output("1")));
            p
        };
        let m = delta_closure(&Iots::from_parts(parts).unwrap()).unwrap();
        let ts = generate_suite(&closed_spec()).unwrap();
        assert!(run_suite(&m, &ts).unwrap().passed());
        let gaps = ts
            .cases
            .iter()
            .filter(|c| coverage_gap(&m, &c.case).unwrap().is_some())
            .count();
        assert!(gaps > 0);
        assert_eq!(coverage_gap(&closed_spec(), &ts.cases[0].case).unwrap(), None);
    }

    #[test]
    fn open_or_mismatched_implementation_is_rejected() {
        let ts = generate_suite(&closed_spec()).unwrap();
        let tc = &ts.cases[0].case;
        assert_eq!(run_verdict(&spec_a(), tc), Err(Error::NotClosed));
        let other = delta_closure(&spec_a_builder().inputs(["a", "b", "c"]).build().unwrap()).unwrap();
        assert_eq!(run_verdict(&other, tc), Err(Error::AlphabetMismatch));
    }
}
