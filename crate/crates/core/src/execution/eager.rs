use std::fmt;

use super::{require_runnable, RunVerdict};
use crate::error::{Error, Result};
use crate::model::{format_trace, Action, Iots, StateId, Trace};
use crate::testgen::TestCase;

/// Input queue between tester and implementation. Holds at most one input:
/// tests are single-input and wait for the implementation between inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InputQueue {
    pending: Option<Action>,
}

impl InputQueue {
    pub fn push(&mut self, x: Action) -> Result<()> {
        if self.pending.is_some() {
            return Err(Error::QueueOverflow);
        }
        self.pending = Some(x);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<Action> {
        self.pending.take()
    }

    pub fn peek(&self) -> Option<&Action> {
        self.pending.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_none()
    }
}

/// One action fired by the implementation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EagerStep {
    /// Queue contents just before the action fired.
    pub queue: Option<Action>,
    pub state: StateId,
    pub fired: Action,
}

impl fmt::Display for EagerStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.queue.as_ref().map_or("-", Action::name);
        write!(f, "[{q}] {} --{}-->", self.state, self.fired)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EagerRun {
    /// Schedule of the first failing run, or of the first run when none fails.
    pub schedule: Vec<EagerStep>,
    pub verdict: RunVerdict,
    /// Number of complete runs explored (one per resolution of output choices).
    pub runs: usize,
    /// Runs that stopped with an input pending at an output state of the
    /// implementation.
    pub blocked: usize,
}

impl EagerRun {
    /// The fired actions of the reported schedule.
    pub fn trace(&self) -> Trace {
        self.schedule.iter().map(|s| s.fired.clone()).collect()
    }
}

impl fmt::Display for EagerRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} [{}]", self.verdict, format_trace(&self.trace()))?;
        for s in &self.schedule {
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

struct Explorer<'a> {
    imp: &'a Iots,
    tc: &'a TestCase,
    runs: usize,
    blocked: usize,
    first: Option<Vec<EagerStep>>,
    failing: Option<Vec<EagerStep>>,
}

impl Explorer<'_> {
    fn finish(&mut self, schedule: &[EagerStep], verdict: RunVerdict) {
        self.runs += 1;
        if self.first.is_none() {
            self.first = Some(schedule.to_vec());
        }
        if verdict == RunVerdict::Fail && self.failing.is_none() {
            self.failing = Some(schedule.to_vec());
        }
    }

    fn explore(
        &mut self,
        p: &StateId,
        n: &StateId,
        mut queue: InputQueue,
        schedule: &mut Vec<EagerStep>,
    ) -> Result<()> {
        let m = &self.tc.machine;
        if n == &self.tc.fail {
            self.finish(schedule, RunVerdict::Fail);
            return Ok(());
        }
        // the tester sends as soon as the case asks for an input
        if queue.is_empty() {
            if let Some(x) = m.inp(n).into_iter().next() {
                queue.push(x.clone())?;
                let n2 = m.step(n, &x).expect("enabled input").clone();
                return self.explore(p, &n2, queue, schedule);
            }
        }
        if let Some(x) = queue.peek().cloned() {
            // input-eager: a pending input beats any output of the state
            if let Some(p2) = self.imp.step(p, &x) {
                schedule.push(EagerStep {
                    queue: Some(x.clone()),
                    state: p.clone(),
                    fired: x,
                });
                queue.pop();
                let p2 = p2.clone();
                self.explore(&p2, n, queue, schedule)?;
                schedule.pop();
                return Ok(());
            }
            // an output state cannot take the input: the intersection has
            // no continuation here either
            self.blocked += 1;
            return Ok(());
        }
        if m.is_sink(n) {
            self.finish(schedule, RunVerdict::Pass);
            return Ok(());
        }
        for o in self.imp.out(p) {
            let p2 = self.imp.step(p, &o).expect("enabled output").clone();
            let Some(n2) = m.step(n, &o) else {
                // outside the test alphabet at this point: nothing observable
                self.blocked += 1;
                continue;
            };
            let n2 = n2.clone();
            schedule.push(EagerStep {
                queue: None,
                state: p.clone(),
                fired: o,
            });
            self.explore(&p2, &n2, InputQueue::default(), schedule)?;
            schedule.pop();
        }
        Ok(())
    }
}

/// Executes `tc` against `implementation` under input-eager semantics,
/// exploring every resolution of the implementation's output choices. The
/// tester enqueues an input as soon as the case offers one; the
/// implementation consumes a queued input at any input state, and otherwise
/// fires one of its outputs (δ at stable states). The verdict is fail iff
/// some run reaches the fail state.
pub fn simulate_input_eager(implementation: &Iots, tc: &TestCase) -> Result<EagerRun> {
    require_runnable(implementation, tc)?;
    let mut ex = Explorer {
        imp: implementation,
        tc,
        runs: 0,
        blocked: 0,
        first: None,
        failing: None,
    };
    ex.explore(
        implementation.initial(),
        tc.machine.initial(),
        InputQueue::default(),
        &mut Vec::new(),
    )?;
    let verdict = if ex.failing.is_some() {
        RunVerdict::Fail
    } else {
        RunVerdict::Pass
    };
    Ok(EagerRun {
        schedule: ex.failing.or(ex.first).unwrap_or_default(),
        verdict,
        runs: ex.runs,
        blocked: ex.blocked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::execution::run_verdict;
    use crate::model::delta_closure;
    use crate::samples::spec_a;
    use crate::testgen::{complete_test_case, generate_suite};

    fn sid(s: &str) -> StateId {
        StateId::new(s)
    }

    #[test]
    fn queue_holds_one_input() {
        let mut q = InputQueue::default();
        q.push(Action::input("a")).unwrap();
        assert_eq!(q.push(Action::input("b")), Err(Error::QueueOverflow));
        assert_eq!(q.pop(), Some(Action::input("a")));
        assert!(q.is_empty());
    }

    #[test]
    fn queued_input_beats_output_at_quasi_stable_state() {
        // spec_a rebased to s2: the test sends b and expects 0
        let spec = delta_closure(&spec_a()).unwrap();
        let imp = crate::model::rebase(&spec, &sid("s2")).unwrap();
        let u = Iots::builder("u")
            .inputs(["a", "b"])
            .outputs(["0", "1"])
            .quiescent(true)
            .initial("t0")
            .trans("t0", "b", "t1")
            .trans("t1", "0", "t2")
            .build()
            .unwrap();
        let tc = complete_test_case(&u).unwrap();
        let run = simulate_input_eager(&imp, &tc).unwrap();
        assert_eq!(run.schedule[0].fired, Action::input("b"));
        assert_eq!(run.schedule[0].state, sid("s2"));
        assert_eq!(run.schedule[0].queue, Some(Action::input("b")));
        assert_eq!(run.verdict, RunVerdict::Pass);
        assert_eq!(run.trace(), vec![Action::input("b"), Action::output("0")]);
    }

    #[test]
    fn stable_state_fires_delta() {
        let spec = delta_closure(&spec_a()).unwrap();
        let u = Iots::builder("u")
            .inputs(["a", "b"])
            .outputs(["0", "1"])
            .quiescent(true)
            .initial("t0")
            .trans("t0", "delta", "t1")
            .build()
            .unwrap();
        let tc = complete_test_case(&u).unwrap();
        let run = simulate_input_eager(&spec, &tc).unwrap();
        assert_eq!(run.trace(), vec![Action::Quiescence]);
        assert_eq!(run.schedule[0].queue, None);
        assert_eq!(run.verdict, RunVerdict::Pass);
    }

    #[test]
    fn agrees_with_intersection_on_the_suite() {
        let spec = delta_closure(&spec_a()).unwrap();
        let ts = generate_suite(&spec).unwrap();
        let mut parts = spec_a().to_parts();
        for t in &mut parts.transitions {
            if t.source.as_str() == "q2" {
                t.target = sid("s2");
            }
        }
        let mutant = delta_closure(&Iots::from_parts(parts).unwrap()).unwrap();
        let mut fails = 0;
        for imp in [&spec, &mutant] {
            for c in &ts.cases {
                let e = simulate_input_eager(imp, &c.case).unwrap();
                let r = run_verdict(imp, &c.case).unwrap();
                assert_eq!(e.verdict, r.verdict, "{}", c.id);
                if e.verdict == RunVerdict::Fail {
                    fails += 1;
                    let t = e.trace();
                    assert_eq!(c.case.machine.after(c.case.machine.initial(), &t), Some(c.case.fail.clone()));
                }
            }
        }
        assert!(fails > 0);
    }
}
