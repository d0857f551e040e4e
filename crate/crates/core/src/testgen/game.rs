//! Reachability game shared by preamble and separator construction.
//!
//! The tester picks inputs, the machine picks outputs. A position's rank is
//! the length of the longest play the tester must tolerate before reaching a
//! target, under the best tester choice. Observation is only a choice where
//! some output is enabled, and a δ self-loop makes it worthless.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{Action, Iots, IotsParts, StateId, Transition};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Move {
    Observe,
    Input(Action),
}

#[derive(Clone, Debug)]
pub(crate) struct Strategy {
    pub rank: BTreeMap<StateId, usize>,
    pub choice: BTreeMap<StateId, Move>,
}

impl Strategy {
    pub fn wins(&self, s: &StateId) -> bool {
        self.rank.contains_key(s)
    }
}

const INF: usize = usize::MAX;

fn value(m: &Iots, rank: &BTreeMap<StateId, usize>, u: &StateId, mv: &Move) -> usize {
    let r = |t: &StateId| rank.get(t).copied().unwrap_or(INF);
    match mv {
        Move::Observe => {
            let mut worst = 0;
            for o in m.out(u) {
                let t = m.step(u, &o).expect("enabled output");
                worst = worst.max(r(t));
            }
            worst.saturating_add(1)
        }
        Move::Input(x) => r(m.step(u, x).expect("enabled input")).saturating_add(1),
    }
}

/// Moves at `u` in tie-breaking order: observation first, then inputs by name.
fn moves(m: &Iots, u: &StateId) -> Vec<Move> {
    let mut v = Vec::new();
    if !m.out(u).is_empty() {
        v.push(Move::Observe);
    }
    v.extend(m.inp(u).into_iter().map(Move::Input));
    v
}

/// Solves the game by relaxation from infinity.
pub(crate) fn solve(m: &Iots, targets: &BTreeSet<StateId>) -> Strategy {
    let mut rank: BTreeMap<StateId, usize> = targets.iter().map(|t| (t.clone(), 0)).collect();
    let others: Vec<&StateId> = m.states().iter().filter(|s| !targets.contains(*s)).collect();
    loop {
        let mut changed = false;
        for u in &others {
            let best = moves(m, u)
                .iter()
                .map(|mv| value(m, &rank, u, mv))
                .min()
                .unwrap_or(INF);
            if best < rank.get(*u).copied().unwrap_or(INF) {
                rank.insert((*u).clone(), best);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut choice = BTreeMap::new();
    for u in others {
        let Some(&r) = rank.get(u) else { continue };
        let mv = moves(m, u)
            .into_iter()
            .find(|mv| value(m, &rank, u, mv) == r)
            .expect("finite rank is attained by some move");
        choice.insert(u.clone(), mv);
    }
    Strategy { rank, choice }
}

/// The submachine visited when following `strategy` from the initial state.
/// Targets become sinks.
pub(crate) fn prune(m: &Iots, strategy: &Strategy, name: &str) -> Iots {
    let mut seen = BTreeSet::from([m.initial().clone()]);
    let mut queue = VecDeque::from([m.initial().clone()]);
    let mut transitions = Vec::new();
    while let Some(u) = queue.pop_front() {
        let kept: Vec<(Action, StateId)> = match strategy.choice.get(&u) {
            None => Vec::new(),
            Some(Move::Observe) => m
                .out(&u)
                .into_iter()
                .map(|o| {
                    let t = m.step(&u, &o).expect("enabled output").clone();
                    (o, t)
                })
                .collect(),
            Some(Move::Input(x)) => vec![(x.clone(), m.step(&u, x).expect("enabled input").clone())],
        };
        for (a, t) in kept {
            if seen.insert(t.clone()) {
                queue.push_back(t.clone());
            }
            transitions.push(Transition::new(u.clone(), a, t));
        }
    }
    let parts = IotsParts {
        name: name.to_owned(),
        initial: m.initial().clone(),
        inputs: m.inputs().clone(),
        outputs: m.outputs().clone(),
        quiescent: m.is_quiescent(),
        states: seen,
        transitions,
    };
    Iots::from_parts(parts).expect("pruning keeps a machine valid")
}
