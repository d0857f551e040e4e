use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::serialize_iots;
use crate::model::{delta_closure, rebase, strip_quiescence, validate, Iots, Property, Transition};
use crate::relations::is_input_state_minimal;

/// Hard cap on raw candidates examined by [`enumerate_fault_domain`].
pub const CANDIDATE_LIMIT: usize = 10_000_000;

/// Single-edit mutation operators on the machine without δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    /// Redirect one transition to another existing state.
    Retarget,
    /// Relabel an output transition with an output not yet enabled there.
    OutputSwap,
    /// Drop an output transition from a state that keeps another action.
    OutputDelete,
    /// Add an output transition to any state.
    OutputAdd,
    /// Split `s -a-> t` into `s -a-> n -o-> t` with a fresh state `n`.
    InsertState,
}

impl Operator {
    pub const ALL: [Operator; 5] = [
        Operator::Retarget,
        Operator::OutputSwap,
        Operator::OutputDelete,
        Operator::OutputAdd,
        Operator::InsertState,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Retarget => "retarget",
            Operator::OutputSwap => "swap",
            Operator::OutputDelete => "delete",
            Operator::OutputAdd => "add",
            Operator::InsertState => "insert",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operator::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown mutation operator `{s}`")))
    }
}

/// Bounded fault domain around a base specification: valid machines with at
/// most `k` input states, at most `max_states` states, input-state-minimal,
/// reachable from the base by at most `max_edits` operator applications.
#[derive(Clone, Debug)]
pub struct FaultDomainSpec {
    pub base: Iots,
    pub k: usize,
    pub max_states: usize,
    pub max_edits: usize,
    pub operators: BTreeSet<Operator>,
    /// Maximum number of mutants kept; larger domains are sampled.
    pub budget: usize,
    pub seed: u64,
}

impl FaultDomainSpec {
    /// All operators, two edits, two extra states, `k` = input states of the
    /// base, budget 100 000.
    pub fn new(base: &Iots) -> Self {
        FaultDomainSpec {
            base: base.clone(),
            k: base.input_states().len(),
            max_states: base.states().len() + 2,
            max_edits: 2,
            operators: Operator::ALL.into_iter().collect(),
            budget: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutant {
    /// Position in the canonical order of the whole domain (`m0001`, ...).
    pub id: String,
    /// Closed, canonically named machine.
    pub machine: Iots,
    /// First 16 hex digits of the SHA-256 of the canonical text.
    pub hash: String,
    /// One shortest edit sequence from the base.
    pub edits: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultDomain {
    pub mutants: Vec<Mutant>,
    /// Raw candidates examined.
    pub candidates: usize,
    /// Distinct members found before sampling.
    pub members: usize,
    pub sampled: bool,
    /// The candidate limit was hit before the edit bound was exhausted.
    pub partial: bool,
}

fn neighbours(m: &Iots, ops: &BTreeSet<Operator>, max_states: usize) -> Vec<(String, Iots)> {
    let base: Vec<Transition> = m.transitions().collect();
    let outputs = m.output_actions();
    let mut out = Vec::new();
    let mut push = |desc: String, ts: Vec<Transition>, extra: Option<crate::model::StateId>| {
        let mut parts = m.to_parts();
        parts.transitions = ts;
        if let Some(n) = extra {
            parts.states.insert(n);
        }
        if let Ok(c) = Iots::from_parts(parts) {
            out.push((desc, c));
        }
    };
    for (i, t) in base.iter().enumerate() {
        let (s, a) = (&t.source, &t.label);
        if ops.contains(&Operator::Retarget) {
            for u in m.states().iter().filter(|u| *u != &t.target) {
                let mut ts = base.clone();
                ts[i].target = u.clone();
                push(format!("retarget({s},{a},{}->{u})", t.target), ts, None);
            }
        }
        if a.is_output() {
            if ops.contains(&Operator::OutputSwap) {
                let here = m.out(s);
                for o in outputs.iter().filter(|o| !here.contains(o)) {
                    let mut ts = base.clone();
                    ts[i].label = o.clone();
                    push(format!("swap({s},{a}->{o},{})", t.target), ts, None);
                }
            }
            if ops.contains(&Operator::OutputDelete) && m.init(s).len() > 1 {
                let mut ts = base.clone();
                ts.remove(i);
                push(format!("delete({s},{a},{})", t.target), ts, None);
            }
        }
        if ops.contains(&Operator::InsertState) && m.states().len() < max_states {
            let n = m.fresh_state("n");
            for o in &outputs {
                let mut ts = base.clone();
                ts[i].target = n.clone();
                ts.push(Transition::new(n.clone(), o.clone(), t.target.clone()));
                push(format!("insert({s},{a},{n},{o},{})", t.target), ts, Some(n.clone()));
            }
        }
    }
    if ops.contains(&Operator::OutputAdd) {
        for s in m.states() {
            let here = m.out(s);
            for o in outputs.iter().filter(|o| !here.contains(o)) {
                for u in m.states() {
                    let mut ts = base.clone();
                    ts.push(Transition::new(s.clone(), o.clone(), u.clone()));
                    push(format!("add({s},{o},{u})"), ts, None);
                }
            }
        }
    }
    out
}

/// Canonical closed form of a raw candidate, if it belongs to the domain.
fn admit(raw: &Iots, fd: &FaultDomainSpec) -> Result<Option<(String, Iots)>> {
    let m = rebase(raw, raw.initial())?;
    if m.states().len() > fd.max_states || !validate(&m, &Property::MEMBERSHIP).ok() {
        return Ok(None);
    }
    let closed = delta_closure(&m)?;
    if closed.input_states().len() > fd.k || !is_input_state_minimal(&closed)?.minimal {
        return Ok(None);
    }
    let canon = closed.canonical("q").with_name("mutant");
    Ok(Some((serialize_iots(&canon), canon)))
}

pub(crate) fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)[..16].to_owned()
}

/// Enumerates the fault domain breadth-first by edit count. Members are
/// deduplicated up to state renaming and listed by (edit count, canonical
/// text); when more than `budget` remain, a uniform sample seeded by `seed`
/// is kept (in the same order).
pub fn enumerate_fault_domain(fd: &FaultDomainSpec) -> Result<FaultDomain> {
    let base = if fd.base.is_quiescent() {
        strip_quiescence(&fd.base)
    } else {
        fd.base.clone()
    };
    let mut found: BTreeMap<String, (usize, Vec<String>, Iots)> = BTreeMap::new();
    let mut seen_raw: HashSet<String> = HashSet::from([serialize_iots(&base)]);
    if let Some((text, m)) = admit(&base, fd)? {
        found.insert(text, (0, Vec::new(), m));
    }
    let mut candidates = 0usize;
    let mut partial = false;
    let mut frontier = vec![(base, Vec::<String>::new())];
    'levels: for level in 1..=fd.max_edits {
        let mut next = Vec::new();
        for (m, edits) in &frontier {
            for (desc, cand) in neighbours(m, &fd.operators, fd.max_states) {
                candidates += 1;
                if candidates > CANDIDATE_LIMIT {
                    partial = true;
                    break 'levels;
                }
                if !seen_raw.insert(serialize_iots(&cand)) {
                    continue;
                }
                let mut path = edits.clone();
                path.push(desc);
                if let Some((text, canon)) = admit(&cand, fd)? {
                    found.entry(text).or_insert_with(|| (level, path.clone(), canon));
                }
                next.push((cand, path));
            }
        }
        frontier = next;
    }

    let mut members: Vec<(usize, String, Vec<String>, Iots)> = found
        .into_iter()
        .map(|(text, (n, edits, m))| (n, text, edits, m))
        .collect();
    members.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let width = members.len().to_string().len().max(4);
    let all: Vec<Mutant> = members
        .into_iter()
        .enumerate()
        .map(|(i, (_, text, edits, m))| {
            let id = format!("m{:0width$}", i + 1);
            Mutant {
                hash: short_hash(&text),
                machine: m.with_name(id.clone()),
                id,
                edits,
            }
        })
        .collect();
    let total = all.len();
    let (mutants, sampled) = if total > fd.budget {
        let mut rng = ChaCha8Rng::seed_from_u64(fd.seed);
        let mut pick = sample(&mut rng, total, fd.budget).into_vec();
        pick.sort_unstable();
        (pick.into_iter().map(|i| all[i].clone()).collect(), true)
    } else {
        (all, false)
    };
    Ok(FaultDomain {
        mutants,
        candidates,
        members: total,
        sampled,
        partial,
    })
}
