use std::fmt::{self, Write};

use rayon::prelude::*;

use super::fault::{enumerate_fault_domain, FaultDomain, FaultDomainSpec, Mutant};
use super::{coverage_gap, run_verdict, simulate_input_eager};
use crate::error::Result;
use crate::format::serialize_iots;
use crate::model::{Iots, Trace};
use crate::relations::{check_input_state_homeomorphic, ioco_check};
use crate::testgen::TestSuite;

/// Outcome of the suite and the ioco check on one mutant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutantRecord {
    pub id: String,
    pub hash: String,
    pub edits: Vec<String>,
    pub conforms: bool,
    pub counterexample: Option<String>,
    pub suite_passed: bool,
    pub first_failing: Option<String>,
    pub witness: Option<Trace>,
    /// Cases where the eager simulation and the intersection verdict differ.
    pub eager_disagreements: Vec<String>,
    /// Passing cases with a pass trace the mutant cannot perform.
    pub coverage_gaps: Vec<String>,
    /// Homeomorphism diagnostic, attached to soundness violations and escapes.
    pub homeomorphism: Option<String>,
    /// Serialized mutant, attached to soundness violations and escapes.
    pub serialized: Option<String>,
}

impl MutantRecord {
    pub fn is_violation(&self) -> bool {
        self.conforms != self.suite_passed
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExperimentReport {
    pub spec: String,
    pub cases: usize,
    pub records: Vec<MutantRecord>,
    pub conforming_pass: usize,
    /// Soundness violations.
    pub conforming_fail: usize,
    pub nonconforming_fail: usize,
    /// Exhaustiveness escapes.
    pub nonconforming_pass: usize,
    pub candidates: usize,
    pub members: usize,
    pub sampled: bool,
    pub partial: bool,
}

impl ExperimentReport {
    /// (mutant, case) pairs on which the two execution semantics disagree.
    pub fn eager_disagreements(&self) -> usize {
        self.records.iter().map(|r| r.eager_disagreements.len()).sum()
    }

    /// Mutants passing the suite that would fail it if a pass trace missing
    /// from the mutant also counted against it.
    pub fn coverage_divergences(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.suite_passed && !r.coverage_gaps.is_empty())
            .count()
    }

    pub fn violations(&self) -> impl Iterator<Item = &MutantRecord> {
        self.records.iter().filter(|r| r.is_violation())
    }

    /// Line-oriented rendering: a header, one record per mutant, a block per
    /// violation and a summary footer.
    pub fn render(&self) -> String {
        let dash = |o: Option<&str>| o.unwrap_or("-").to_owned();
        let list = |v: &[String]| if v.is_empty() { "-".to_owned() } else { v.join(",") };
        let mut out = String::new();
        let _ = writeln!(out, "experiment spec={} cases={}", self.spec, self.cases);
        for r in &self.records {
            let witness = r.witness.as_ref().map(|w| {
                w.iter().map(|a| a.name()).collect::<Vec<_>>().join(".")
            });
            let _ = writeln!(
                out,
                "mutant {} hash={} ioco={} suite={} first-fail={} witness={} eager={} coverage-gaps={} edits={}",
                r.id,
                r.hash,
                if r.conforms { "conforms" } else { "violates" },
                if r.suite_passed { "pass" } else { "fail" },
                dash(r.first_failing.as_deref()),
                dash(witness.as_deref()),
                if r.eager_disagreements.is_empty() { "agree".to_owned() } else { list(&r.eager_disagreements) },
                list(&r.coverage_gaps),
                list(&r.edits),
            );
        }
        for r in self.violations() {
            let kind = if r.conforms { "soundness" } else { "escape" };
            let _ = writeln!(out, "{kind} {}", r.id);
            if let Some(c) = &r.counterexample {
                let _ = writeln!(out, "  ioco-counterexample {c}");
            }
            if let Some(h) = &r.homeomorphism {
                let _ = writeln!(out, "  homeomorphism {h}");
            }
            for line in r.serialized.iter().flat_map(|s| s.lines()) {
                let _ = writeln!(out, "  | {line}");
            }
        }
        let yn = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(
            out,
            "summary mutants={} conforming-pass={} conforming-fail={} nonconforming-fail={} nonconforming-pass={} candidates={} members={} sampled={} partial={} eager-disagreements={} coverage-divergences={}",
            self.records.len(),
            self.conforming_pass,
            self.conforming_fail,
            self.nonconforming_fail,
            self.nonconforming_pass,
            self.candidates,
            self.members,
            yn(self.sampled),
            yn(self.partial),
            self.eager_disagreements(),
            self.coverage_divergences(),
        );
        out
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn examine(spec: &Iots, ts: &TestSuite, m: &Mutant) -> Result<MutantRecord> {
    let imp = &m.machine;
    let verdict = ioco_check(imp, spec)?;
    let mut first = None;
    let mut eager_disagreements = Vec::new();
    let mut coverage_gaps = Vec::new();
    for c in &ts.cases {
        let r = run_verdict(imp, &c.case)?;
        let e = simulate_input_eager(imp, &c.case)?;
        if e.verdict != r.verdict {
            eager_disagreements.push(c.id.clone());
        }
        if r.passed() {
            if coverage_gap(imp, &c.case)?.is_some() {
                coverage_gaps.push(c.id.clone());
            }
        } else if first.is_none() {
            first = Some((c.id.clone(), r.witness));
        }
    }
    let suite_passed = first.is_none();
    let violation = verdict.conforms != suite_passed;
    let homeomorphism = if violation {
        Some(match check_input_state_homeomorphic(imp, spec) {
            Ok(Some(map)) => {
                let pairs: Vec<String> = map.iter().map(|(p, s)| format!("{p}->{s}")).collect();
                format!("yes {}", pairs.join(","))
            }
            Ok(None) => "no".to_owned(),
            Err(e) => format!("unchecked ({e})"),
        })
    } else {
        None
    };
    let (first_failing, witness) = first.map_or((None, None), |(id, w)| (Some(id), w));
    Ok(MutantRecord {
        id: m.id.clone(),
        hash: m.hash.clone(),
        edits: m.edits.clone(),
        conforms: verdict.conforms,
        counterexample: verdict.counterexample.map(|c| c.to_string()),
        suite_passed,
        first_failing,
        witness,
        eager_disagreements,
        coverage_gaps,
        homeomorphism,
        serialized: violation.then(|| serialize_iots(imp)),
    })
}

/// Runs the suite and the ioco check on every mutant of an enumerated domain
/// (in parallel; the record order is the domain order).
pub fn run_experiment(spec: &Iots, ts: &TestSuite, domain: &FaultDomain) -> Result<ExperimentReport> {
    let records: Vec<MutantRecord> = domain
        .mutants
        .par_iter()
        .map(|m| examine(spec, ts, m))
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport {
        spec: spec.name().to_owned(),
        cases: ts.cases.len(),
        candidates: domain.candidates,
        members: domain.members,
        sampled: domain.sampled,
        partial: domain.partial,
        ..Default::default()
    };
    for r in &records {
        match (r.conforms, r.suite_passed) {
            (true, true) => report.conforming_pass += 1,
            (true, false) => report.conforming_fail += 1,
            (false, false) => report.nonconforming_fail += 1,
            (false, true) => report.nonconforming_pass += 1,
        }
    }
    report.records = records;
    Ok(report)
}

/// Enumerates `fd` and runs [`run_experiment`] over it.
pub fn completeness_experiment(spec: &Iots, ts: &TestSuite, fd: &FaultDomainSpec) -> Result<ExperimentReport> {
    let domain = enumerate_fault_domain(fd)?;
    run_experiment(spec, ts, &domain)
}
