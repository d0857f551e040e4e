use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ioco_core::execution::{
    completeness_experiment, run_verdict, simulate_input_eager, FaultDomainSpec, Operator,
};
use ioco_core::format::{export_dot, parse_iots, read_suite, write_suite};
use ioco_core::model::{delta_closure, format_trace, validate, Property};
use ioco_core::relations::ioco_check;
use ioco_core::testgen::{generate_suite, suite_parts, TestSuite};
use ioco_core::{Error, Iots};

#[derive(Parser)]
#[command(name = "iocogen", version, about = "Complete ioco test suites for input/output transition systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model against the specification-class properties.
    Validate { model: PathBuf },
    /// Generate a test suite bundle from a specification.
    Generate {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide `impl ioco spec`.
    CheckIoco { implementation: PathBuf, spec: PathBuf },
    /// Run a suite bundle against an implementation model.
    Run {
        implementation: PathBuf,
        suite: PathBuf,
        /// Run only this case.
        #[arg(long)]
        case: Option<String>,
        /// Also print the input-eager schedule of failing cases.
        #[arg(long)]
        eager: bool,
    },
    /// Check a suite against every mutant of a bounded fault domain.
    Experiment(ExperimentArgs),
    /// Render a model, or one case of a suite bundle, as Graphviz DOT.
    ExportDot {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Case to render when `path` is a suite bundle (default: the first).
        #[arg(long)]
        case: Option<String>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    spec: PathBuf,
    /// Use this suite bundle instead of generating one.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Maximum input states of a mutant (default: those of the spec).
    #[arg(long)]
    k: Option<usize>,
    /// Maximum states of a mutant (default: spec states + 2).
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long, default_value_t = 2)]
    edits: usize,
    /// Comma-separated subset of retarget,swap,delete,add,insert.
    #[arg(long, value_delimiter = ',')]
    operators: Option<Vec<String>>,
    /// Maximum mutants examined; larger domains are sampled.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status 1 for negative results, 2 for usage, I/O and parse errors.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn negative(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::AlphabetMismatch => Failure::usage(e.to_string()),
            _ => Failure::negative(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Iots, Failure> {
    parse_iots(&read_text(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Loads a model and closes it under quiescence when it is open.
fn load_closed(path: &Path) -> Result<Iots, Failure> {
    let m = load_model(path)?;
    if m.is_quiescent() {
        Ok(m)
    } else {
        Ok(delta_closure(&m)?)
    }
}

fn load_suite(path: &Path) -> Result<TestSuite, Failure> {
    read_suite(&read_text(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())
                .map_err(|e| Failure::usage(e.to_string()))
        }
    }
}

fn cmd_validate(model: &Path) -> CmdResult {
    let m = load_model(model)?;
    let report = validate(&m, &Property::MEMBERSHIP);
    print!("{report}");
    if report.ok() {
        println!("valid");
        Ok(0)
    } else {
        let names: Vec<&str> = report.failures().iter().map(|(p, _)| p.name()).collect();
        println!("invalid: {}", names.join(", "));
        Ok(1)
    }
}

fn cmd_generate(spec: &Path, out: Option<&Path>) -> CmdResult {
    let s = load_closed(spec)?;
    let ts = generate_suite(&s)?;
    let parts = suite_parts(&s)?;
    emit(out, &write_suite(&ts))?;
    let ids: Vec<String> = parts
        .identifiers
        .iter()
        .map(|(st, w)| format!("{st}={}", w.len()))
        .collect();
    let stats = format!(
        "cases={} max-depth={} identifiers: {}",
        ts.cases.len(),
        ts.max_depth(),
        ids.join(" ")
    );
    // keep stdout clean when it carries the bundle
    if out.is_some() {
        println!("{stats}");
    } else {
        eprintln!("{stats}");
    }
    Ok(0)
}

fn cmd_check_ioco(implementation: &Path, spec: &Path) -> CmdResult {
    let i = load_closed(implementation)?;
    let s = load_closed(spec)?;
    let v = ioco_check(&i, &s)?;
    match v.counterexample {
        None => {
            println!("conforms");
            Ok(0)
        }
        Some(c) => {
            println!("does not conform: {c}");
            Ok(1)
        }
    }
}

fn cmd_run(implementation: &Path, suite: &Path, only: Option<&str>, eager: bool) -> CmdResult {
    let i = load_closed(implementation)?;
    let ts = load_suite(suite)?;
    let cases: Vec<_> = match only {
        Some(id) => vec![ts
            .case(id)
            .ok_or_else(|| Failure::usage(format!("no case `{id}` in {}", suite.display())))?],
        None => ts.cases.iter().collect(),
    };
    let mut failing = Vec::new();
    for c in cases {
        let r = run_verdict(&i, &c.case)?;
        match &r.witness {
            None => println!("{} pass", c.id),
            Some(w) => {
                println!("{} fail [{}]", c.id, format_trace(w));
                failing.push(c.id.clone());
                if eager {
                    print!("{}", simulate_input_eager(&i, &c.case)?);
                }
            }
        }
    }
    if failing.is_empty() {
        println!("all cases passed");
        Ok(0)
    } else {
        println!("failing: {}", failing.join(" "));
        Ok(1)
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> CmdResult {
    let s = load_closed(&a.spec)?;
    let ts = match &a.suite {
        Some(p) => load_suite(p)?,
        None => generate_suite(&s)?,
    };
    let mut fd = FaultDomainSpec::new(&s);
    fd.max_edits = a.edits;
    fd.budget = a.budget;
    fd.seed = a.seed;
    if let Some(k) = a.k {
        fd.k = k;
    }
    if let Some(n) = a.max_states {
        fd.max_states = n;
    }
    if let Some(ops) = &a.operators {
        fd.operators = ops
            .iter()
            .filter(|o| !o.is_empty())
            .map(|o| o.parse::<Operator>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let report = completeness_experiment(&s, &ts, &fd)?;
    emit(a.out.as_deref(), &report.render())?;
    if a.out.is_some() {
        println!(
            "mutants={} conforming-fail={} nonconforming-pass={}",
            report.records.len(),
            report.conforming_fail,
            report.nonconforming_pass
        );
    }
    Ok(u8::from(report.conforming_fail + report.nonconforming_pass > 0))
}

fn cmd_export_dot(path: &Path, out: Option<&Path>, case: Option<&str>) -> CmdResult {
    let text = read_text(path)?;
    let is_suite = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("suite ") || l == "suite");
    let dot = if is_suite {
        let ts = read_suite(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let c = match case {
            Some(id) => ts.case(id),
            None => ts.cases.first(),
        }
        .ok_or_else(|| Failure::usage(format!("no such case in {}", path.display())))?;
        let roles = BTreeMap::from([(c.case.fail.clone(), "fail".to_owned())]);
        export_dot(&c.case.machine, &roles)
    } else {
        let m = parse_iots(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        export_dot(&m, &BTreeMap::new())
    };
    emit(out, &dot)?;
    Ok(0)
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Validate { model } => cmd_validate(model),
        Command::Generate { spec, out } => cmd_generate(spec, out.as_deref()),
        Command::CheckIoco { implementation, spec } => cmd_check_ioco(implementation, spec),
        Command::Run {
            implementation,
            suite,
            case,
            eager,
        } => cmd_run(implementation, suite, case.as_deref(), *eager),
        Command::Experiment(a) => cmd_experiment(a),
        Command::ExportDot { path, out, case } => cmd_export_dot(path, out.as_deref(), case.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
