//! Text formats: the line-oriented machine format, suite bundles and DOT.
//!
//! Machine grammar, one directive per line, `#` starts a comment, tokens are
//! `[A-Za-z0-9_]+`:
//!
//! ```text
//! iots NAME
//! inputs a b
//! outputs 0 1
//! quiescence          # optional: the machine is closed under quiescence
//! initial s1
//! state s9            # optional: a state no transition mentions
//! trans SRC LABEL DST
//! ```
//!
//! `delta` may not be declared; as a transition label it denotes quiescence
//! and implies the `quiescence` directive.

mod dot;
mod suite;

pub use dot::export_dot;
pub use suite::{read_suite, write_suite};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Diagnostic, Error, Result};
use crate::model::{Action, Iots, IotsParts, StateId, Transition, DELTA};

pub(crate) struct Line<'a> {
    pub no: usize,
    /// (1-based column, token)
    pub tokens: Vec<(usize, &'a str)>,
}

impl Line<'_> {
    pub fn keyword(&self) -> &str {
        self.tokens[0].1
    }
}

/// Splits into non-empty lines of tokens, comments removed.
pub(crate) fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (j, c) in body.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s + 1, &body[s..j]));
                }
            } else if start.is_none() {
                start = Some(j);
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &body[s..]));
        }
        if !tokens.is_empty() {
            lines.push(Line { no: i + 1, tokens });
        }
    }
    lines
}

pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn diag(line: usize, column: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        column,
        message: message.into(),
    }
}

/// Parses `text` as one machine.
pub fn parse_iots(text: &str) -> Result<Iots> {
    let lines = tokenize(text);
    let mut diags = Vec::new();
    match parse_lines(&lines, &mut diags) {
        Some(m) if diags.is_empty() => Ok(m),
        _ => Err(Error::Parse(diags)),
    }
}

/// Parses machine directives, accumulating diagnostics. Returns a machine
/// only when no diagnostic was added.
pub(crate) fn parse_lines(lines: &[Line<'_>], diags: &mut Vec<Diagnostic>) -> Option<Iots> {
    let before = diags.len();
    let mut name: Option<(usize, String)> = None;
    let mut inputs: Option<(usize, Vec<(usize, &str)>)> = None;
    let mut outputs: Option<(usize, Vec<(usize, &str)>)> = None;
    let mut initial: Option<(usize, StateId)> = None;
    let mut quiescent = false;
    let mut states: BTreeSet<StateId> = BTreeSet::new();
    let mut trans: Vec<(&Line<'_>, &str, &str, &str)> = Vec::new();
    let mut last_line = 0;

    for line in lines {
        last_line = line.no;
        let args = &line.tokens[1..];
        for &(col, tok) in args {
            if !is_token(tok) {
                diags.push(diag(line.no, col, format!("invalid token `{tok}`")));
            }
        }
        let (col0, kw) = line.tokens[0];
        let once = |slot_taken: bool, diags: &mut Vec<Diagnostic>| {
            if slot_taken {
                diags.push(diag(line.no, col0, format!("duplicate `{kw}` line")));
            }
        };
        let arity = |n: usize, diags: &mut Vec<Diagnostic>| -> bool {
            if args.len() != n {
                diags.push(diag(
                    line.no,
                    col0,
                    format!("`{kw}` expects {n} argument(s), got {}", args.len()),
                ));
                false
            } else {
                true
            }
        };
        match kw {
            "iots" => {
                once(name.is_some(), diags);
                if arity(1, diags) {
                    name = Some((line.no, args[0].1.to_owned()));
                }
            }
            "inputs" | "outputs" => {
                for &(col, tok) in args {
                    if tok == DELTA {
                        diags.push(diag(line.no, col, "`delta` is reserved for quiescence"));
                    }
                }
                let slot = if kw == "inputs" { &mut inputs } else { &mut outputs };
                once(slot.is_some(), diags);
                *slot = Some((line.no, args.to_vec()));
            }
            "quiescence" => {
                arity(0, diags);
                quiescent = true;
            }
            "initial" => {
                once(initial.is_some(), diags);
                if arity(1, diags) {
                    initial = Some((line.no, StateId::new(args[0].1)));
                }
            }
            "state" => {
                if arity(1, diags) {
                    states.insert(StateId::new(args[0].1));
                }
            }
            "trans" => {
                if arity(3, diags) {
                    trans.push((line, args[0].1, args[1].1, args[2].1));
                }
            }
            _ => diags.push(diag(line.no, col0, format!("unknown directive `{kw}`"))),
        }
    }

    if name.is_none() {
        diags.push(diag(last_line.max(1), 1, "missing `iots NAME` line"));
    }
    if initial.is_none() {
        diags.push(diag(last_line.max(1), 1, "missing `initial STATE` line"));
    }
    let ins: BTreeSet<String> = inputs
        .iter()
        .flat_map(|(_, v)| v.iter().map(|(_, t)| (*t).to_owned()))
        .collect();
    let outs: BTreeSet<String> = outputs
        .iter()
        .flat_map(|(_, v)| v.iter().map(|(_, t)| (*t).to_owned()))
        .collect();
    if let Some((no, toks)) = &outputs {
        for &(col, t) in toks {
            if ins.contains(t) {
                diags.push(diag(*no, col, format!("`{t}` is declared as input and output")));
            }
        }
    }

    let mut seen: BTreeMap<(StateId, Action), (StateId, usize)> = BTreeMap::new();
    let mut transitions = Vec::new();
    for (line, src, label, dst) in trans {
        let action = if label == DELTA {
            quiescent = true;
            Action::Quiescence
        } else if ins.contains(label) {
            Action::input(label)
        } else if outs.contains(label) {
            Action::output(label)
        } else {
            diags.push(diag(
                line.no,
                line.tokens[2].0,
                format!("label `{label}` is not in the alphabet"),
            ));
            continue;
        };
        let (src, dst) = (StateId::new(src), StateId::new(dst));
        match seen.get(&(src.clone(), action.clone())) {
            Some((other, other_line)) if *other != dst => {
                diags.push(diag(
                    line.no,
                    line.tokens[0].0,
                    format!(
                        "nondeterministic: `trans {src} {label} {dst}` (line {}) conflicts with `trans {src} {label} {other}` (line {other_line})",
                        line.no
                    ),
                ));
                continue;
            }
            Some(_) => continue,
            None => {
                seen.insert((src.clone(), action.clone()), (dst.clone(), line.no));
            }
        }
        transitions.push(Transition::new(src, action, dst));
    }

    if diags.len() > before {
        return None;
    }
    let parts = IotsParts {
        name: name.map(|(_, n)| n).unwrap_or_default(),
        initial: initial.map(|(_, s)| s).unwrap_or_default(),
        inputs: ins,
        outputs: outs,
        quiescent,
        states,
        transitions,
    };
    match Iots::from_parts(parts) {
        Ok(m) => Some(m),
        Err(e) => {
            diags.push(diag(last_line.max(1), 1, e.to_string()));
            None
        }
    }
}

/// Canonical text: fixed directive order, transitions sorted by source,
/// label kind, label name and target.
pub fn serialize_iots(m: &Iots) -> String {
    let mut out = String::new();
    write_machine(m, &mut out);
    out
}

pub(crate) fn write_machine(m: &Iots, out: &mut String) {
    let join = |set: &BTreeSet<String>| {
        set.iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let line = |out: &mut String, kw: &str, rest: &str| {
        out.push_str(kw);
        if !rest.is_empty() {
            out.push(' ');
            out.push_str(rest);
        }
        out.push('\n');
    };
    line(out, "iots", m.name());
    line(out, "inputs", &join(m.inputs()));
    line(out, "outputs", &join(m.outputs()));
    if m.is_quiescent() {
        line(out, "quiescence", "");
    }
    line(out, "initial", m.initial().as_str());
    let mut ts: Vec<Transition> = m.transitions().collect();
    ts.sort();
    let mentioned: BTreeSet<&StateId> = ts
        .iter()
        .flat_map(|t| [&t.source, &t.target])
        .chain([m.initial()])
        .collect();
    for s in m.states() {
        if !mentioned.contains(s) {
            line(out, "state", s.as_str());
        }
    }
    for t in ts {
        out.push_str(&format!("trans {} {} {}\n", t.source, t.label.name(), t.target));
    }
}
