//! Suite bundles.
//!
//! ```text
//! suite NAME
//! param KEY VALUE          # any number
//! case ID
//! provenance COVER POINT IDENTIFIER
//! fail STATE
//! iots ID                  # machine directives as in a model file
//! ...
//! end
//! ```

use std::collections::{BTreeMap, BTreeSet};

use super::{is_token, parse_lines, tokenize, write_machine, Line};
use crate::error::{Diagnostic, Error, Result};
use crate::model::StateId;
use crate::testgen::{Provenance, SuiteCase, TestCase, TestSuite};

pub fn write_suite(ts: &TestSuite) -> String {
    let mut out = format!("suite {}\n", ts.name);
    for (k, v) in &ts.params {
        out.push_str(&format!("param {k} {v}\n"));
    }
    for c in &ts.cases {
        out.push_str(&format!("case {}\n", c.id));
        let p = &c.provenance;
        out.push_str(&format!("provenance {} {} {}\n", p.cover, p.point, p.identifier));
        out.push_str(&format!("fail {}\n", c.case.fail));
        write_machine(&c.case.machine, &mut out);
        out.push_str("end\n");
    }
    out
}

fn diag(line: usize, column: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        column,
        message: message.into(),
    }
}

struct OpenCase<'a> {
    id: String,
    line: usize,
    provenance: Option<Provenance>,
    fail: Option<(usize, StateId)>,
    body: Vec<Line<'a>>,
}

pub fn read_suite(text: &str) -> Result<TestSuite> {
    let mut diags = Vec::new();
    let mut name: Option<String> = None;
    let mut params = BTreeMap::new();
    let mut cases = Vec::new();
    let mut ids = BTreeSet::new();
    let mut open: Option<OpenCase<'_>> = None;

    for line in tokenize(text) {
        let no = line.no;
        let kw = line.keyword().to_owned();
        let args: Vec<&str> = line.tokens[1..].iter().map(|(_, t)| *t).collect();
        if let Some(c) = open.as_mut() {
            match kw.as_str() {
                "provenance" if args.len() == 3 => {
                    c.provenance = Some(Provenance {
                        cover: args[0].to_owned(),
                        point: args[1].to_owned(),
                        identifier: args[2].to_owned(),
                    });
                }
                "fail" if args.len() == 1 => c.fail = Some((no, StateId::new(args[0]))),
                "provenance" | "fail" => diags.push(diag(no, 1, format!("malformed `{kw}` line"))),
                "end" => {
                    let c = open.take().expect("open case");
                    if let Some(sc) = close_case(c, &mut diags) {
                        cases.push(sc);
                    }
                }
                "case" | "suite" | "param" => {
                    diags.push(diag(no, 1, format!("`{kw}` inside case {}", c.id)));
                }
                _ => c.body.push(line),
            }
            continue;
        }
        match kw.as_str() {
            "suite" if args.len() == 1 && name.is_none() => name = Some(args[0].to_owned()),
            "suite" => diags.push(diag(no, 1, "malformed or duplicate `suite` line")),
            "param" if args.len() == 2 => {
                params.insert(args[0].to_owned(), args[1].to_owned());
            }
            "param" => diags.push(diag(no, 1, "`param` expects KEY VALUE")),
            "case" if args.len() == 1 && is_token(args[0]) => {
                if !ids.insert(args[0].to_owned()) {
                    diags.push(diag(no, 6, format!("duplicate case `{}`", args[0])));
                }
                open = Some(OpenCase {
                    id: args[0].to_owned(),
                    line: no,
                    provenance: None,
                    fail: None,
                    body: Vec::new(),
                });
            }
            "case" => diags.push(diag(no, 1, "`case` expects one identifier")),
            _ => diags.push(diag(no, 1, format!("unexpected `{kw}` outside a case"))),
        }
    }
    if let Some(c) = open {
        diags.push(diag(c.line, 1, format!("case {} has no `end`", c.id)));
    }
    if name.is_none() {
        diags.push(diag(1, 1, "missing `suite NAME` line"));
    }
    if !diags.is_empty() {
        return Err(Error::Parse(diags));
    }
    Ok(TestSuite {
        name: name.expect("checked"),
        params,
        cases,
    })
}

fn close_case(c: OpenCase<'_>, diags: &mut Vec<Diagnostic>) -> Option<SuiteCase> {
    let before = diags.len();
    let machine = parse_lines(&c.body, diags);
    let Some((fail_line, fail)) = c.fail else {
        diags.push(diag(c.line, 1, format!("case {} has no `fail` line", c.id)));
        return None;
    };
    let provenance = c.provenance.unwrap_or_else(|| Provenance {
        cover: "-".into(),
        point: "-".into(),
        identifier: "-".into(),
    });
    let machine = machine.filter(|_| diags.len() == before)?;
    if !machine.contains(&fail) {
        diags.push(diag(fail_line, 6, format!("unknown state `{fail}`")));
        return None;
    }
    match TestCase::new(machine, fail) {
        Ok(case) => Some(SuiteCase {
            id: c.id,
            case,
            provenance,
        }),
        Err(e) => {
            diags.push(diag(c.line, 1, format!("case {}: {e}", c.id)));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::delta_closure;
    use crate::samples::spec_a;
    use crate::testgen::generate_suite;

    fn suite_text() -> String {
        write_suite(&generate_suite(&delta_closure(&spec_a()).unwrap()).unwrap())
    }

    #[test]
    fn round_trip() {
        let text = suite_text();
        let ts = read_suite(&text).unwrap();
        assert_eq!(write_suite(&ts), text);
        assert_eq!(ts, generate_suite(&delta_closure(&spec_a()).unwrap()).unwrap());
    }

    #[test]
    fn unknown_fail_state() {
        let text = suite_text().replacen("fail fail", "fail nowhere", 1);
        let Err(Error::Parse(d)) = read_suite(&text) else { panic!() };
        assert!(d[0].message.contains("unknown state `nowhere`"));
    }

    #[test]
    fn dangling_initial_state_is_reported() {
        let text = suite_text().replacen("initial t0", "initial t9", 1);
        let Err(Error::Parse(d)) = read_suite(&text) else { panic!() };
        assert!(d[0].message.contains("unreachable"), "{}", d[0].message);
    }

    #[test]
    fn missing_end() {
        let text = suite_text();
        let cut = &text[..text.rfind("end").unwrap()];
        let Err(Error::Parse(d)) = read_suite(cut) else { panic!() };
        assert!(d.iter().any(|d| d.message.contains("no `end`")));
    }
}
