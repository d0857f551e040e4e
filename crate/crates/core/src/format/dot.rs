use std::collections::BTreeMap;
use std::fmt::Write;

use crate::model::{Iots, StateClass, StateId};
use crate::testgen::FAIL;

fn shape(class: StateClass) -> &'static str {
    match class {
        StateClass::StableInput => "circle",
        StateClass::QuasiStableInput => "octagon",
        StateClass::Output => "ellipse",
        StateClass::Sink => "box",
    }
}

fn role_color(role: &str) -> &'static str {
    match role {
        "fail" => "tomato",
        "target" | "sink" => "palegreen",
        "identification" => "lightblue",
        _ => "khaki",
    }
}

/// Graphviz rendering. Node shapes follow the state class, the fail state
/// (named `fail` or given the role `fail`) is double-circled, δ edges are
/// dashed and the initial state is drawn bold. States in `highlight` are
/// filled according to their role.
pub fn export_dot(m: &Iots, highlight: &BTreeMap<StateId, String>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", m.name());
    out.push_str("  rankdir=LR;\n");
    for s in m.states() {
        let role = highlight.get(s).map(String::as_str);
        let is_fail = s.as_str() == FAIL || role == Some("fail");
        let shape = if is_fail { "doublecircle" } else { shape(m.class_of(s)) };
        let mut attrs = format!("shape={shape}");
        if s == m.initial() {
            attrs.push_str(", penwidth=2");
        }
        if let Some(r) = role {
            let _ = write!(attrs, ", style=filled, fillcolor={}, xlabel=\"{r}\"", role_color(r));
        }
        let _ = writeln!(out, "  \"{s}\" [{attrs}];");
    }
    for t in m.transitions() {
        let style = if t.label.is_quiescence() { ", style=dashed" } else { "" };
        let label = if t.label.is_input() {
            format!("?{}", t.label.name())
        } else {
            format!("!{}", t.label.name())
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{label}\"{style}];",
            t.source, t.target
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::delta_closure;
    use crate::samples::spec_a;

    #[test]
    fn spec_a_counts() {
        let m = delta_closure(&spec_a()).unwrap();
        let dot = export_dot(&m, &BTreeMap::new());
        let nodes = dot.lines().filter(|l| l.contains("[shape=")).count();
        let edges = dot.lines().filter(|l| l.contains("->")).count();
        let dashed = dot.lines().filter(|l| l.contains("style=dashed")).count();
        assert_eq!((nodes, edges, dashed), (4, 9, 1));
        assert!(!dot.contains("filled"));
        assert_eq!(dot, export_dot(&m, &BTreeMap::new()));
    }

    #[test]
    fn highlight_roles() {
        let m = delta_closure(&spec_a()).unwrap();
        let h = BTreeMap::from([(StateId::new("s2"), "fail".to_owned())]);
        let dot = export_dot(&m, &h);
        assert_eq!(dot.matches("doublecircle").count(), 1);
        assert!(dot.contains("fillcolor=tomato"));
    }
}
