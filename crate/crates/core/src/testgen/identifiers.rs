use std::collections::BTreeMap;

use super::require_spec;
use super::separator::{build_separator, distinguishers, Distinguisher};
use crate::error::{Error, Result};
use crate::model::{Iots, StateId};
use crate::relations::is_input_state_minimal;

/// State identifier of every input state.
pub type Identifiers = BTreeMap<StateId, Vec<Distinguisher>>;

/// Harmonized identifiers: every pair of input states contributes the two
/// distinguishers of one shared separator, and every stable state also gets
/// its quiescence distinguisher. Each set is deduplicated up to state
/// renaming, keeping the first member (so `W^δ(s)` absorbs an equal
/// `W(s, q)`).
pub fn harmonized_identifiers(spec: &Iots) -> Result<Identifiers> {
    require_spec(spec)?;
    let minimal = is_input_state_minimal(spec)?;
    if let Some((a, b)) = minimal.compatible_pair {
        return Err(Error::Compatible(a, b));
    }
    let ins = spec.input_states();
    let mut ids: Identifiers = ins.iter().map(|s| (s.clone(), Vec::new())).collect();
    for s in &ins {
        if spec.is_stable(s) {
            ids.get_mut(s)
                .expect("input state")
                .push(Distinguisher::quiescence(spec, s)?);
        }
    }
    for (i, s1) in ins.iter().enumerate() {
        for s2 in &ins[i + 1..] {
            let sep = build_separator(spec, s1, s2)?;
            let (w12, w21) = distinguishers(&sep)?;
            ids.get_mut(s1).expect("input state").push(w12);
            ids.get_mut(s2).expect("input state").push(w21);
        }
    }
    for set in ids.values_mut() {
        let mut seen = Vec::new();
        set.retain(|w| {
            let key = w.canonical_key();
            let fresh = !seen.contains(&key);
            seen.push(key);
            fresh
        });
    }
    Ok(ids)
}
