//! Reference machines used by the tests, the CLI and the documentation.

use crate::model::{Iots, IotsBuilder};

/// Text form of the reference machine.
pub const SPEC_A_TEXT: &str = "\
# reference machine: s1 stable, s2 quasi-stable, q1 q2 output states
iots spec_a
inputs a b
outputs 0 1
initial s1
trans s1 a q1
trans s1 b s1
trans q1 0 s2
trans q1 1 s2
trans s2 a s1
trans s2 b q2
trans s2 1 s1
trans q2 0 s1
";

/// Builder preloaded with the reference machine, for deriving variants.
pub fn spec_a_builder() -> IotsBuilder {
    Iots::builder("spec_a")
        .inputs(["a", "b"])
        .outputs(["0", "1"])
        .initial("s1")
        .trans("s1", "a", "q1")
        .trans("s1", "b", "s1")
        .trans("q1", "0", "s2")
        .trans("q1", "1", "s2")
        .trans("s2", "a", "s1")
        .trans("s2", "b", "q2")
        .trans("s2", "1", "s1")
        .trans("q2", "0", "s1")
}

/// The reference machine, not closed under quiescence.
pub fn spec_a() -> Iots {
    spec_a_builder().build().expect("reference machine is well formed")
}
