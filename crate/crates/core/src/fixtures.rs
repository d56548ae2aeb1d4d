//! Small reference nets used by the test suites, the CLI fixtures and the
//! benchmark's fixed-instance injection.
//!
//! Some arcs are reconstructions from the firing behaviour the nets are known
//! to exhibit; each constructor notes which ones.

use crate::net::SynchronizedNet;

/// Three places, weighted arc `2·p1 -> p2`.
///
/// From `[2 0 0]` it reaches exactly `[2 0 0]`, `[0 1 0]`, `[1 0 1]`, and at
/// `[2 0 1]` event `e1` fires `t1` and `t3` together, giving `[1 1 0]`.
/// `t2` (`p2 -> p1 + p3` on `e2`) is reconstructed from that reachability set.
pub fn weighted_three_place() -> SynchronizedNet {
    SynchronizedNet::builder()
        .places(["p1", "p2", "p3"])
        .events(["e1", "e2"])
        .transition("t1", "e1", &[("p1", 2)], &[("p2", 1)])
        .transition("t2", "e2", &[("p2", 1)], &[("p1", 1), ("p3", 1)])
        .transition("t3", "e1", &[("p3", 1)], &[("p1", 1)])
        .build()
        .expect("fixture is well formed")
}

/// Strongly connected four-place state machine with the cover path
/// `p1 t1 p2 t2 p3 t5 p2 t4 p4`; `t3: p4 -> p1` closes the cycle
/// (reconstructed, the only arc consistent with strong connectivity).
pub fn four_place_sm() -> SynchronizedNet {
    four_place_sm_labeled("e5")
}

/// [`four_place_sm`] with `t5` relabeled to `e2`, the same label as `t2`.
/// No synchronizing transition sequence exists for `p1` here.
pub fn four_place_sm_shared_label() -> SynchronizedNet {
    four_place_sm_labeled("e2")
}

fn four_place_sm_labeled(t5_label: &str) -> SynchronizedNet {
    SynchronizedNet::builder()
        .places(["p1", "p2", "p3", "p4"])
        .events(["e1", "e2", "e3", "e4", "e5"])
        .arc("t1", "e1", "p1", "p2")
        .arc("t2", "e2", "p2", "p3")
        .arc("t3", "e3", "p4", "p1")
        .arc("t4", "e4", "p2", "p4")
        .arc("t5", t5_label, "p3", "p2")
        .build()
        .expect("fixture is well formed")
}

/// Seven-place state machine with transient components `{p1}`, `{p2,p3}`,
/// `{p4}` and ergodic components `{p5,p6}`, `{p7}`. Arcs between components
/// are reconstructed; only the partition is fixed.
pub fn two_ergodic_sm() -> SynchronizedNet {
    two_ergodic_builder()
        .places(["p7"])
        .arc("t7", "e3", "p4", "p7")
        .build()
        .expect("fixture is well formed")
}

/// [`two_ergodic_sm`] without `p7` and its entering arc: a single ergodic
/// component `{p5,p6}` below three transient levels.
pub fn single_ergodic_sm() -> SynchronizedNet {
    two_ergodic_builder()
        .build()
        .expect("fixture is well formed")
}

fn two_ergodic_builder() -> crate::net::NetBuilder {
    SynchronizedNet::builder()
        .places(["p1", "p2", "p3", "p4", "p5", "p6"])
        .events(["e1", "e2", "e3"])
        .arc("t1", "e1", "p1", "p2")
        .arc("t2", "e2", "p1", "p4")
        .arc("t3", "e1", "p2", "p3")
        .arc("t4", "e2", "p3", "p2")
        .arc("t5", "e3", "p3", "p5")
        .arc("t6", "e1", "p4", "p3")
        .arc("t8", "e1", "p5", "p6")
        .arc("t9", "e2", "p6", "p5")
}

/// Two 2-place toggles `{p1,p2}` and `{p3,p4}` sharing a mutual-exclusion
/// place pair `{p5,p6}` through their `e2` transitions. `e1` returns each
/// toggle's token to its first place.
///
/// Subnets: `({p1,p2},{t1,t2})`, `({p3,p4},{t3,t4})`; remainder `{p5,p6}`
/// with no transitions of its own.
pub fn mutex_toggles() -> SynchronizedNet {
    SynchronizedNet::builder()
        .places(["p1", "p2", "p3", "p4", "p5", "p6"])
        .events(["e1", "e2"])
        .arc("t1", "e1", "p2", "p1")
        .transition("t2", "e2", &[("p1", 1), ("p5", 1)], &[("p2", 1), ("p6", 1)])
        .arc("t3", "e1", "p4", "p3")
        .transition("t4", "e2", &[("p3", 1), ("p6", 1)], &[("p4", 1), ("p5", 1)])
        .build()
        .expect("fixture is well formed")
}

/// Subnet place and transition names for [`mutex_toggles`].
pub fn mutex_toggles_subnets() -> Vec<(Vec<&'static str>, Vec<&'static str>)> {
    vec![
        (vec!["p1", "p2"], vec!["t1", "t2"]),
        (vec!["p3", "p4"], vec!["t3", "t4"]),
    ]
}
