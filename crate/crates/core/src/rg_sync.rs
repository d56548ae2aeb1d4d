//! Synchronizing sequences for bounded synchronized nets through the
//! completed reachability graph. The initial uncertainty is the full
//! reachability set of the starting marking, or of a set of markings.

use crate::automata::{build_auxiliary, greedy_ss_traced, AutomatonWithInputs};
use crate::error::{Error, Result};
use crate::limits::Deadline;
use crate::net::{EventSequence, Marking, SynchronizedNet};
use crate::reachability::{build_rg_seeded, ReachabilityGraph};
use crate::sync::{verify_from, SyncMethod, SyncResult};

/// Unverified outcome of the reachability-graph method.
#[derive(Clone, Debug)]
pub struct RgSolution {
    pub graph: ReachabilityGraph,
    pub target_node: usize,
    pub sequence: Option<EventSequence>,
    pub greedy_iterations: usize,
}

pub fn solve_on_rg(
    net: &SynchronizedNet,
    starts: &[Marking],
    target: &Marking,
    node_budget: usize,
    deadline: Deadline,
) -> Result<RgSolution> {
    net.require_deterministic()?;
    net.net().check_marking(target)?;
    let graph = build_rg_seeded(net, starts, node_budget, deadline)?.complete();
    let target_node = graph
        .node_of(target)
        .ok_or_else(|| Error::UnreachableTarget(target.to_string()))?;
    deadline.check()?;
    let automaton = AutomatonWithInputs::from_rg(&graph)?;
    let aux = build_auxiliary(&automaton);
    deadline.check()?;
    let run = greedy_ss_traced(&automaton, &aux, target_node);
    Ok(RgSolution {
        target_node,
        greedy_iterations: run.as_ref().map_or(0, |r| r.iterations),
        sequence: run.map(|r| r.sequence),
        graph,
    })
}

/// `None` exactly when some pair of reachable markings can never be merged
/// into `target`, i.e. no synchronizing sequence for `target` exists.
pub fn ss_via_rg(
    net: &SynchronizedNet,
    m0: &Marking,
    target: &Marking,
    node_budget: usize,
) -> Result<Option<SyncResult>> {
    ss_via_rg_until(net, m0, target, node_budget, Deadline::none())
}

pub fn ss_via_rg_until(
    net: &SynchronizedNet,
    m0: &Marking,
    target: &Marking,
    node_budget: usize,
    deadline: Deadline,
) -> Result<Option<SyncResult>> {
    ss_via_rg_from(net, std::slice::from_ref(m0), target, node_budget, deadline)
}

/// The uncertainty is everything reachable from any of `starts`.
pub fn ss_via_rg_from(
    net: &SynchronizedNet,
    starts: &[Marking],
    target: &Marking,
    node_budget: usize,
    deadline: Deadline,
) -> Result<Option<SyncResult>> {
    let solution = solve_on_rg(net, starts, target, node_budget, deadline)?;
    let Some(sequence) = solution.sequence else {
        return Ok(None);
    };
    // replay on the net itself, not on the graph
    let verified_from = verify_from(
        net,
        solution.graph.nodes().iter().cloned(),
        &sequence,
        target,
    )?;
    Ok(Some(SyncResult {
        sequence,
        target: target.clone(),
        unknown_places: Vec::new(),
        method: SyncMethod::Rg,
        verified_from,
    }))
}
