//! Component structure of state machines: strongly connected components of
//! the place graph, their ergodic/transient classes, the condensed DAG and a
//! synchronizing sequence built level by level when only one ergodic
//! component exists.

use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::net::{
    token_distributions, EventSequence, Marking, PlaceId, PlaceTransitionNet, SynchronizedNet, TransitionId,
};
use crate::rg_sync::ss_via_rg;
use crate::sts::{find_sts, one_ss_from_sts, SearchMode};
use crate::sync::{verify_from, SyncMethod, SyncResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComponentClass {
    /// No arc leaves the component.
    Ergodic,
    Transient,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Sorted.
    pub places: Vec<PlaceId>,
    pub class: ComponentClass,
}

/// Maximal strongly connected components, ordered by their smallest place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    pub components: Vec<Component>,
    component_of: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, p: PlaceId) -> usize {
        self.component_of[p.index()]
    }

    pub fn ergodic(&self) -> impl Iterator<Item = usize> + '_ {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.class == ComponentClass::Ergodic)
            .map(|(i, _)| i)
    }

    pub fn transient(&self) -> impl Iterator<Item = usize> + '_ {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.class == ComponentClass::Transient)
            .map(|(i, _)| i)
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.components.len() == 1
    }
}

pub fn decompose(net: &PlaceTransitionNet) -> Result<ComponentPartition> {
    if !net.is_state_machine() {
        return Err(Error::NotStateMachine(
            "components are defined on the place graph of a state machine".into(),
        ));
    }
    let m = net.place_count();
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(m, net.transition_count());
    let nodes: Vec<_> = (0..m).map(|_| graph.add_node(())).collect();
    for t in net.transitions() {
        let (from, to) = net.sm_arc(t).expect("state machine arcs");
        graph.add_edge(nodes[from.index()], nodes[to.index()], ());
    }

    let mut groups: Vec<Vec<PlaceId>> = tarjan_scc(&graph)
        .into_iter()
        .map(|scc| {
            let mut places: Vec<PlaceId> = scc.into_iter().map(|n| PlaceId(n.index())).collect();
            places.sort_unstable();
            places
        })
        .collect();
    groups.sort_unstable_by_key(|g| g[0]);

    let mut component_of = vec![0; m];
    for (i, g) in groups.iter().enumerate() {
        for p in g {
            component_of[p.index()] = i;
        }
    }
    let mut leaves = vec![false; groups.len()];
    for t in net.transitions() {
        let (from, to) = net.sm_arc(t).expect("state machine arcs");
        if component_of[from.index()] != component_of[to.index()] {
            leaves[component_of[from.index()]] = true;
        }
    }
    let components = groups
        .into_iter()
        .zip(leaves)
        .map(|(places, leaves)| Component {
            places,
            class: if leaves {
                ComponentClass::Transient
            } else {
                ComponentClass::Ergodic
            },
        })
        .collect();
    Ok(ComponentPartition {
        components,
        component_of,
    })
}

/// η
pub fn ergodic_count(p: &ComponentPartition) -> usize {
    p.ergodic().count()
}

/// μ
pub fn transient_count(p: &ComponentPartition) -> usize {
    p.transient().count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CondensedEdge {
    pub from: usize,
    pub to: usize,
    pub transition: TransitionId,
}

/// One node per component, one edge per transition joining two components.
#[derive(Clone, Debug)]
pub struct CondensedGraph {
    pub partition: ComponentPartition,
    pub edges: Vec<CondensedEdge>,
    /// Longest-path distance to the ergodic node; only with exactly one
    /// ergodic component.
    pub levels: Option<Vec<usize>>,
}

impl CondensedGraph {
    pub fn build(net: &PlaceTransitionNet) -> Result<Self> {
        let partition = decompose(net)?;
        let mut edges = Vec::new();
        for t in net.transitions() {
            let (from, to) = net.sm_arc(t).expect("state machine arcs");
            let (a, b) = (partition.component_of(from), partition.component_of(to));
            if a != b {
                edges.push(CondensedEdge {
                    from: a,
                    to: b,
                    transition: t,
                });
            }
        }
        let levels = if ergodic_count(&partition) == 1 {
            Some(longest_path_levels(partition.len(), &edges))
        } else {
            None
        };
        let graph = CondensedGraph {
            partition,
            edges,
            levels,
        };
        if let Some(levels) = &graph.levels {
            for e in &graph.edges {
                assert!(
                    levels[e.from] > levels[e.to],
                    "condensed edge {} -> {} does not descend",
                    e.from,
                    e.to
                );
            }
        }
        Ok(graph)
    }

    pub fn max_level(&self) -> Option<usize> {
        self.levels.as_ref().map(|l| l.iter().copied().max().unwrap_or(0))
    }

    /// Components at `level`, in component order.
    pub fn level_set(&self, level: usize) -> Vec<usize> {
        match &self.levels {
            Some(levels) => (0..levels.len()).filter(|&i| levels[i] == level).collect(),
            None => Vec::new(),
        }
    }

    pub fn outgoing(&self, component: usize) -> impl Iterator<Item = &CondensedEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == component)
    }
}

// Sinks sit at level 0; every other node is one above its highest successor.
fn longest_path_levels(n: usize, edges: &[CondensedEdge]) -> Vec<usize> {
    let mut succ = vec![Vec::new(); n];
    for e in edges {
        succ[e.from].push(e.to);
    }
    let mut level: Vec<Option<usize>> = vec![None; n];
    for root in 0..n {
        if level[root].is_some() {
            continue;
        }
        // iterative post-order; the graph is acyclic
        let mut stack = vec![(root, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < succ[v].len() {
                stack.push((v, i + 1));
                let w = succ[v][i];
                if level[w].is_none() {
                    stack.push((w, 0));
                }
            } else {
                level[v] = Some(succ[v].iter().map(|&w| level[w].unwrap() + 1).max().unwrap_or(0));
            }
        }
    }
    level.into_iter().map(|l| l.unwrap()).collect()
}

/// A one-token synchronizing sequence for `target` inside one component,
/// using only the component's internal transitions.
fn component_ss(net: &SynchronizedNet, places: &[PlaceId], target: PlaceId) -> Result<Option<EventSequence>> {
    if places.len() == 1 {
        return Ok(Some(EventSequence::empty()));
    }
    let inside: BTreeSet<PlaceId> = places.iter().copied().collect();
    let internal: Vec<TransitionId> = net
        .net()
        .transitions()
        .filter(|&t| {
            let (a, b) = net.net().sm_arc(t).expect("state machine arcs");
            inside.contains(&a) && inside.contains(&b)
        })
        .collect();
    let sub = net.restrict(places, &internal)?;
    let local = PlaceId(places.iter().position(|&p| p == target).expect("target inside component"));
    if let Some(sts) = find_sts(&sub, local, SearchMode::DepthFirst)? {
        return Ok(Some(one_ss_from_sts(&sub, &sts)?.sequence));
    }
    let m0 = Marking::concentrated(places.len(), local, 1);
    Ok(ss_via_rg(&sub, &m0, &m0, places.len())?.map(|r| r.sequence))
}

/// One-token synchronizing sequence towards `target` in a state machine with
/// exactly one ergodic component, which must contain `target`.
///
/// Transient components are handled from the highest level down: inside each
/// one the token is gathered at the source of a chosen exit transition, whose
/// label then pushes it one level lower. `None` when some component-level
/// sequence is missing or the composite fails the whole-net replay.
pub fn ss_single_ergodic(net: &SynchronizedNet, target: PlaceId) -> Result<Option<SyncResult>> {
    net.require_deterministic()?;
    let graph = CondensedGraph::build(net.net())?;
    let eta = ergodic_count(&graph.partition);
    if eta != 1 {
        return Err(Error::Obstruction { ergodic: eta });
    }
    if target.index() >= net.place_count() {
        return Err(Error::Input(format!("place index {} out of range", target.index())));
    }
    let levels = graph.levels.as_ref().expect("levels exist with one ergodic component");
    let ergodic = graph.partition.component_of(target);
    if graph.partition.components[ergodic].class != ComponentClass::Ergodic {
        return Err(Error::Input(format!(
            "target {} is not in the ergodic component",
            net.net().place_name(target)
        )));
    }

    let mut sequence = EventSequence::empty();
    for level in (1..=graph.max_level().unwrap_or(0)).rev() {
        for c in graph.level_set(level) {
            let exit = graph
                .outgoing(c)
                .min_by_key(|e| (levels[e.to], e.transition))
                .expect("transient components have an exit");
            let (gate, _) = net.net().sm_arc(exit.transition).expect("state machine arcs");
            let places = &graph.partition.components[c].places;
            let Some(w) = component_ss(net, places, gate)? else {
                log::debug!("no internal sequence for component {c} towards its exit");
                return Ok(None);
            };
            sequence.extend_from(&w);
            sequence.push(net.label(exit.transition));
        }
    }
    let Some(w) = component_ss(net, &graph.partition.components[ergodic].places, target)? else {
        log::debug!("no internal sequence inside the ergodic component");
        return Ok(None);
    };
    sequence.extend_from(&w);

    let m = net.place_count();
    let target_marking = Marking::concentrated(m, target, 1);
    match verify_from(net, token_distributions(m, 1), &sequence, &target_marking) {
        Ok(verified_from) => Ok(Some(SyncResult {
            sequence,
            target: target_marking,
            unknown_places: Vec::new(),
            method: SyncMethod::Condensed,
            verified_from,
        })),
        Err(Error::Consistency(msg)) => {
            log::warn!("composed sequence rejected by replay: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}
