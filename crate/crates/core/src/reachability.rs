//! Reachability graphs of bounded synchronized nets.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::limits::Deadline;
use crate::net::{EventId, Marking, SynchronizedNet};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RgEdge {
    pub source: usize,
    pub event: EventId,
    pub target: usize,
}

/// Markings reachable from an initial marking, numbered in breadth-first
/// discovery order, with at most one successor per `(node, event)`.
#[derive(Clone, Debug)]
pub struct ReachabilityGraph {
    events: usize,
    nodes: Vec<Marking>,
    index: HashMap<Marking, usize>,
    // row-major nodes x events
    succ: Vec<Option<usize>>,
    initial: usize,
    complete: bool,
}

impl ReachabilityGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn event_count(&self) -> usize {
        self.events
    }

    pub fn nodes(&self) -> &[Marking] {
        &self.nodes
    }

    pub fn marking(&self, node: usize) -> &Marking {
        &self.nodes[node]
    }

    pub fn node_of(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn successor(&self, node: usize, e: EventId) -> Option<usize> {
        self.succ[node * self.events + e.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = RgEdge> + '_ {
        self.succ.iter().enumerate().filter_map(move |(i, s)| {
            s.map(|target| RgEdge {
                source: i / self.events,
                event: EventId(i % self.events),
                target,
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().filter(|s| s.is_some()).count()
    }

    /// Adds a self-loop for every `(node, event)` without a receptive enabled
    /// transition, making the successor map total.
    pub fn complete(mut self) -> Self {
        for (i, slot) in self.succ.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = Some(i / self.events);
            }
        }
        self.complete = true;
        self
    }

    /// Debug dump: a node table followed by `source event target` lines.
    pub fn to_edge_list(&self, net: &SynchronizedNet) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# nodes {}", self.nodes.len());
        for (i, m) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "# {i} {m}");
        }
        let _ = writeln!(out, "# edges {}", self.edge_count());
        for edge in self.edges() {
            let _ = writeln!(
                out,
                "{} {} {}",
                edge.source,
                net.event_name(edge.event),
                edge.target
            );
        }
        out
    }
}

pub fn build_rg(net: &SynchronizedNet, m0: &Marking, node_budget: usize) -> Result<ReachabilityGraph> {
    build_rg_until(net, m0, node_budget, Deadline::none())
}

/// Breadth-first closure of `{m0}` under every event, in alphabet order.
/// Only firing events produce edges; see [`complete_rg`].
pub fn build_rg_until(
    net: &SynchronizedNet,
    m0: &Marking,
    node_budget: usize,
    deadline: Deadline,
) -> Result<ReachabilityGraph> {
    build_rg_seeded(net, std::slice::from_ref(m0), node_budget, deadline)
}

/// Closure of a set of start markings; they take the first node numbers in
/// the given order (duplicates collapse) and node 0 is the initial node.
pub fn build_rg_seeded(
    net: &SynchronizedNet,
    starts: &[Marking],
    node_budget: usize,
    deadline: Deadline,
) -> Result<ReachabilityGraph> {
    if node_budget == 0 {
        return Err(Error::Input("node budget must be at least 1".into()));
    }
    if starts.is_empty() {
        return Err(Error::Input("at least one start marking is required".into()));
    }
    let events = net.event_count();
    let mut nodes: Vec<Marking> = Vec::new();
    let mut index: HashMap<Marking, usize> = HashMap::new();
    for m in starts {
        net.net().check_marking(m)?;
        if index.contains_key(m) {
            continue;
        }
        if nodes.len() >= node_budget {
            return Err(Error::Boundedness { budget: node_budget });
        }
        index.insert(m.clone(), nodes.len());
        nodes.push(m.clone());
    }
    let mut succ: Vec<Option<usize>> = vec![None; events * nodes.len()];
    let mut queue: VecDeque<usize> = (0..nodes.len()).collect();

    while let Some(node) = queue.pop_front() {
        if node % 256 == 0 {
            deadline.check()?;
        }
        for e in net.events() {
            if !net.is_receptive(&nodes[node], e) {
                continue;
            }
            let next = net.fire_unchecked(&nodes[node], e)?;
            let target = match index.get(&next) {
                Some(&i) => i,
                None => {
                    if nodes.len() >= node_budget {
                        return Err(Error::Boundedness { budget: node_budget });
                    }
                    let i = nodes.len();
                    index.insert(next.clone(), i);
                    nodes.push(next);
                    succ.extend(std::iter::repeat_n(None, events));
                    queue.push_back(i);
                    i
                }
            };
            succ[node * events + e.index()] = Some(target);
        }
    }

    Ok(ReachabilityGraph {
        events,
        nodes,
        index,
        succ,
        initial: 0,
        complete: false,
    })
}

pub fn complete_rg(rg: ReachabilityGraph) -> ReachabilityGraph {
    rg.complete()
}

/// Number of `k`-token markings of an `m`-place net, `C(m+k-1, m-1)`; the
/// reachability set size of a strongly connected state machine.
pub fn count_reachable_sm(m: u64, k: u64) -> Result<u128> {
    if m == 0 {
        return Err(Error::Input("a net needs at least one place".into()));
    }
    let n = u128::from(m - 1) + u128::from(k);
    let r = u128::from((m - 1).min(k));
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) is divisible by (i + 1); divide first to delay overflow
        let g = gcd(acc, i + 1);
        let factor = (n - i) / ((i + 1) / g);
        acc = (acc / g)
            .checked_mul(factor)
            .ok_or_else(|| Error::Arithmetic(format!("C({n}, {r}) overflows")))?;
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::net::{token_distributions, PlaceId};

    #[test]
    fn weighted_net_has_three_markings() {
        let net = fixtures::weighted_three_place();
        let rg = build_rg(&net, &Marking::new(vec![2, 0, 0]), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(
            rg.nodes(),
            &[
                Marking::new(vec![2, 0, 0]),
                Marking::new(vec![0, 1, 0]),
                Marking::new(vec![1, 0, 1]),
            ]
        );
        assert!(!rg.is_complete());
        assert_eq!(rg.edge_count(), 3);
    }

    #[test]
    fn completion_adds_the_e2_loop() {
        let net = fixtures::weighted_three_place();
        let rg = build_rg(&net, &Marking::new(vec![2, 0, 0]), 10).unwrap();
        let before: Vec<RgEdge> = rg.edges().collect();
        let e2 = net.event_id("e2").unwrap();
        assert_eq!(rg.successor(0, e2), None);
        let full = complete_rg(rg);
        assert!(full.is_complete());
        assert_eq!(full.successor(0, e2), Some(0));
        assert_eq!(full.node_count(), 3);
        assert_eq!(full.edge_count(), 3 * 2);
        for e in &before {
            assert_eq!(full.successor(e.source, e.event), Some(e.target));
        }
    }

    #[test]
    fn transitionless_net_is_a_single_node() {
        let net = SynchronizedNet::builder()
            .places(["p"])
            .events(["e"])
            .build()
            .unwrap();
        let rg = build_rg(&net, &Marking::new(vec![3]), 5).unwrap();
        assert_eq!(rg.node_count(), 1);
        assert_eq!(rg.edge_count(), 0);
    }

    #[test]
    fn four_place_sm_completion() {
        let net = fixtures::four_place_sm();
        let rg = build_rg(&net, &Marking::new(vec![1, 0, 0, 0]), 100).unwrap();
        assert_eq!(rg.node_count(), 4);
        let full = rg.complete();
        let p4 = full.node_of(&Marking::new(vec![0, 0, 0, 1])).unwrap();
        let loops = full
            .edges()
            .filter(|e| e.source == p4 && e.target == p4)
            .count();
        // only e3 moves the token out of p4
        assert_eq!(loops, 4);
        for node in 0..full.node_count() {
            assert_eq!(full.edges().filter(|e| e.source == node).count(), 5);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let net = fixtures::four_place_sm();
        let err = build_rg(&net, &Marking::new(vec![2, 0, 0, 0]), 5).unwrap_err();
        assert_eq!(err, Error::Boundedness { budget: 5 });
        assert!(build_rg(&net, &Marking::new(vec![2, 0, 0, 0]), 10).is_ok());
        assert!(build_rg(&net, &Marking::new(vec![2, 0, 0, 0]), 0).is_err());
    }

    #[test]
    fn unbounded_net_hits_budget() {
        let net = SynchronizedNet::builder()
            .places(["p"])
            .events(["e"])
            .transition("grow", "e", &[("p", 1)], &[("p", 2)])
            .build()
            .unwrap();
        assert!(matches!(
            build_rg(&net, &Marking::new(vec![1]), 50),
            Err(Error::Boundedness { budget: 50 })
        ));
    }

    #[test]
    fn reachable_counts() {
        assert_eq!(count_reachable_sm(4, 1).unwrap(), 4);
        assert_eq!(count_reachable_sm(4, 2).unwrap(), 10);
        assert_eq!(count_reachable_sm(7, 0).unwrap(), 1);
        assert_eq!(count_reachable_sm(1, 9).unwrap(), 1);
        assert!(count_reachable_sm(0, 1).is_err());
        assert!(matches!(
            count_reachable_sm(200, 200),
            Err(Error::Arithmetic(_))
        ));
        // brute-force enumeration as the independent oracle
        for m in 1..=6usize {
            for k in 0..=5u32 {
                let brute = token_distributions(m, k).count() as u128;
                assert_eq!(count_reachable_sm(m as u64, u64::from(k)).unwrap(), brute);
            }
        }
    }

    #[test]
    fn two_token_rg_matches_count() {
        let net = fixtures::four_place_sm();
        let m0 = Marking::concentrated(4, PlaceId(0), 2);
        let rg = build_rg(&net, &m0, 100).unwrap();
        assert_eq!(rg.node_count() as u128, count_reachable_sm(4, 2).unwrap());
    }

    #[test]
    fn shared_labels_can_shrink_the_single_start_graph() {
        // e1 moves both a->b and c->d, so the two tokens cannot be split apart
        let net = SynchronizedNet::builder()
            .places(["a", "b", "c", "d"])
            .events(["e1", "e2"])
            .arc("t1", "e1", "a", "b")
            .arc("t2", "e2", "b", "c")
            .arc("t3", "e1", "c", "d")
            .arc("t4", "e2", "d", "a")
            .build()
            .unwrap();
        let m0 = Marking::new(vec![1, 0, 1, 0]);
        let single = build_rg(&net, &m0, 100).unwrap();
        assert!((single.node_count() as u128) < count_reachable_sm(4, 2).unwrap());
        let all: Vec<Marking> = token_distributions(4, 2).collect();
        let seeded = build_rg_seeded(&net, &all, 100, Deadline::none()).unwrap();
        assert_eq!(seeded.node_count() as u128, count_reachable_sm(4, 2).unwrap());
        assert_eq!(seeded.marking(0), &all[0]);
        assert!(build_rg_seeded(&net, &[], 10, Deadline::none()).is_err());
        assert_eq!(
            build_rg_seeded(&net, &all, 5, Deadline::none()).unwrap_err(),
            Error::Boundedness { budget: 5 }
        );
    }

    #[test]
    fn edge_list_dump() {
        let net = fixtures::weighted_three_place();
        let rg = build_rg(&net, &Marking::new(vec![2, 0, 0]), 10).unwrap();
        let text = rg.to_edge_list(&net);
        assert!(text.starts_with("# nodes 3\n# 0 [2 0 0]\n"));
        assert!(text.contains("\n0 e1 1\n"));
    }
}
