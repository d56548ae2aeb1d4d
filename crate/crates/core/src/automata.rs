//! Synchronizing sequences for completely specified automata with inputs:
//! the pair (auxiliary) graph and the greedy merge loop towards a chosen state.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::net::{EventId, EventSequence};
use crate::reachability::ReachabilityGraph;

/// Deterministic, completely specified automaton over dense states `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonWithInputs {
    states: usize,
    events: usize,
    // row-major states x events
    delta: Vec<usize>,
}

impl AutomatonWithInputs {
    /// `delta[x * events + e]`; every entry must be a valid state.
    pub fn new(states: usize, events: usize, delta: Vec<usize>) -> Result<Self> {
        Self::from_partial(states, events, delta.into_iter().map(Some).collect())
    }

    /// Fails when some `(state, event)` pair has no successor.
    pub fn from_partial(states: usize, events: usize, delta: Vec<Option<usize>>) -> Result<Self> {
        if states == 0 {
            return Err(Error::Input("an automaton needs at least one state".into()));
        }
        if delta.len() != states * events {
            return Err(Error::Input(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                states * events
            )));
        }
        let mut total = Vec::with_capacity(delta.len());
        for (i, d) in delta.into_iter().enumerate() {
            match d {
                Some(x) if x < states => total.push(x),
                Some(x) => {
                    return Err(Error::Input(format!("successor state {x} out of range")))
                }
                None => {
                    return Err(Error::Input(format!(
                        "not completely specified: state {} has no move on event {}",
                        i / events,
                        i % events
                    )))
                }
            }
        }
        Ok(AutomatonWithInputs {
            states,
            events,
            delta: total,
        })
    }

    /// The completed reachability graph read as an automaton; states are node indices.
    pub fn from_rg(rg: &ReachabilityGraph) -> Result<Self> {
        let n = rg.node_count();
        let p = rg.event_count();
        let mut delta = Vec::with_capacity(n * p);
        for x in 0..n {
            for e in 0..p {
                delta.push(rg.successor(x, EventId(e)));
            }
        }
        Self::from_partial(n, p, delta)
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn event_count(&self) -> usize {
        self.events
    }

    pub fn delta(&self, x: usize, e: EventId) -> usize {
        self.delta[x * self.events + e.index()]
    }

    pub fn run(&self, x: usize, w: &EventSequence) -> usize {
        w.iter().fold(x, |s, e| self.delta(s, e))
    }

    /// `δ(S, w)` for a state set given as a sorted, deduplicated list.
    pub fn image(&self, set: &[usize], w: &EventSequence) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.run(x, w)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_synchronizing(&self, w: &EventSequence, target: usize) -> bool {
        (0..self.states).all(|x| self.run(x, w) == target)
    }
}

/// Index of the unordered pair `{a, b}` in the triangular layout.
#[inline]
pub fn pair_index(a: usize, b: usize) -> usize {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hi * (hi + 1) / 2 + lo
}

/// One node per unordered pair of states, diagonal included; the edge on
/// event `e` goes to the pair of the two successors.
#[derive(Clone, Debug)]
pub struct AuxiliaryGraph {
    states: usize,
    events: usize,
    pairs: Vec<(usize, usize)>,
    succ: Vec<usize>,
    // reverse adjacency in CSR form
    pred_start: Vec<usize>,
    pred: Vec<(usize, EventId)>,
}

impl AuxiliaryGraph {
    pub fn node_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    /// Canonical `(lo, hi)` pair of a node.
    pub fn pair(&self, node: usize) -> (usize, usize) {
        self.pairs[node]
    }

    pub fn successor(&self, node: usize, e: EventId) -> usize {
        self.succ[node * self.events + e.index()]
    }

    pub fn predecessors(&self, node: usize) -> &[(usize, EventId)] {
        &self.pred[self.pred_start[node]..self.pred_start[node + 1]]
    }

    /// Breadth-first distance from every pair to the diagonal `(target, target)`;
    /// `None` where the diagonal is unreachable.
    pub fn distances_to(&self, target: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.pairs.len()];
        let goal = pair_index(target, target);
        dist[goal] = Some(0);
        let mut queue = VecDeque::from([goal]);
        while let Some(node) = queue.pop_front() {
            let d = dist[node].expect("queued nodes have a distance");
            for &(prev, _) in self.predecessors(node) {
                if dist[prev].is_none() {
                    dist[prev] = Some(d + 1);
                    queue.push_back(prev);
                }
            }
        }
        dist
    }

    /// Shortest word from `node` to the goal of `dist`, taking the smallest
    /// event at each step.
    fn shortest_word(&self, node: usize, dist: &[Option<u32>]) -> Option<EventSequence> {
        let mut d = dist[node]?;
        let mut at = node;
        let mut word = EventSequence::empty();
        while d > 0 {
            let e = (0..self.events)
                .map(EventId)
                .find(|&e| dist[self.successor(at, e)] == Some(d - 1))
                .expect("a node at distance d has a successor at d - 1");
            word.push(e);
            at = self.successor(at, e);
            d -= 1;
        }
        Some(word)
    }
}

pub fn build_auxiliary(a: &AutomatonWithInputs) -> AuxiliaryGraph {
    let n = a.state_count();
    let p = a.event_count();
    let count = n * (n + 1) / 2;
    let mut pairs = Vec::with_capacity(count);
    for hi in 0..n {
        for lo in 0..=hi {
            pairs.push((lo, hi));
        }
    }
    let mut succ = Vec::with_capacity(count * p);
    let mut in_degree = vec![0usize; count];
    for &(lo, hi) in &pairs {
        for e in 0..p {
            let e = EventId(e);
            let target = pair_index(a.delta(lo, e), a.delta(hi, e));
            succ.push(target);
            in_degree[target] += 1;
        }
    }
    let mut pred_start = Vec::with_capacity(count + 1);
    pred_start.push(0);
    for d in &in_degree {
        pred_start.push(pred_start.last().unwrap() + d);
    }
    let mut fill = pred_start.clone();
    let mut pred = vec![(0, EventId(0)); count * p];
    for node in 0..count {
        for e in 0..p {
            let target = succ[node * p + e];
            pred[fill[target]] = (node, EventId(e));
            fill[target] += 1;
        }
    }
    AuxiliaryGraph {
        states: n,
        events: p,
        pairs,
        succ,
        pred_start,
        pred,
    }
}

/// True iff every pair node reaches `(target, target)`.
pub fn exists_ss(aux: &AuxiliaryGraph, target: usize) -> bool {
    target < aux.state_count() && aux.distances_to(target).iter().all(Option::is_some)
}

/// Uncertainty after a prefix of the greedy run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncertaintyTrace {
    pub sequence: EventSequence,
    pub uncertainty: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GreedyRun {
    pub sequence: EventSequence,
    /// Number of pair merges performed.
    pub iterations: usize,
    /// Uncertainty before the first merge and after each one.
    pub trace: Vec<UncertaintyTrace>,
}

pub fn greedy_ss(a: &AutomatonWithInputs, aux: &AuxiliaryGraph, target: usize) -> Option<EventSequence> {
    greedy_ss_traced(a, aux, target).map(|run| run.sequence)
}

/// Repeatedly merges the two smallest states of the current uncertainty into
/// `target` along a shortest pair-graph path. `None` when some pair cannot
/// reach the diagonal of `target`, in which case no synchronizing sequence
/// for `target` exists.
pub fn greedy_ss_traced(a: &AutomatonWithInputs, aux: &AuxiliaryGraph, target: usize) -> Option<GreedyRun> {
    if target >= a.state_count() {
        return None;
    }
    let dist = aux.distances_to(target);
    let mut uncertainty: Vec<usize> = (0..a.state_count()).collect();
    let mut sequence = EventSequence::empty();
    let mut trace = vec![UncertaintyTrace {
        sequence: sequence.clone(),
        uncertainty: uncertainty.clone(),
    }];
    let mut iterations = 0;
    while uncertainty != [target] {
        iterations += 1;
        // target stays in the uncertainty, so a second state exists
        let (x, y) = match uncertainty.as_slice() {
            [x, y, ..] => (*x, *y),
            [x] => (*x, *x),
            [] => unreachable!("uncertainty is never empty"),
        };
        let word = aux.shortest_word(pair_index(x, y), &dist)?;
        uncertainty = a.image(&uncertainty, &word);
        sequence.extend_from(&word);
        trace.push(UncertaintyTrace {
            sequence: sequence.clone(),
            uncertainty: uncertainty.clone(),
        });
    }
    assert!(
        a.is_synchronizing(&sequence, target),
        "greedy produced a non-synchronizing word"
    );
    Some(GreedyRun {
        sequence,
        iterations,
        trace,
    })
}
