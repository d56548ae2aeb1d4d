//! Structural synchronization of state machines with one token per place
//! group: a backward path search for a transition sequence whose label word
//! moves a token from any place to the target.
//!
//! A path `p0 t1 p1 … tr pr` ending at the target `p̄` is accepted when
//! - it visits every place and `p̄` only at its end,
//! - no transition outside the path shares a label with one on it (C1),
//! - whenever `tk` re-enters a place seen earlier, `f(tk)` differs from the
//!   labels of `t1 … t(k-1)` (C2).

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::limits::Deadline;
use crate::net::{token_distributions, EventSequence, Marking, PlaceId, SynchronizedNet, TransitionId};
use crate::reachability::count_reachable_sm;
use crate::sync::{verify_from, SyncMethod, SyncResult};

/// Above this many `k`-token markings the `k`-token check falls back to sampling.
pub const DEFAULT_VERIFY_BUDGET: u128 = 200_000;
const SAMPLE_SIZE: usize = 20_000;
const SAMPLE_SEED: u64 = 0x005e_ed0f_70c3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchMode {
    #[default]
    DepthFirst,
    /// Finds a shortest accepted path.
    BreadthFirst,
}

/// `p0 t1 p1 … tr pr`, stored as `places.len() == transitions.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirectedPath {
    pub places: Vec<PlaceId>,
    pub transitions: Vec<TransitionId>,
}

impl DirectedPath {
    pub fn single(p: PlaceId) -> Self {
        DirectedPath {
            places: vec![p],
            transitions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn start(&self) -> PlaceId {
        self.places[0]
    }

    pub fn end(&self) -> PlaceId {
        *self.places.last().expect("a path has at least one place")
    }

    pub fn is_elementary(&self) -> bool {
        let mut seen = HashSet::new();
        self.places.iter().all(|p| seen.insert(*p))
    }

    /// Every `tj` goes from `p(j-1)` to `pj` with unit weights.
    pub fn is_valid_in(&self, net: &SynchronizedNet) -> bool {
        self.places.len() == self.transitions.len() + 1
            && self.transitions.iter().enumerate().all(|(j, &t)| {
                t.index() < net.transition_count()
                    && net.net().sm_arc(t) == Some((self.places[j], self.places[j + 1]))
            })
    }

    pub fn display(&self, net: &SynchronizedNet) -> String {
        let mut parts = vec![net.net().place_name(self.places[0]).to_string()];
        for (j, &t) in self.transitions.iter().enumerate() {
            parts.push(net.net().transition_name(t).to_string());
            parts.push(net.net().place_name(self.places[j + 1]).to_string());
        }
        parts.join(" ")
    }

    fn prepend(&self, t: TransitionId, p: PlaceId) -> Self {
        let mut places = Vec::with_capacity(self.places.len() + 1);
        places.push(p);
        places.extend_from_slice(&self.places);
        let mut transitions = Vec::with_capacity(self.transitions.len() + 1);
        transitions.push(t);
        transitions.extend_from_slice(&self.transitions);
        DirectedPath {
            places,
            transitions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynchronizingTransitionSequence {
    pub path: DirectedPath,
}

impl SynchronizingTransitionSequence {
    pub fn target(&self) -> PlaceId {
        self.path.end()
    }

    pub fn sigma(&self) -> &[TransitionId] {
        &self.path.transitions
    }
}

/// C2 on the whole path.
pub fn satisfies_c2(net: &SynchronizedNet, path: &DirectedPath) -> bool {
    let mut seen_places = HashSet::from([path.places[0]]);
    let mut seen_labels = HashSet::new();
    for (j, &t) in path.transitions.iter().enumerate() {
        let label = net.label(t);
        if !seen_places.insert(path.places[j + 1]) && seen_labels.contains(&label) {
            return false;
        }
        seen_labels.insert(label);
    }
    true
}

/// C1 over the output transitions of the places the path covers.
pub fn satisfies_c1(net: &SynchronizedNet, path: &DirectedPath) -> bool {
    let sigma: HashSet<TransitionId> = path.transitions.iter().copied().collect();
    let sigma_labels: HashSet<_> = sigma.iter().map(|&t| net.label(t)).collect();
    let covered: HashSet<PlaceId> = path.places.iter().copied().collect();
    covered.iter().all(|&p| {
        net.net()
            .outputs_of(p)
            .iter()
            .all(|t| sigma.contains(t) || !sigma_labels.contains(&net.label(*t)))
    })
}

/// Full structural check of an accepted sequence for `net`.
pub fn is_valid_sts(net: &SynchronizedNet, sts: &SynchronizingTransitionSequence) -> bool {
    let path = &sts.path;
    let target = path.end();
    let covered: HashSet<PlaceId> = path.places.iter().copied().collect();
    path.is_valid_in(net)
        && !path.places[..path.places.len() - 1].contains(&target)
        && covered.len() == net.place_count()
        && satisfies_c1(net, path)
        && satisfies_c2(net, path)
}

pub fn find_sts(
    net: &SynchronizedNet,
    target: PlaceId,
    mode: SearchMode,
) -> Result<Option<SynchronizingTransitionSequence>> {
    find_sts_until(net, target, mode, Deadline::none())
}

/// Backward search from `target`. Each step prepends an unused input
/// transition of the current first place that does not leave `target`;
/// children are tried in transition-id order. `None` means the sufficient
/// condition failed, not that no synchronizing sequence exists.
pub fn find_sts_until(
    net: &SynchronizedNet,
    target: PlaceId,
    mode: SearchMode,
    deadline: Deadline,
) -> Result<Option<SynchronizingTransitionSequence>> {
    let pt = net.net();
    if !pt.is_state_machine() {
        return Err(Error::NotStateMachine(
            "the structural search needs unit-weight single-input single-output transitions".into(),
        ));
    }
    if target.index() >= pt.place_count() {
        return Err(Error::Input(format!("place index {} out of range", target.index())));
    }
    let m = pt.place_count();
    let max_len = pt.transition_count().saturating_mul(m);
    let leaves_target: HashSet<TransitionId> = pt.outputs_of(target).iter().copied().collect();

    let mut work: VecDeque<DirectedPath> = VecDeque::from([DirectedPath::single(target)]);
    let mut expanded: usize = 0;
    loop {
        let next = match mode {
            SearchMode::DepthFirst => work.pop_back(),
            SearchMode::BreadthFirst => work.pop_front(),
        };
        let Some(path) = next else {
            return Ok(None);
        };
        expanded += 1;
        if expanded.is_multiple_of(1024) {
            deadline.check()?;
        }

        let covered: HashSet<PlaceId> = path.places.iter().copied().collect();
        if covered.len() == m {
            if satisfies_c1(net, &path) {
                return Ok(Some(SynchronizingTransitionSequence { path }));
            }
            continue;
        }
        if path.len() >= max_len {
            continue;
        }

        let head = path.start();
        let mut children = Vec::new();
        let mut candidates: Vec<TransitionId> = pt.inputs_of(head).to_vec();
        candidates.sort_unstable();
        for t in candidates {
            if leaves_target.contains(&t) || path.transitions.contains(&t) {
                continue;
            }
            let (from, _) = pt.sm_arc(t).expect("state machine arcs");
            let child = path.prepend(t, from);
            if satisfies_c2(net, &child) {
                children.push(child);
            }
        }
        match mode {
            // reversed so the smallest transition id is popped first
            SearchMode::DepthFirst => work.extend(children.into_iter().rev()),
            SearchMode::BreadthFirst => work.extend(children),
        }
    }
}

/// `f*(σ)` checked from every single-token marking.
pub fn one_ss_from_sts(net: &SynchronizedNet, sts: &SynchronizingTransitionSequence) -> Result<SyncResult> {
    let m = net.place_count();
    let sequence = net.label_sequence(sts.sigma())?;
    let target = Marking::concentrated(m, sts.target(), 1);
    let verified_from = verify_from(net, token_distributions(m, 1), &sequence, &target)
        .map_err(|e| Error::Consistency(format!("accepted transition sequence is not synchronizing: {e}")))?;
    Ok(SyncResult {
        sequence,
        target,
        unknown_places: Vec::new(),
        method: SyncMethod::Sts,
        verified_from,
    })
}

/// `w^k` for `k` tokens, checked exhaustively while the number of `k`-token
/// markings stays within `verify_budget`, otherwise on a seeded sample.
pub fn k_ss_from_sts(
    net: &SynchronizedNet,
    sts: &SynchronizingTransitionSequence,
    k: u32,
) -> Result<SyncResult> {
    k_ss_from_sts_with_budget(net, sts, k, DEFAULT_VERIFY_BUDGET)
}

pub fn k_ss_from_sts_with_budget(
    net: &SynchronizedNet,
    sts: &SynchronizingTransitionSequence,
    k: u32,
    verify_budget: u128,
) -> Result<SyncResult> {
    if k == 0 {
        return Err(Error::Input("token count must be at least 1".into()));
    }
    let m = net.place_count();
    let sequence = net.label_sequence(sts.sigma())?.repeated(k as usize);
    let target = Marking::concentrated(m, sts.target(), k);
    let states = count_reachable_sm(m as u64, u64::from(k)).unwrap_or(u128::MAX);
    let verified = if states <= verify_budget {
        verify_from(net, token_distributions(m, k), &sequence, &target)
    } else {
        verify_from(net, sample_markings(m, k, SAMPLE_SIZE, SAMPLE_SEED), &sequence, &target)
    };
    let verified_from =
        verified.map_err(|e| Error::Consistency(format!("repeated word is not a {k}-token synchronizer: {e}")))?;
    Ok(SyncResult {
        sequence,
        target,
        unknown_places: Vec::new(),
        method: SyncMethod::Sts,
        verified_from,
    })
}

/// Concentrated markings first, then `count` markings with each token in a
/// uniformly drawn place.
fn sample_markings(m: usize, k: u32, count: usize, seed: u64) -> Vec<Marking> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Marking> = (0..m).map(|p| Marking::concentrated(m, PlaceId(p), k)).collect();
    for _ in 0..count {
        let mut counts = vec![0u32; m];
        for _ in 0..k {
            counts[rng.random_range(0..m)] += 1;
        }
        out.push(Marking::new(counts));
    }
    out
}

/// True when no output transition of `target` carries a label of `w`; then
/// `w^k` synchronizes `k` tokens into `target` for every `k`, provided `w`
/// already synchronizes one token there.
pub fn is_k_extensible(net: &SynchronizedNet, w: &EventSequence, target: PlaceId) -> bool {
    net.net()
        .outputs_of(target)
        .iter()
        .all(|&t| !w.contains(net.label(t)))
}
