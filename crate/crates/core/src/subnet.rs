//! Synchronizing the state-machine parts of a larger net. Each supplied
//! subnet is a strongly connected state machine whose token count the rest
//! of the net cannot change; per-subnet sequences are concatenated and the
//! remainder places are left uncertified.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::net::{token_distributions, EventId, EventSequence, Marking, PlaceId, SynchronizedNet, TransitionId};
use crate::reachability::DEFAULT_NODE_BUDGET;
use crate::rg_sync::ss_via_rg;
use crate::sm_structure::decompose;
use crate::sts::{find_sts, k_ss_from_sts, SearchMode};
use crate::sync::{verify_from, SyncMethod, SyncResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subnet {
    pub places: Vec<PlaceId>,
    pub transitions: Vec<TransitionId>,
}

/// Ordered subnets plus the inferred remainder `(P_z, T_z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubnetDecomposition {
    pub subnets: Vec<Subnet>,
    pub remainder_places: Vec<PlaceId>,
    pub remainder_transitions: Vec<TransitionId>,
}

impl SubnetDecomposition {
    /// Rejects overlapping subnets, subnets that are not strongly connected
    /// state machines once restricted to their own places, and subnet
    /// transitions touching another subnet's places.
    pub fn new(net: &SynchronizedNet, subnets: Vec<(Vec<PlaceId>, Vec<TransitionId>)>) -> Result<Self> {
        let pt = net.net();
        let mut owner_place = vec![None; pt.place_count()];
        let mut owner_transition = vec![None; pt.transition_count()];
        let mut out = Vec::with_capacity(subnets.len());
        for (i, (mut places, mut transitions)) in subnets.into_iter().enumerate() {
            if places.is_empty() {
                return Err(Error::Input(format!("subnet {i} has no places")));
            }
            places.sort_unstable();
            transitions.sort_unstable();
            for &p in &places {
                let slot = owner_place
                    .get_mut(p.index())
                    .ok_or_else(|| Error::Input(format!("place index {} out of range", p.index())))?;
                if slot.replace(i).is_some() {
                    return Err(Error::Input(format!(
                        "place {} belongs to more than one subnet",
                        pt.place_name(p)
                    )));
                }
            }
            for &t in &transitions {
                let slot = owner_transition
                    .get_mut(t.index())
                    .ok_or_else(|| Error::Input(format!("transition index {} out of range", t.index())))?;
                if slot.replace(i).is_some() {
                    return Err(Error::Input(format!(
                        "transition {} belongs to more than one subnet",
                        pt.transition_name(t)
                    )));
                }
            }
            out.push(Subnet {
                places,
                transitions,
            });
        }
        for (i, s) in out.iter().enumerate() {
            for &t in &s.transitions {
                for &(p, _) in pt.pre(t).iter().chain(pt.post(t)) {
                    if matches!(owner_place[p.index()], Some(j) if j != i) {
                        return Err(Error::Input(format!(
                            "transition {} of subnet {i} touches place {} of another subnet",
                            pt.transition_name(t),
                            pt.place_name(p)
                        )));
                    }
                }
            }
            let sub = net.restrict(&s.places, &s.transitions)?;
            if !sub.net().is_state_machine() {
                return Err(Error::Input(format!(
                    "subnet {i} is not a state machine on its own places"
                )));
            }
            if !decompose(sub.net())?.is_strongly_connected() {
                return Err(Error::Input(format!("subnet {i} is not strongly connected")));
            }
        }
        let remainder_places = pt.places().filter(|p| owner_place[p.index()].is_none()).collect();
        let remainder_transitions = pt
            .transitions()
            .filter(|t| owner_transition[t.index()].is_none())
            .collect();
        Ok(SubnetDecomposition {
            subnets: out,
            remainder_places,
            remainder_transitions,
        })
    }

    pub fn from_names(net: &SynchronizedNet, subnets: &[(Vec<&str>, Vec<&str>)]) -> Result<Self> {
        let mut ids = Vec::with_capacity(subnets.len());
        for (places, transitions) in subnets {
            let ps = places
                .iter()
                .map(|n| net.net().place_id(n))
                .collect::<Result<Vec<_>>>()?;
            let ts = transitions
                .iter()
                .map(|n| net.net().transition_id(n))
                .collect::<Result<Vec<_>>>()?;
            ids.push((ps, ts));
        }
        Self::new(net, ids)
    }

    pub fn len(&self) -> usize {
        self.subnets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subnets.is_empty()
    }

    /// The subnet as a standalone net; places keep their order in
    /// `subnets[i].places`.
    pub fn isolated(&self, net: &SynchronizedNet, i: usize) -> Result<SynchronizedNet> {
        net.restrict(&self.subnets[i].places, &self.subnets[i].transitions)
    }

    /// The full marking restricted to subnet `i`.
    pub fn project(&self, i: usize, m: &Marking) -> Marking {
        Marking::new(self.subnets[i].places.iter().map(|&p| m.get(p)).collect())
    }

    fn subnet_places(&self) -> HashSet<PlaceId> {
        self.subnets.iter().flat_map(|s| s.places.iter().copied()).collect()
    }
}

/// Remainder transitions with an arc to or from a subnet place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationReport {
    pub violations: Vec<TransitionId>,
}

impl IsolationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_isolation(net: &SynchronizedNet, d: &SubnetDecomposition) -> IsolationReport {
    let inside = d.subnet_places();
    let violations = d
        .remainder_transitions
        .iter()
        .copied()
        .filter(|&t| {
            net.net()
                .pre(t)
                .iter()
                .chain(net.net().post(t))
                .any(|(p, _)| inside.contains(p))
        })
        .collect();
    IsolationReport { violations }
}

/// An event of `w_i` labels a transition that needs a remainder token and
/// belongs to one of the subnets `0..=i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelViolation {
    pub subnet: usize,
    pub event: EventId,
    pub transition: TransitionId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelReport {
    /// Transitions of every subnet up to `i` are checked.
    pub violations: Vec<LabelViolation>,
    /// The weaker reading: only transitions common to all subnets up to `i`,
    /// which for disjoint subnets constrains the first one alone.
    pub intersection_violations: Vec<LabelViolation>,
}

impl LabelReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_label_condition(
    net: &SynchronizedNet,
    d: &SubnetDecomposition,
    per_subnet_ss: &[EventSequence],
) -> Result<LabelReport> {
    if per_subnet_ss.len() != d.len() {
        return Err(Error::Input(format!(
            "{} sequences for {} subnets",
            per_subnet_ss.len(),
            d.len()
        )));
    }
    let remainder: HashSet<PlaceId> = d.remainder_places.iter().copied().collect();
    let fed_by_remainder =
        |t: TransitionId| net.net().pre(t).iter().any(|(p, _)| remainder.contains(p));
    let mut owner = vec![None; net.transition_count()];
    for (j, s) in d.subnets.iter().enumerate() {
        for &t in &s.transitions {
            owner[t.index()] = Some(j);
        }
    }

    let mut violations = Vec::new();
    let mut intersection_violations = Vec::new();
    for (i, w) in per_subnet_ss.iter().enumerate() {
        let events: Vec<EventId> = {
            let mut seen = HashSet::new();
            w.iter().filter(|e| seen.insert(*e)).collect()
        };
        for e in events {
            for &t in net.receptive(e) {
                let Some(j) = owner[t.index()] else { continue };
                if j > i || !fed_by_remainder(t) {
                    continue;
                }
                let v = LabelViolation {
                    subnet: i,
                    event: e,
                    transition: t,
                };
                violations.push(v);
                // disjoint subnets share no transition once i > 0
                if i == 0 {
                    intersection_violations.push(v);
                }
            }
        }
    }
    Ok(LabelReport {
        violations,
        intersection_violations,
    })
}

/// A sequence for `k` tokens inside an isolated strongly connected state
/// machine, ending at `target`.
fn subnet_ss(sub: &SynchronizedNet, target: &Marking, node_budget: usize) -> Result<Option<EventSequence>> {
    let k = target.total();
    if k == 0 {
        return Ok(Some(EventSequence::empty()));
    }
    let concentrated = target.counts().iter().position(|&c| u64::from(c) == k);
    if let (Some(p), Ok(k)) = (concentrated, u32::try_from(k)) {
        if let Some(sts) = find_sts(sub, PlaceId(p), SearchMode::DepthFirst)? {
            return Ok(Some(k_ss_from_sts(sub, &sts, k)?.sequence));
        }
    }
    Ok(ss_via_rg(sub, target, target, node_budget)?.map(|r| r.sequence))
}

/// Concatenates one synchronizing sequence per subnet, `targets[i]` being
/// the wanted marking of subnet `i` on its own places. The certified marking
/// of subnet `i` is `targets[i]` pushed through the later subsequences;
/// remainder places come back as unknown.
pub fn ss_via_subnets(
    net: &SynchronizedNet,
    d: &SubnetDecomposition,
    targets: &[Marking],
) -> Result<Option<SyncResult>> {
    ss_via_subnets_with_budget(net, d, targets, DEFAULT_NODE_BUDGET)
}

pub fn ss_via_subnets_with_budget(
    net: &SynchronizedNet,
    d: &SubnetDecomposition,
    targets: &[Marking],
    node_budget: usize,
) -> Result<Option<SyncResult>> {
    if targets.len() != d.len() {
        return Err(Error::Input(format!("{} targets for {} subnets", targets.len(), d.len())));
    }
    let isolation = check_isolation(net, d);
    if !isolation.is_ok() {
        let names: Vec<&str> = isolation
            .violations
            .iter()
            .map(|&t| net.net().transition_name(t))
            .collect();
        return Err(Error::NotApplicable(format!(
            "remainder transitions touch subnet places: {}",
            names.join(", ")
        )));
    }

    let mut isolated = Vec::with_capacity(d.len());
    let mut words = Vec::with_capacity(d.len());
    for (i, target) in targets.iter().enumerate() {
        let sub = d.isolated(net, i)?;
        sub.net().check_marking(target)?;
        sub.require_deterministic()?;
        let Some(w) = subnet_ss(&sub, target, node_budget)? else {
            log::debug!("subnet {i} has no synchronizing sequence for {target}");
            return Ok(None);
        };
        isolated.push(sub);
        words.push(w);
    }

    let labels = check_label_condition(net, d, &words)?;
    if !labels.is_ok() {
        let v = labels.violations[0];
        return Err(Error::NotApplicable(format!(
            "event {} of subnet {}'s sequence labels {}, which needs a remainder token",
            net.event_name(v.event),
            v.subnet,
            net.net().transition_name(v.transition)
        )));
    }

    let mut sequence = EventSequence::empty();
    for w in &words {
        sequence.extend_from(w);
    }
    let mut counts = vec![0u32; net.place_count()];
    let mut verified_from = 0;
    for (i, sub) in isolated.iter().enumerate() {
        let mut tail = EventSequence::empty();
        for w in &words[i + 1..] {
            tail.extend_from(w);
        }
        let certified = sub.apply_sequence(&targets[i], &tail)?;
        let k = u32::try_from(targets[i].total())
            .map_err(|_| Error::Arithmetic("token count exceeds u32".into()))?;
        verified_from += verify_from(
            sub,
            token_distributions(sub.place_count(), k),
            &sequence,
            &certified,
        )?;
        for (local, &p) in d.subnets[i].places.iter().enumerate() {
            counts[p.index()] = certified.counts()[local];
        }
    }
    Ok(Some(SyncResult {
        sequence,
        target: Marking::new(counts),
        unknown_places: d.remainder_places.clone(),
        method: SyncMethod::Subnet,
        verified_from,
    }))
}
