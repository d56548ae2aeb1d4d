//! Place/Transition nets, synchronized nets and their event-driven firing rule.
//!
//! Places, transitions and events are named by strings at the edges of the
//! API and by dense indices internally. Indices follow declaration order.
//!
//! An event `e` fires, simultaneously and exactly once each, every transition
//! labeled `e` that is enabled at the current marking (single-server rule).
//! An event with no enabled receptive transition leaves the marking unchanged.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

dense_id!(
    /// Index of a place in declaration order.
    PlaceId
);
dense_id!(
    /// Index of a transition in declaration order.
    TransitionId
);
dense_id!(
    /// Index of an input event in alphabet order.
    EventId
);

/// Token count per place.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn new(counts: Vec<u32>) -> Self {
        Marking(counts)
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![0; places])
    }

    /// All `tokens` in place `place`, zero elsewhere.
    pub fn concentrated(places: usize, place: PlaceId, tokens: u32) -> Self {
        let mut m = Marking::zeros(places);
        m.0[place.index()] = tokens;
        m
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, place: PlaceId) -> u32 {
        self.0[place.index()]
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn into_counts(self) -> Vec<u32> {
        self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }
}

impl From<Vec<u32>> for Marking {
    fn from(counts: Vec<u32>) -> Self {
        Marking(counts)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A word over the input alphabet. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EventSequence(Vec<EventId>);

impl EventSequence {
    pub fn empty() -> Self {
        EventSequence(Vec::new())
    }

    pub fn new(events: Vec<EventId>) -> Self {
        EventSequence(events)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn events(&self) -> &[EventId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = EventId> + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, e: EventId) {
        self.0.push(e);
    }

    pub fn extend_from(&mut self, other: &EventSequence) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn contains(&self, e: EventId) -> bool {
        self.0.contains(&e)
    }

    /// `w^k`.
    pub fn repeated(&self, k: usize) -> EventSequence {
        EventSequence(self.0.repeat(k))
    }

    /// Space-separated event names.
    pub fn display<'a>(&'a self, net: &'a SynchronizedNet) -> impl fmt::Display + 'a {
        DisplaySequence { seq: self, net }
    }

    pub fn names(&self, net: &SynchronizedNet) -> Vec<String> {
        self.0.iter().map(|&e| net.event_name(e).to_string()).collect()
    }
}

impl FromIterator<EventId> for EventSequence {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> Self {
        EventSequence(iter.into_iter().collect())
    }
}

struct DisplaySequence<'a> {
    seq: &'a EventSequence,
    net: &'a SynchronizedNet,
}

impl fmt::Display for DisplaySequence<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &e) in self.seq.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.net.event_name(e))?;
        }
        Ok(())
    }
}

/// Weighted arcs of one transition, sorted by place, zero weights dropped.
pub type Arcs = Vec<(PlaceId, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceTransitionNet {
    places: Vec<String>,
    transitions: Vec<String>,
    pre: Vec<Arcs>,
    post: Vec<Arcs>,
    // p• and •p, transitions in declaration order
    outputs: Vec<Vec<TransitionId>>,
    inputs: Vec<Vec<TransitionId>>,
}

impl PlaceTransitionNet {
    /// `transitions` lists `(id, pre, post)` with place indices into `places`.
    pub fn new(places: Vec<String>, transitions: Vec<(String, Arcs, Arcs)>) -> Result<Self> {
        if places.is_empty() {
            return Err(Error::Structural("a net needs at least one place".into()));
        }
        check_unique("place", &places)?;
        let names: Vec<String> = transitions.iter().map(|(n, _, _)| n.clone()).collect();
        check_unique("transition", &names)?;

        let m = places.len();
        let mut pre = Vec::with_capacity(transitions.len());
        let mut post = Vec::with_capacity(transitions.len());
        let mut outputs = vec![Vec::new(); m];
        let mut inputs = vec![Vec::new(); m];
        for (t, (name, tpre, tpost)) in transitions.into_iter().enumerate() {
            let tpre = normalize_arcs(&name, tpre, m)?;
            let tpost = normalize_arcs(&name, tpost, m)?;
            if tpre.is_empty() && tpost.is_empty() {
                return Err(Error::Structural(format!(
                    "transition {name} has no arcs"
                )));
            }
            for &(p, _) in &tpre {
                outputs[p.index()].push(TransitionId(t));
            }
            for &(p, _) in &tpost {
                inputs[p.index()].push(TransitionId(t));
            }
            pre.push(tpre);
            post.push(tpost);
        }
        Ok(PlaceTransitionNet {
            places,
            transitions: names,
            pre,
            post,
            outputs,
            inputs,
        })
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.index()]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.index()]
    }

    pub fn place_id(&self, name: &str) -> Result<PlaceId> {
        self.places
            .iter()
            .position(|p| p == name)
            .map(PlaceId)
            .ok_or_else(|| Error::Input(format!("unknown place {name}")))
    }

    pub fn transition_id(&self, name: &str) -> Result<TransitionId> {
        self.transitions
            .iter()
            .position(|t| t == name)
            .map(TransitionId)
            .ok_or_else(|| Error::Input(format!("unknown transition {name}")))
    }

    pub fn pre(&self, t: TransitionId) -> &[(PlaceId, u32)] {
        &self.pre[t.index()]
    }

    pub fn post(&self, t: TransitionId) -> &[(PlaceId, u32)] {
        &self.post[t.index()]
    }

    pub fn pre_weight(&self, p: PlaceId, t: TransitionId) -> u32 {
        weight_of(&self.pre[t.index()], p)
    }

    pub fn post_weight(&self, p: PlaceId, t: TransitionId) -> u32 {
        weight_of(&self.post[t.index()], p)
    }

    /// `p•`
    pub fn outputs_of(&self, p: PlaceId) -> &[TransitionId] {
        &self.outputs[p.index()]
    }

    /// `•p`
    pub fn inputs_of(&self, p: PlaceId) -> &[TransitionId] {
        &self.inputs[p.index()]
    }

    /// Every transition has one input and one output place, both with unit weight.
    pub fn is_state_machine(&self) -> bool {
        self.transitions().all(|t| self.sm_arc(t).is_some())
    }

    /// `(•t, t•)` when `t` is a unit-weight state-machine transition.
    pub fn sm_arc(&self, t: TransitionId) -> Option<(PlaceId, PlaceId)> {
        match (self.pre(t), self.post(t)) {
            ([(from, 1)], [(to, 1)]) => Some((*from, *to)),
            _ => None,
        }
    }

    pub fn check_marking(&self, m: &Marking) -> Result<()> {
        if m.len() != self.place_count() {
            return Err(Error::Structural(format!(
                "marking has {} entries, net has {} places",
                m.len(),
                self.place_count()
            )));
        }
        Ok(())
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.pre(t).iter().all(|&(p, w)| m.get(p) >= w)
    }

    /// Transitions enabled at `m`, in declaration order.
    pub fn enabled_transitions(&self, m: &Marking) -> Result<Vec<TransitionId>> {
        self.check_marking(m)?;
        Ok(self.transitions().filter(|&t| self.is_enabled(m, t)).collect())
    }
}

fn weight_of(arcs: &[(PlaceId, u32)], p: PlaceId) -> u32 {
    arcs.iter()
        .find(|(q, _)| *q == p)
        .map(|&(_, w)| w)
        .unwrap_or(0)
}

fn check_unique(kind: &str, names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::Structural(format!("duplicate {kind} id {n}")));
        }
    }
    Ok(())
}

fn normalize_arcs(transition: &str, arcs: Arcs, places: usize) -> Result<Arcs> {
    let mut merged: Vec<(PlaceId, u32)> = Vec::with_capacity(arcs.len());
    for (p, w) in arcs {
        if p.index() >= places {
            return Err(Error::Structural(format!(
                "transition {transition} references place index {} out of range",
                p.index()
            )));
        }
        if w == 0 {
            continue;
        }
        if let Some(slot) = merged.iter_mut().find(|(q, _)| *q == p) {
            slot.1 = slot.1.checked_add(w).ok_or_else(|| {
                Error::Arithmetic(format!("arc weight overflow on {transition}"))
            })?;
        } else {
            merged.push((p, w));
        }
    }
    merged.sort_unstable_by_key(|&(p, _)| p);
    Ok(merged)
}

/// A place violating the determinism condition: two of its output transitions
/// carry the same label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeterminismViolation {
    pub place: PlaceId,
    pub first: TransitionId,
    pub second: TransitionId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeterminismReport {
    pub violations: Vec<DeterminismViolation>,
}

impl DeterminismReport {
    pub fn is_deterministic(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A P/T net whose transitions are labeled by input events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynchronizedNet {
    net: PlaceTransitionNet,
    events: Vec<String>,
    labeling: Vec<EventId>,
    // T_e per event, declaration order
    receptive: Vec<Vec<TransitionId>>,
}

impl SynchronizedNet {
    pub fn new(net: PlaceTransitionNet, events: Vec<String>, labeling: Vec<EventId>) -> Result<Self> {
        check_unique("event", &events)?;
        if labeling.len() != net.transition_count() {
            return Err(Error::Structural(format!(
                "{} labels for {} transitions",
                labeling.len(),
                net.transition_count()
            )));
        }
        let mut receptive = vec![Vec::new(); events.len()];
        for (t, e) in labeling.iter().enumerate() {
            let slot = receptive.get_mut(e.index()).ok_or_else(|| {
                Error::Structural(format!(
                    "transition {} carries an event index outside the alphabet",
                    net.transition_name(TransitionId(t))
                ))
            })?;
            slot.push(TransitionId(t));
        }
        Ok(SynchronizedNet {
            net,
            events,
            labeling,
            receptive,
        })
    }

    pub fn builder() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn net(&self) -> &PlaceTransitionNet {
        &self.net
    }

    pub fn place_count(&self) -> usize {
        self.net.place_count()
    }

    pub fn transition_count(&self) -> usize {
        self.net.transition_count()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len()).map(EventId)
    }

    pub fn event_name(&self, e: EventId) -> &str {
        &self.events[e.index()]
    }

    pub fn event_id(&self, name: &str) -> Result<EventId> {
        self.events
            .iter()
            .position(|n| n == name)
            .map(EventId)
            .ok_or_else(|| Error::Input(format!("unknown event {name}")))
    }

    /// Parses space- or comma-separated event names.
    pub fn parse_sequence(&self, text: &str) -> Result<EventSequence> {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| self.event_id(s))
            .collect()
    }

    pub fn label(&self, t: TransitionId) -> EventId {
        self.labeling[t.index()]
    }

    /// `T_e`
    pub fn receptive(&self, e: EventId) -> &[TransitionId] {
        &self.receptive[e.index()]
    }

    pub fn enabled_transitions(&self, m: &Marking) -> Result<Vec<TransitionId>> {
        self.net.enabled_transitions(m)
    }

    /// True when some transition labeled `e` is enabled at `m`.
    pub fn is_receptive(&self, m: &Marking, e: EventId) -> bool {
        self.receptive[e.index()]
            .iter()
            .any(|&t| self.net.is_enabled(m, t))
    }

    fn check_event(&self, e: EventId) -> Result<()> {
        if e.index() >= self.events.len() {
            return Err(Error::Input(format!("unknown event index {}", e.index())));
        }
        Ok(())
    }

    /// Fires every enabled transition of `T_e` once, all against the marking `m`.
    pub fn apply_event(&self, m: &Marking, e: EventId) -> Result<Marking> {
        self.check_event(e)?;
        self.net.check_marking(m)?;
        self.fire_unchecked(m, e)
    }

    // Dimensions already validated by the caller.
    pub(crate) fn fire_unchecked(&self, m: &Marking, e: EventId) -> Result<Marking> {
        let mut next = m.0.clone();
        let mut fired = false;
        for &t in &self.receptive[e.index()] {
            if !self.net.is_enabled(m, t) {
                continue;
            }
            fired = true;
            for &(p, w) in self.net.pre(t) {
                let slot = &mut next[p.index()];
                *slot = slot.checked_sub(w).ok_or_else(|| {
                    Error::Nondeterministic(format!(
                        "event {} empties place {} twice",
                        self.event_name(e),
                        self.net.place_name(p)
                    ))
                })?;
            }
        }
        if !fired {
            return Ok(m.clone());
        }
        for &t in &self.receptive[e.index()] {
            if !self.net.is_enabled(m, t) {
                continue;
            }
            for &(p, w) in self.net.post(t) {
                let slot = &mut next[p.index()];
                *slot = slot.checked_add(w).ok_or_else(|| {
                    Error::Arithmetic(format!("token overflow in {}", self.net.place_name(p)))
                })?;
            }
        }
        Ok(Marking(next))
    }

    pub fn apply_sequence(&self, m: &Marking, w: &EventSequence) -> Result<Marking> {
        self.net.check_marking(m)?;
        for e in w.iter() {
            self.check_event(e)?;
        }
        let mut current = m.clone();
        for e in w.iter() {
            current = self.fire_unchecked(&current, e)?;
        }
        Ok(current)
    }

    pub fn check_determinism(&self) -> DeterminismReport {
        let mut violations = Vec::new();
        for p in self.net.places() {
            let outs = self.net.outputs_of(p);
            for (i, &t) in outs.iter().enumerate() {
                for &u in &outs[i + 1..] {
                    if self.label(t) == self.label(u) {
                        violations.push(DeterminismViolation {
                            place: p,
                            first: t,
                            second: u,
                        });
                    }
                }
            }
        }
        DeterminismReport { violations }
    }

    pub fn require_deterministic(&self) -> Result<()> {
        let report = self.check_determinism();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Nondeterministic(format!(
                "place {} has output transitions {} and {} with label {}",
                self.net.place_name(v.place),
                self.net.transition_name(v.first),
                self.net.transition_name(v.second),
                self.event_name(self.label(v.first))
            ))),
        }
    }

    /// `f*(σ)`
    pub fn label_sequence(&self, sigma: &[TransitionId]) -> Result<EventSequence> {
        sigma
            .iter()
            .map(|&t| {
                if t.index() < self.transition_count() {
                    Ok(self.label(t))
                } else {
                    Err(Error::Input(format!("unknown transition index {}", t.index())))
                }
            })
            .collect()
    }

    /// Marking from `(place name, count)` pairs; unlisted places are empty.
    pub fn marking_from_names<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, u32)>,
    ) -> Result<Marking> {
        let mut m = Marking::zeros(self.place_count());
        for (name, count) in pairs {
            let p = self.net.place_id(name)?;
            m.0[p.index()] = count;
        }
        Ok(m)
    }

    /// The subnet on `places` and `transitions`, keeping the whole alphabet so
    /// event indices stay valid. Arcs to dropped places are removed.
    pub fn restrict(&self, places: &[PlaceId], transitions: &[TransitionId]) -> Result<SynchronizedNet> {
        let mut new_index: HashMap<PlaceId, PlaceId> = HashMap::new();
        for (i, &p) in places.iter().enumerate() {
            if p.index() >= self.place_count() {
                return Err(Error::Input(format!("place index {} out of range", p.index())));
            }
            if new_index.insert(p, PlaceId(i)).is_some() {
                return Err(Error::Input(format!(
                    "place {} listed twice",
                    self.net.place_name(p)
                )));
            }
        }
        let keep = |arcs: &[(PlaceId, u32)]| -> Arcs {
            arcs.iter()
                .filter_map(|&(p, w)| new_index.get(&p).map(|&q| (q, w)))
                .collect()
        };
        let mut spec = Vec::with_capacity(transitions.len());
        let mut labels = Vec::with_capacity(transitions.len());
        for &t in transitions {
            if t.index() >= self.transition_count() {
                return Err(Error::Input(format!("transition index {} out of range", t.index())));
            }
            spec.push((
                self.net.transition_name(t).to_string(),
                keep(self.net.pre(t)),
                keep(self.net.post(t)),
            ));
            labels.push(self.label(t));
        }
        let names = places
            .iter()
            .map(|&p| self.net.place_name(p).to_string())
            .collect();
        let net = PlaceTransitionNet::new(names, spec)?;
        SynchronizedNet::new(net, self.events.clone(), labels)
    }
}

/// Name-based construction of a [`SynchronizedNet`].
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    events: Vec<String>,
    /// `(id, label, pre, post)` by name.
    transitions: Vec<(String, String, NamedArcs, NamedArcs)>,
}

type NamedArcs = Vec<(String, u32)>;

impl NetBuilder {
    pub fn places<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.places.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn events<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.events.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn transition(mut self, id: &str, label: &str, pre: &[(&str, u32)], post: &[(&str, u32)]) -> Self {
        let own = |arcs: &[(&str, u32)]| arcs.iter().map(|&(p, w)| (p.to_string(), w)).collect();
        self.transitions
            .push((id.to_string(), label.to_string(), own(pre), own(post)));
        self
    }

    /// Unit-weight state-machine transition `from -> to`.
    pub fn arc(self, id: &str, label: &str, from: &str, to: &str) -> Self {
        self.transition(id, label, &[(from, 1)], &[(to, 1)])
    }

    pub fn build(self) -> Result<SynchronizedNet> {
        let place_index: HashMap<&str, usize> = self
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let event_index: HashMap<&str, usize> = self
            .events
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        let resolve = |t: &str, arcs: &[(String, u32)]| -> Result<Arcs> {
            arcs.iter()
                .map(|(p, w)| {
                    place_index
                        .get(p.as_str())
                        .map(|&i| (PlaceId(i), *w))
                        .ok_or_else(|| {
                            Error::Structural(format!("transition {t} references unknown place {p}"))
                        })
                })
                .collect()
        };
        let mut spec = Vec::with_capacity(self.transitions.len());
        let mut labels = Vec::with_capacity(self.transitions.len());
        for (id, label, pre, post) in &self.transitions {
            let e = event_index.get(label.as_str()).ok_or_else(|| {
                Error::Structural(format!("transition {id} carries unknown label {label}"))
            })?;
            labels.push(EventId(*e));
            spec.push((id.clone(), resolve(id, pre)?, resolve(id, post)?));
        }
        let net = PlaceTransitionNet::new(self.places.clone(), spec)?;
        SynchronizedNet::new(net, self.events, labels)
    }
}

/// Every distribution of `tokens` tokens over `places` places, in
/// reverse-lexicographic order starting from all tokens in the first place.
pub fn token_distributions(places: usize, tokens: u32) -> TokenDistributions {
    let first = if places == 0 {
        None
    } else {
        let mut v = vec![0; places];
        v[0] = tokens;
        Some(v)
    };
    TokenDistributions { next: first }
}

pub struct TokenDistributions {
    next: Option<Vec<u32>>,
}

impl Iterator for TokenDistributions {
    type Item = Marking;

    fn next(&mut self) -> Option<Marking> {
        let current = self.next.take()?;
        let m = current.len();
        // Move one token from the rightmost nonzero non-last position one step
        // right, gathering everything after it.
        let mut succ = current.clone();
        let pivot = (0..m.saturating_sub(1)).rev().find(|&i| succ[i] > 0);
        if let Some(i) = pivot {
            let tail: u32 = succ[i + 1..].iter().sum();
            succ[i] -= 1;
            for slot in succ[i + 1..].iter_mut() {
                *slot = 0;
            }
            succ[i + 1] = tail + 1;
            self.next = Some(succ);
        }
        Some(Marking(current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(net: &SynchronizedNet, ts: &[TransitionId]) -> Vec<String> {
        ts.iter()
            .map(|&t| net.net().transition_name(t).to_string())
            .collect()
    }

    #[test]
    fn weighted_net_enables_t1_and_t3() {
        let net = fixtures::weighted_three_place();
        let m = Marking::new(vec![2, 0, 1]);
        let enabled = net.enabled_transitions(&m).unwrap();
        assert_eq!(names(&net, &enabled), ["t1", "t3"]);
    }

    #[test]
    fn zero_marking_enables_nothing() {
        let net = fixtures::weighted_three_place();
        assert!(net.enabled_transitions(&Marking::zeros(3)).unwrap().is_empty());
    }

    #[test]
    fn four_place_sm_enables_only_t1_from_p1() {
        let net = fixtures::four_place_sm();
        let enabled = net
            .enabled_transitions(&Marking::new(vec![1, 0, 0, 0]))
            .unwrap();
        assert_eq!(names(&net, &enabled), ["t1"]);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let net = fixtures::four_place_sm();
        assert!(matches!(
            net.enabled_transitions(&Marking::zeros(3)),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn simultaneous_firing() {
        let net = fixtures::weighted_three_place();
        let e1 = net.event_id("e1").unwrap();
        let next = net.apply_event(&Marking::new(vec![2, 0, 1]), e1).unwrap();
        assert_eq!(next, Marking::new(vec![1, 1, 0]));
        // interleaved single firings would have produced these instead
        assert_ne!(next, Marking::new(vec![0, 1, 1]));
        assert_ne!(next, Marking::new(vec![3, 0, 0]));
    }

    #[test]
    fn non_receptive_event_is_identity() {
        let net = fixtures::weighted_three_place();
        let e2 = net.event_id("e2").unwrap();
        let m = Marking::new(vec![2, 0, 0]);
        assert_eq!(net.apply_event(&m, e2).unwrap(), m);
    }

    #[test]
    fn unknown_event_is_input_error() {
        let net = fixtures::weighted_three_place();
        assert!(matches!(
            net.apply_event(&Marking::zeros(3), EventId(7)),
            Err(Error::Input(_))
        ));
        assert!(matches!(net.event_id("e9"), Err(Error::Input(_))));
    }

    #[test]
    fn four_place_sm_single_steps() {
        let net = fixtures::four_place_sm();
        let e2 = net.event_id("e2").unwrap();
        assert_eq!(
            net.apply_event(&Marking::new(vec![0, 1, 0, 0]), e2).unwrap(),
            Marking::new(vec![0, 0, 1, 0])
        );
    }

    #[test]
    fn sequences() {
        let net = fixtures::four_place_sm();
        let w = net.parse_sequence("e1 e2 e5 e4").unwrap();
        let target = Marking::new(vec![0, 0, 0, 1]);
        assert_eq!(
            net.apply_sequence(&Marking::new(vec![1, 0, 0, 0]), &w).unwrap(),
            target
        );
        assert_eq!(
            net.apply_sequence(&Marking::new(vec![0, 0, 1, 0]), &w).unwrap(),
            target
        );
        let m = Marking::new(vec![0, 1, 0, 0]);
        assert_eq!(net.apply_sequence(&m, &EventSequence::empty()).unwrap(), m);
    }

    #[test]
    fn single_server_ignores_enabling_degree() {
        let net = fixtures::four_place_sm();
        let e1 = net.event_id("e1").unwrap();
        let next = net.apply_event(&Marking::new(vec![3, 0, 0, 0]), e1).unwrap();
        assert_eq!(next, Marking::new(vec![2, 1, 0, 0]));
    }

    #[test]
    fn determinism_reports() {
        assert!(fixtures::four_place_sm().check_determinism().is_deterministic());
        // t5 and t2 share e2 but leave different places
        assert!(fixtures::four_place_sm_shared_label()
            .check_determinism()
            .is_deterministic());

        let bad = SynchronizedNet::builder()
            .places(["a", "b", "c"])
            .events(["e1"])
            .arc("t1", "e1", "a", "b")
            .arc("t2", "e1", "a", "c")
            .arc("t3", "e1", "b", "a")
            .build()
            .unwrap();
        let report = bad.check_determinism();
        assert_eq!(
            report.violations,
            vec![DeterminismViolation {
                place: PlaceId(0),
                first: TransitionId(0),
                second: TransitionId(1),
            }]
        );
        assert!(bad.require_deterministic().is_err());
        // both transitions want the single token in a
        let e1 = bad.event_id("e1").unwrap();
        assert!(matches!(
            bad.apply_event(&Marking::new(vec![1, 0, 0]), e1),
            Err(Error::Nondeterministic(_))
        ));
    }

    #[test]
    fn state_machine_predicate() {
        assert!(fixtures::four_place_sm().net().is_state_machine());
        assert!(!fixtures::weighted_three_place().net().is_state_machine());
        let lone = SynchronizedNet::builder()
            .places(["p"])
            .events(["e"])
            .build()
            .unwrap();
        assert!(lone.net().is_state_machine());
    }

    #[test]
    fn labels() {
        let net = fixtures::four_place_sm();
        let t = |n: &str| net.net().transition_id(n).unwrap();
        let sigma = [t("t1"), t("t2"), t("t5"), t("t4")];
        let w = net.label_sequence(&sigma).unwrap();
        assert_eq!(w.display(&net).to_string(), "e1 e2 e5 e4");
        assert!(net.label_sequence(&[]).unwrap().is_empty());
        assert_eq!(net.label_sequence(&[t("t4")]).unwrap().display(&net).to_string(), "e4");
        assert!(net.label_sequence(&[TransitionId(99)]).is_err());
    }

    #[test]
    fn builder_rejects_bad_structure() {
        assert!(SynchronizedNet::builder().events(["e"]).build().is_err());
        assert!(SynchronizedNet::builder()
            .places(["p", "p"])
            .build()
            .is_err());
        assert!(SynchronizedNet::builder()
            .places(["p"])
            .events(["e"])
            .transition("t", "e", &[], &[])
            .build()
            .is_err());
        assert!(SynchronizedNet::builder()
            .places(["p"])
            .events(["e"])
            .arc("t", "x", "p", "p")
            .build()
            .is_err());
        assert!(SynchronizedNet::builder()
            .places(["p"])
            .events(["e"])
            .arc("t", "e", "p", "q")
            .build()
            .is_err());
    }

    #[test]
    fn distributions_enumerate_compositions() {
        let all: Vec<Marking> = token_distributions(4, 2).collect();
        assert_eq!(all.len(), 10);
        let unique: HashSet<&Marking> = all.iter().collect();
        assert_eq!(unique.len(), 10);
        assert!(all.iter().all(|m| m.total() == 2));
        assert_eq!(token_distributions(3, 0).count(), 1);
        assert_eq!(token_distributions(1, 5).count(), 1);
        assert_eq!(token_distributions(4, 3).count(), 20);
    }

    #[test]
    fn restriction_keeps_alphabet() {
        let net = fixtures::four_place_sm();
        let p = |n: &str| net.net().place_id(n).unwrap();
        let t = |n: &str| net.net().transition_id(n).unwrap();
        let sub = net.restrict(&[p("p2"), p("p3")], &[t("t2"), t("t5")]).unwrap();
        assert_eq!(sub.place_count(), 2);
        assert_eq!(sub.event_count(), net.event_count());
        assert!(sub.net().is_state_machine());
        assert_eq!(sub.event_name(sub.label(TransitionId(1))), "e5");
    }
}
