//! The JSON net file format.
//!
//! ```json
//! {
//!   "places": ["p1", "p2"],
//!   "alphabet": ["a", "b"],
//!   "transitions": [
//!     {"id": "t1", "label": "a", "pre": {"p1": 1}, "post": {"p2": 1}},
//!     {"id": "t2", "label": "b", "pre": {"p2": 1}, "post": {"p1": 1}}
//!   ],
//!   "marking": {"p1": 1},
//!   "target_place": "p2"
//! }
//! ```
//!
//! `marking`, `target_marking`, `target_place` and `subnets` are optional.
//! Place order in `places` fixes the marking vector order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{Marking, PlaceId, SynchronizedNet};
use crate::subnet::SubnetDecomposition;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub pre: BTreeMap<String, u32>,
    #[serde(default)]
    pub post: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubnetDoc {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    /// Wanted marking of this subnet's places; unlisted places are empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BTreeMap<String, u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub places: Vec<String>,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marking: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_marking: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_place: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subnets: Option<Vec<SubnetDoc>>,
}

impl NetDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_net(net: &SynchronizedNet) -> Self {
        let pt = net.net();
        let arcs = |arcs: &[(PlaceId, u32)]| -> BTreeMap<String, u32> {
            arcs.iter()
                .map(|&(p, w)| (pt.place_name(p).to_string(), w))
                .collect()
        };
        NetDocument {
            places: pt.places().map(|p| pt.place_name(p).to_string()).collect(),
            alphabet: net.events().map(|e| net.event_name(e).to_string()).collect(),
            transitions: pt
                .transitions()
                .map(|t| TransitionDoc {
                    id: pt.transition_name(t).to_string(),
                    label: net.event_name(net.label(t)).to_string(),
                    pre: arcs(pt.pre(t)),
                    post: arcs(pt.post(t)),
                })
                .collect(),
            marking: None,
            target_marking: None,
            target_place: None,
            subnets: None,
        }
    }

    pub fn to_net(&self) -> Result<SynchronizedNet> {
        let mut b = SynchronizedNet::builder()
            .places(self.places.iter())
            .events(self.alphabet.iter());
        for t in &self.transitions {
            let pre: Vec<(&str, u32)> = t.pre.iter().map(|(p, &w)| (p.as_str(), w)).collect();
            let post: Vec<(&str, u32)> = t.post.iter().map(|(p, &w)| (p.as_str(), w)).collect();
            b = b.transition(&t.id, &t.label, &pre, &post);
        }
        b.build()
    }

    pub fn marking(&self, net: &SynchronizedNet) -> Result<Option<Marking>> {
        named_marking(net, self.marking.as_ref())
    }

    pub fn target_marking(&self, net: &SynchronizedNet) -> Result<Option<Marking>> {
        named_marking(net, self.target_marking.as_ref())
    }

    pub fn target_place(&self, net: &SynchronizedNet) -> Result<Option<PlaceId>> {
        self.target_place
            .as_deref()
            .map(|name| net.net().place_id(name))
            .transpose()
    }

    /// The decomposition and, when every subnet lists one, the per-subnet targets
    /// in each subnet's sorted place order.
    pub fn subnets(&self, net: &SynchronizedNet) -> Result<Option<(SubnetDecomposition, Option<Vec<Marking>>)>> {
        let Some(docs) = &self.subnets else {
            return Ok(None);
        };
        let names: Vec<(Vec<&str>, Vec<&str>)> = docs
            .iter()
            .map(|s| {
                (
                    s.places.iter().map(String::as_str).collect(),
                    s.transitions.iter().map(String::as_str).collect(),
                )
            })
            .collect();
        let d = SubnetDecomposition::from_names(net, &names)?;
        let mut targets = Vec::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            let Some(target) = &doc.target else {
                return Ok(Some((d, None)));
            };
            let mut counts = vec![0u32; d.subnets[i].places.len()];
            for (name, &c) in target {
                let p = net.net().place_id(name)?;
                let local = d.subnets[i].places.iter().position(|&q| q == p).ok_or_else(|| {
                    Error::Input(format!("target place {name} is not in subnet {i}"))
                })?;
                counts[local] = c;
            }
            targets.push(Marking::new(counts));
        }
        Ok(Some((d, Some(targets))))
    }
}

fn named_marking(net: &SynchronizedNet, map: Option<&BTreeMap<String, u32>>) -> Result<Option<Marking>> {
    map.map(|m| net.marking_from_names(m.iter().map(|(p, &c)| (p.as_str(), c))))
        .transpose()
}

/// Parses `a=1,b=2` or `a:1 b:2`; a bare name counts one token.
pub fn parse_marking_spec(net: &SynchronizedNet, text: &str) -> Result<Marking> {
    let mut pairs = Vec::new();
    for item in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let (name, count) = match item.split_once(['=', ':']) {
            Some((n, c)) => (
                n,
                c.parse::<u32>()
                    .map_err(|_| Error::Input(format!("bad token count in `{item}`")))?,
            ),
            None => (item, 1),
        };
        pairs.push((name, count));
    }
    net.marking_from_names(pairs)
}
