//! The certified output shared by every synchronization method.

use std::fmt;

use crate::error::{Error, Result};
use crate::net::{EventSequence, Marking, PlaceId, SynchronizedNet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SyncMethod {
    /// Greedy merge on the completed reachability graph.
    Rg,
    /// Structural path search on a strongly connected state machine.
    Sts,
    /// Level-by-level composition over the condensed component graph.
    Condensed,
    /// Concatenation over state-machine subnets.
    Subnet,
}

impl SyncMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SyncMethod::Rg => "rg",
            SyncMethod::Sts => "sts",
            SyncMethod::Condensed => "condensed",
            SyncMethod::Subnet => "subnet",
        }
    }
}

impl fmt::Display for SyncMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A synchronizing sequence together with the marking it certifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncResult {
    pub sequence: EventSequence,
    pub target: Marking,
    /// Places whose final marking is not certified; their entries in
    /// `target` are zero placeholders.
    pub unknown_places: Vec<PlaceId>,
    pub method: SyncMethod,
    /// Number of initial markings the sequence was replayed from.
    pub verified_from: usize,
}

impl SyncResult {
    pub fn target_display(&self) -> String {
        if self.unknown_places.is_empty() {
            return self.target.to_string();
        }
        let cells: Vec<String> = self
            .target
            .counts()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if self.unknown_places.contains(&PlaceId(i)) {
                    "?".to_string()
                } else {
                    c.to_string()
                }
            })
            .collect();
        format!("[{}]", cells.join(" "))
    }
}

/// Replays `w` from every start marking and checks it lands on `target`.
/// Returns the number of markings checked.
pub fn verify_from<I>(net: &SynchronizedNet, starts: I, w: &EventSequence, target: &Marking) -> Result<usize>
where
    I: IntoIterator<Item = Marking>,
{
    let mut count = 0;
    for m in starts {
        let end = net.apply_sequence(&m, w)?;
        if &end != target {
            return Err(Error::Consistency(format!(
                "sequence `{}` drives {m} to {end}, expected {target}",
                w.display(net)
            )));
        }
        count += 1;
    }
    Ok(count)
}
