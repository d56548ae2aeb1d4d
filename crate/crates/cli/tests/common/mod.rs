//! Independent oracles shared by the integration tests. Only the net's arc
//! and label tables are read from the library; firing, reachability and
//! subset search are re-implemented here.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;
use std::process::{Command, Output};

use petsync::{SynchronizedNet, TransitionId};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.json"))
}

pub fn petsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_petsync"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Every transition labelled `e` and enabled at `m` fires once; all
/// enabling is judged on `m` itself.
pub fn fire(net: &SynchronizedNet, m: &[u32], e: &str) -> Vec<u32> {
    let pt = net.net();
    let mut next: Vec<i64> = m.iter().map(|&c| i64::from(c)).collect();
    for i in 0..net.transition_count() {
        let t = TransitionId(i);
        if net.event_name(net.label(t)) != e {
            continue;
        }
        if pt.pre(t).iter().all(|&(p, w)| m[p.index()] >= w) {
            for &(p, w) in pt.pre(t) {
                next[p.index()] -= i64::from(w);
            }
            for &(p, w) in pt.post(t) {
                next[p.index()] += i64::from(w);
            }
        }
    }
    assert!(next.iter().all(|&c| c >= 0), "conflicting transitions at {m:?} on {e}");
    next.into_iter().map(|c| c as u32).collect()
}

pub fn run(net: &SynchronizedNet, m: &[u32], word: &[String]) -> Vec<u32> {
    word.iter().fold(m.to_vec(), |cur, e| fire(net, &cur, e))
}

pub fn events(net: &SynchronizedNet) -> Vec<String> {
    net.events().map(|e| net.event_name(e).to_string()).collect()
}

/// Markings reachable from any of `starts`.
pub fn reachable(net: &SynchronizedNet, starts: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let evs = events(net);
    let mut seen: BTreeSet<Vec<u32>> = starts.iter().cloned().collect();
    let mut queue: VecDeque<Vec<u32>> = starts.iter().cloned().collect();
    while let Some(m) = queue.pop_front() {
        for e in &evs {
            let n = fire(net, &m, e);
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    seen.into_iter().collect()
}

/// All markings of `m` places with exactly `k` tokens, by recursion.
pub fn k_token_markings(m: usize, k: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in k_token_markings(m - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn binomial(n: u64, r: u64) -> u64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Breadth-first search over subsets of `states`, from the full set to
/// `{target}`. Returns a shortest word when one exists.
pub fn subset_search(net: &SynchronizedNet, states: &[Vec<u32>], target: &[u32]) -> Option<Vec<String>> {
    let evs = events(net);
    let start: BTreeSet<Vec<u32>> = states.iter().cloned().collect();
    let goal: BTreeSet<Vec<u32>> = [target.to_vec()].into_iter().collect();
    type Set = BTreeSet<Vec<u32>>;
    let mut parent: HashMap<Set, Option<(Set, String)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    while let Some(set) = queue.pop_front() {
        if set == goal {
            let mut word = Vec::new();
            let mut cur = set;
            while let Some(Some((prev, e))) = parent.get(&cur).cloned() {
                word.push(e);
                cur = prev;
            }
            word.reverse();
            return Some(word);
        }
        for e in &evs {
            let next: BTreeSet<Vec<u32>> = set.iter().map(|m| fire(net, m, e)).collect();
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((set.clone(), e.clone())));
                queue.push_back(next);
            }
        }
    }
    None
}
