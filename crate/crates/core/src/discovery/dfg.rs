//! Directly-follows graph, loop and concurrency detection.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::event_model::{EventLog, HighLevelEvent};

use super::DiscoveryError;

/// DFG node. Orders as start < activities (by name) < end.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Node {
    Start,
    Activity(String),
    End,
}

impl Node {
    pub fn activity(name: &str) -> Self {
        Node::Activity(name.to_string())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Node::Activity(n) => Some(n),
            _ => None,
        }
    }
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Node::Start => f.write_str("▷"),
            Node::Activity(n) => f.write_str(n),
            Node::End => f.write_str("□"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Dfg {
    /// Occurrence count per node; start and end count traces.
    pub nodes: BTreeMap<Node, u64>,
    pub edges: BTreeMap<(Node, Node), u64>,
    /// Occurrences of `a b a` with `a != b`, keyed `(a, b)`.
    pub aba: BTreeMap<(String, String), u64>,
    pub trace_count: u64,
}

/// Unordered activity pair, stored with the smaller name first.
pub type Pair = (String, String);

pub fn pair(a: &str, b: &str) -> Pair {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Loops {
    pub self_loops: BTreeSet<String>,
    pub short_loops: BTreeSet<Pair>,
}

impl Dfg {
    pub fn edge(&self, a: &Node, b: &Node) -> u64 {
        self.edges
            .get(&(a.clone(), b.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn activity_edge(&self, a: &str, b: &str) -> u64 {
        self.edge(&Node::activity(a), &Node::activity(b))
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().filter_map(Node::name)
    }

    pub fn successors<'a>(&'a self, n: &'a Node) -> impl Iterator<Item = (&'a Node, u64)> + 'a {
        self.edges
            .iter()
            .filter(move |((a, _), _)| a == n)
            .map(|((_, b), &f)| (b, f))
    }

    pub fn predecessors<'a>(&'a self, n: &'a Node) -> impl Iterator<Item = (&'a Node, u64)> + 'a {
        self.edges
            .iter()
            .filter(move |((_, b), _)| b == n)
            .map(|((a, _), &f)| (a, f))
    }
}

/// Counts direct successions over all non-empty traces.
pub fn build_dfg(log: &EventLog<HighLevelEvent>) -> Result<Dfg, DiscoveryError> {
    let mut dfg = Dfg::default();
    for trace in log.traces() {
        if trace.events.is_empty() {
            continue;
        }
        dfg.trace_count += 1;
        *dfg.nodes.entry(Node::Start).or_default() += 1;
        *dfg.nodes.entry(Node::End).or_default() += 1;
        let names: Vec<&str> = trace.events.iter().map(|e| e.name.as_str()).collect();
        let mut prev = Node::Start;
        for n in &names {
            let node = Node::activity(n);
            *dfg.nodes.entry(node.clone()).or_default() += 1;
            *dfg.edges.entry((prev, node.clone())).or_default() += 1;
            prev = node;
        }
        *dfg.edges.entry((prev, Node::End)).or_default() += 1;
        for w in names.windows(3) {
            if w[0] == w[2] && w[0] != w[1] {
                *dfg.aba
                    .entry((w[0].to_string(), w[1].to_string()))
                    .or_default() += 1;
            }
        }
    }
    if dfg.trace_count == 0 {
        return Err(DiscoveryError::EmptyLog);
    }
    Ok(dfg)
}

/// Self loops are `a -> a` edges; short loops are pairs seen as `a b a` or `b a b`.
pub fn detect_loops(dfg: &Dfg) -> Loops {
    let mut loops = Loops::default();
    for (a, b) in dfg.edges.keys() {
        if let (Node::Activity(x), Node::Activity(y)) = (a, b) {
            if x == y {
                loops.self_loops.insert(x.clone());
            }
        }
    }
    for ((a, b), &n) in &dfg.aba {
        if n > 0 {
            loops.short_loops.insert(pair(a, b));
        }
    }
    loops
}

/// The relative imbalance `|f(a,b) - f(b,a)| / (f(a,b) + f(b,a))`, or `None`
/// unless both directions were observed.
pub fn imbalance(ab: u64, ba: u64) -> Option<f64> {
    if ab == 0 || ba == 0 {
        return None;
    }
    Some((ab as f64 - ba as f64).abs() / (ab + ba) as f64)
}

/// Pairs observed in both orders, not forming a loop, with imbalance below `eta`.
pub fn detect_concurrency(dfg: &Dfg, loops: &Loops, eta: f64) -> BTreeSet<Pair> {
    let mut out = BTreeSet::new();
    for (a, b) in dfg.edges.keys() {
        let (Node::Activity(x), Node::Activity(y)) = (a, b) else {
            continue;
        };
        if x >= y {
            continue;
        }
        let p = pair(x, y);
        if loops.short_loops.contains(&p) {
            continue;
        }
        if let Some(r) = imbalance(dfg.activity_edge(x, y), dfg.activity_edge(y, x)) {
            if r < eta {
                out.insert(p);
            }
        }
    }
    out
}

/// Drops both directions of every concurrent pair.
pub fn remove_concurrency(dfg: &Dfg, concurrent: &BTreeSet<Pair>) -> Dfg {
    let mut out = dfg.clone();
    out.edges.retain(|(a, b), _| match (a.name(), b.name()) {
        (Some(x), Some(y)) => !concurrent.contains(&pair(x, y)),
        _ => true,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::Trace;

    pub(crate) fn log(traces: &[&[&str]]) -> EventLog<HighLevelEvent> {
        EventLog::new(
            traces
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    Trace::new(
                        format!("t{i:03}"),
                        t.iter()
                            .enumerate()
                            .map(|(k, n)| HighLevelEvent::controllable(*n, k as u64, (k, k)))
                            .collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn counts_direct_successions() {
        let d = build_dfg(&log(&[&["a", "b"], &["a", "b"]])).unwrap();
        assert_eq!(d.activity_edge("a", "b"), 2);
        assert_eq!(d.edge(&Node::Start, &Node::activity("a")), 2);
        assert_eq!(d.edge(&Node::activity("b"), &Node::End), 2);
        let d = build_dfg(&log(&[&["a", "b", "a"]])).unwrap();
        assert_eq!(d.activity_edge("a", "b"), 1);
        assert_eq!(d.activity_edge("b", "a"), 1);
    }

    #[test]
    fn empty_log() {
        assert_eq!(build_dfg(&log(&[])).unwrap_err(), DiscoveryError::EmptyLog);
        assert_eq!(build_dfg(&log(&[&[]])).unwrap_err(), DiscoveryError::EmptyLog);
    }

    #[test]
    fn loops() {
        let l = detect_loops(&build_dfg(&log(&[&["a", "a", "b"]])).unwrap());
        assert!(l.self_loops.contains("a"));
        let l = detect_loops(&build_dfg(&log(&[&["a", "b", "a", "b"]])).unwrap());
        assert!(l.short_loops.contains(&pair("a", "b")));
    }

    #[test]
    fn imbalance_formula() {
        assert_eq!(imbalance(50, 50), Some(0.0));
        assert_eq!(imbalance(50, 0), None);
        let r = imbalance(52, 48).unwrap();
        assert!((r - 0.04).abs() < 1e-12);
    }

    #[test]
    fn concurrency_excludes_short_loops() {
        let d = build_dfg(&log(&[&["x", "a", "b", "y"], &["x", "b", "a", "y"]])).unwrap();
        let l = detect_loops(&d);
        assert_eq!(detect_concurrency(&d, &l, 0.1), BTreeSet::from([pair("a", "b")]));
        let d = build_dfg(&log(&[&["a", "b", "a"], &["b", "a", "b"]])).unwrap();
        let l = detect_loops(&d);
        assert!(detect_concurrency(&d, &l, 0.9).is_empty());
    }
}
