//! DFG filtering: every node stays on a start-to-end path through its
//! highest-capacity connections, plus all edges above a frequency percentile.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use super::dfg::{Dfg, Node};
use super::DiscoveryError;

/// Nearest-rank percentile of `values`; `p` in `[0, 1]`.
pub fn percentile(values: &[u64], p: f64) -> u64 {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Maximum-bottleneck tree rooted at `root`. `adj` maps a node to its
/// neighbours with edge capacities. Returns `(capacity, parent)` per reached node.
pub fn widest_tree(
    root: &Node,
    adj: &BTreeMap<Node, Vec<(Node, u64)>>,
) -> BTreeMap<Node, (u64, Option<Node>)> {
    let mut best: BTreeMap<Node, (u64, Option<Node>)> = BTreeMap::new();
    let mut done: BTreeSet<Node> = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    best.insert(root.clone(), (u64::MAX, None));
    heap.push((u64::MAX, Reverse(root.clone())));
    while let Some((cap, Reverse(n))) = heap.pop() {
        if !done.insert(n.clone()) {
            continue;
        }
        for (m, f) in adj.get(&n).into_iter().flatten() {
            if done.contains(m) {
                continue;
            }
            let c = cap.min(*f);
            let better = best.get(m).is_none_or(|(old, _)| c > *old);
            if better {
                best.insert(m.clone(), (c, Some(n.clone())));
                heap.push((c, Reverse(m.clone())));
            }
        }
    }
    best
}

/// Keeps, per node, the edge that reaches it on a widest path from the start,
/// the edge leaving it on a widest path to the end, its most frequent
/// incoming and outgoing edges, and every edge at or above the
/// `epsilon_percentile` of those most frequent edges' frequencies.
pub fn filter_dfg(dfg: &Dfg, epsilon_percentile: f64) -> Result<Dfg, DiscoveryError> {
    let mut fwd: BTreeMap<Node, Vec<(Node, u64)>> = BTreeMap::new();
    let mut bwd: BTreeMap<Node, Vec<(Node, u64)>> = BTreeMap::new();
    for ((a, b), &f) in &dfg.edges {
        fwd.entry(a.clone()).or_default().push((b.clone(), f));
        bwd.entry(b.clone()).or_default().push((a.clone(), f));
    }
    let from_start = widest_tree(&Node::Start, &fwd);
    let to_end = widest_tree(&Node::End, &bwd);

    let mut keep: BTreeSet<(Node, Node)> = BTreeSet::new();
    let mut best: Vec<u64> = Vec::new();
    for n in dfg.nodes.keys() {
        let Some((_, parent)) = from_start.get(n) else {
            return Err(DiscoveryError::DisconnectedGraph(n.to_string()));
        };
        let Some((_, child)) = to_end.get(n) else {
            return Err(DiscoveryError::DisconnectedGraph(n.to_string()));
        };
        if let Some(p) = parent {
            keep.insert((p.clone(), n.clone()));
        }
        if let Some(c) = child {
            keep.insert((n.clone(), c.clone()));
        }
        // most frequent edges; ties go to the smallest neighbour
        if let Some((m, f)) = fwd.get(n).and_then(|v| v.iter().max_by_key(|(m, f)| (*f, Reverse(m)))) {
            keep.insert((n.clone(), m.clone()));
            best.push(*f);
        }
        if let Some((m, f)) = bwd.get(n).and_then(|v| v.iter().max_by_key(|(m, f)| (*f, Reverse(m)))) {
            keep.insert((m.clone(), n.clone()));
            best.push(*f);
        }
    }
    let threshold = percentile(&best, epsilon_percentile);
    for (e, &f) in &dfg.edges {
        if f >= threshold {
            keep.insert(e.clone());
        }
    }
    let mut out = dfg.clone();
    out.edges.retain(|e, _| keep.contains(e));
    Ok(out)
}

/// Nodes reachable from `from` following edges forward (or backward).
pub fn reachable(dfg: &Dfg, from: &Node, forward: bool) -> BTreeSet<Node> {
    let mut seen = BTreeSet::from([from.clone()]);
    let mut stack = vec![from.clone()];
    while let Some(n) = stack.pop() {
        for (a, b) in dfg.edges.keys() {
            let (src, dst) = if forward { (a, b) } else { (b, a) };
            if *src == n && seen.insert(dst.clone()) {
                stack.push(dst.clone());
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(edges: &[(&str, &str, u64)]) -> Dfg {
        let node = |s: &str| match s {
            "S" => Node::Start,
            "E" => Node::End,
            n => Node::activity(n),
        };
        let mut d = Dfg::default();
        for &(a, b, f) in edges {
            d.edges.insert((node(a), node(b)), f);
            d.nodes.insert(node(a), 1);
            d.nodes.insert(node(b), 1);
        }
        d
    }

    #[test]
    fn percentile_nearest_rank() {
        assert_eq!(percentile(&[10, 9, 1], 0.5), 9);
        assert_eq!(percentile(&[10, 9, 1], 0.0), 1);
        assert_eq!(percentile(&[10, 9, 1], 1.0), 10);
    }

    #[test]
    fn linear_graph_unchanged() {
        let d = graph(&[("S", "a", 3), ("a", "b", 3), ("b", "E", 3)]);
        assert_eq!(filter_dfg(&d, 0.9).unwrap(), d);
    }

    #[test]
    fn weak_edge_dropped() {
        // a -> c (freq 1) is neither a widest connection nor above the cut
        let d = graph(&[
            ("S", "a", 10),
            ("a", "b", 10),
            ("b", "c", 9),
            ("a", "c", 1),
            ("c", "E", 10),
        ]);
        let f = filter_dfg(&d, 0.5).unwrap();
        assert!(!f.edges.contains_key(&(Node::activity("a"), Node::activity("c"))));
        assert_eq!(f.edges.len(), 4);
    }

    #[test]
    fn unreachable_node_is_disconnected() {
        let d = graph(&[("S", "a", 1), ("a", "E", 1), ("x", "E", 1)]);
        assert_eq!(
            filter_dfg(&d, 0.5).unwrap_err(),
            DiscoveryError::DisconnectedGraph("x".into())
        );
    }

    /// Maximum bottleneck over all simple paths, by exhaustive search.
    fn brute_bottleneck(d: &Dfg, from: &Node, to: &Node) -> u64 {
        fn go(d: &Dfg, at: &Node, to: &Node, cap: u64, seen: &mut Vec<Node>) -> u64 {
            if at == to {
                return cap;
            }
            let mut best = 0;
            for ((a, b), &f) in &d.edges {
                if a == at && !seen.contains(b) {
                    seen.push(b.clone());
                    best = best.max(go(d, b, to, cap.min(f), seen));
                    seen.pop();
                }
            }
            best
        }
        go(d, from, to, u64::MAX, &mut vec![from.clone()])
    }

    fn arb_graph() -> impl Strategy<Value = Dfg> {
        // up to 4 activities plus start/end, random edge subset and weights
        (1usize..=4, prop::collection::vec((0usize..6, 0usize..6, 1u64..20), 1..20)).prop_map(
            |(n, raw)| {
                let names = ["a", "b", "c", "d"];
                let node = |i: usize| match i {
                    0 => Node::Start,
                    5 => Node::End,
                    k => Node::activity(names[(k - 1) % n]),
                };
                let mut d = Dfg::default();
                // guarantee connectivity with a backbone chain
                let mut prev = Node::Start;
                for name in names.iter().take(n) {
                    let m = Node::activity(name);
                    d.edges.insert((prev.clone(), m.clone()), 1);
                    prev = m;
                }
                d.edges.insert((prev, Node::End), 1);
                for (a, b, f) in raw {
                    let (a, b) = (node(a), node(b));
                    if a == Node::End || b == Node::Start {
                        continue;
                    }
                    d.edges.insert((a, b), f);
                }
                for (a, b) in d.edges.keys().cloned().collect::<Vec<_>>() {
                    d.nodes.insert(a, 1);
                    d.nodes.insert(b, 1);
                }
                d
            },
        )
    }

    fn tree_path_capacity(tree: &BTreeMap<Node, (u64, Option<Node>)>, d: &Dfg, n: &Node, forward: bool) -> u64 {
        let mut cap = u64::MAX;
        let mut at = n.clone();
        while let Some((_, Some(p))) = tree.get(&at) {
            let f = if forward { d.edge(p, &at) } else { d.edge(&at, p) };
            cap = cap.min(f);
            at = p.clone();
        }
        cap
    }

    proptest! {
        #[test]
        fn filtered_nodes_lie_on_start_end_paths(d in arb_graph(), eps in 0.0f64..=1.0) {
            let f = filter_dfg(&d, eps).unwrap();
            let fwd = reachable(&f, &Node::Start, true);
            let bwd = reachable(&f, &Node::End, false);
            for n in d.nodes.keys() {
                prop_assert!(fwd.contains(n) && bwd.contains(n), "{n} disconnected");
            }
            for e in f.edges.keys() {
                prop_assert!(d.edges.contains_key(e));
            }
            // cut over each node's heaviest incoming and outgoing frequency
            let mut heaviest = Vec::new();
            for n in d.nodes.keys() {
                let outs = d.edges.iter().filter(|((a, _), _)| a == n).map(|(_, &f)| f).max();
                let ins = d.edges.iter().filter(|((_, b), _)| b == n).map(|(_, &f)| f).max();
                heaviest.extend(outs);
                heaviest.extend(ins);
            }
            let cut = percentile(&heaviest, eps);
            for (e, &fr) in &d.edges {
                if fr >= cut {
                    prop_assert!(f.edges.contains_key(e));
                }
            }
        }

        #[test]
        fn widest_tree_matches_exhaustive_search(d in arb_graph()) {
            let mut adj: BTreeMap<Node, Vec<(Node, u64)>> = BTreeMap::new();
            for ((a, b), &f) in &d.edges {
                adj.entry(a.clone()).or_default().push((b.clone(), f));
            }
            let tree = widest_tree(&Node::Start, &adj);
            for n in d.nodes.keys().filter(|n| **n != Node::Start) {
                let expected = brute_bottleneck(&d, &Node::Start, n);
                prop_assert_eq!(tree[n].0, expected);
                prop_assert_eq!(tree_path_capacity(&tree, &d, n, true), expected);
            }
        }
    }
}
