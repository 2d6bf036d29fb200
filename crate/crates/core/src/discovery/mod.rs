//! Behavioral Petri net discovery.
//!
//! Steps: directly-follows graph, loop detection, concurrency detection,
//! filtering, and gateway construction into a Petri net. A net whose AND
//! gateways turn out unsound is rebuilt without concurrency.

pub mod dfg;
pub mod filter;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_model::{EventLog, HighLevelEvent};
use crate::petri_net::{
    is_sound, marking_of, PetriNet, PetriNetBuilder, PlaceId, Soundness, DEFAULT_STATE_BOUND,
};

pub use dfg::{build_dfg, detect_concurrency, detect_loops, Dfg, Loops, Node, Pair};
pub use filter::filter_dfg;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscoveryError {
    #[error("event log contains no events")]
    EmptyLog,
    #[error("node `{0}` is not on any path from start to end")]
    DisconnectedGraph(String),
    #[error("invalid discovery parameter: {0}")]
    InvalidParams(String),
    #[error("discovered net is not sound: {0}")]
    Unsound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryParams {
    /// Maximum relative imbalance for two activities to count as concurrent.
    pub eta: f64,
    /// Edges at or above this frequency percentile survive filtering.
    pub epsilon_percentile: f64,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        Self {
            eta: 0.4,
            epsilon_percentile: 0.4,
        }
    }
}

impl DiscoveryParams {
    pub fn validate(&self) -> Result<(), DiscoveryError> {
        for (name, v) in [("eta", self.eta), ("epsilon_percentile", self.epsilon_percentile)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(DiscoveryError::InvalidParams(format!("{name}={v} outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Intermediate results of one discovery run.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub dfg: Dfg,
    pub loops: Loops,
    pub concurrency: BTreeSet<Pair>,
    pub filtered: Dfg,
    pub net: PetriNet,
    /// Set when concurrency had to be dropped to obtain a sound net.
    pub sequential_fallback: bool,
}

pub fn discover(log: &EventLog<HighLevelEvent>, params: &DiscoveryParams) -> Result<PetriNet, DiscoveryError> {
    discover_detailed(log, params).map(|d| d.net)
}

pub fn discover_detailed(
    log: &EventLog<HighLevelEvent>,
    params: &DiscoveryParams,
) -> Result<Discovery, DiscoveryError> {
    params.validate()?;
    let dfg = build_dfg(log)?;
    let loops = detect_loops(&dfg);
    let concurrency = detect_concurrency(&dfg, &loops, params.eta);

    if !concurrency.is_empty() {
        let reduced = dfg::remove_concurrency(&dfg, &concurrency);
        if let Ok(filtered) = filter_dfg(&reduced, params.epsilon_percentile) {
            let net = build_net(&filtered, &concurrency);
            if is_sound(&net, DEFAULT_STATE_BOUND).is_sound() {
                return Ok(Discovery {
                    dfg,
                    loops,
                    concurrency,
                    filtered,
                    net,
                    sequential_fallback: false,
                });
            }
        }
        log::info!("concurrent gateways yield no sound net; falling back to choices only");
    }

    let filtered = filter_dfg(&dfg, params.epsilon_percentile)?;
    let net = build_net(&filtered, &BTreeSet::new());
    match is_sound(&net, DEFAULT_STATE_BOUND) {
        Soundness::Sound => Ok(Discovery {
            dfg,
            loops,
            sequential_fallback: !concurrency.is_empty(),
            concurrency: BTreeSet::new(),
            filtered,
            net,
        }),
        other => Err(DiscoveryError::Unsound(format!("{other:?}"))),
    }
}

// ============================================================================
// Gateway construction
// ============================================================================

#[derive(Debug, Clone)]
struct DraftTransition {
    id: String,
    label: Option<String>,
    ins: Vec<usize>,
    outs: Vec<usize>,
    alive: bool,
}

/// Mutable net under construction; places are removed by fusion.
#[derive(Debug, Default)]
struct Draft {
    places: Vec<String>,
    alive: Vec<bool>,
    trans: Vec<DraftTransition>,
    source: usize,
    sink: usize,
}

impl Draft {
    fn place(&mut self, name: String) -> usize {
        self.places.push(name);
        self.alive.push(true);
        self.places.len() - 1
    }

    fn transition(&mut self, id: String, label: Option<String>, ins: Vec<usize>, outs: Vec<usize>) {
        self.trans.push(DraftTransition {
            id,
            label,
            ins,
            outs,
            alive: true,
        });
    }

    fn consumers(&self, p: usize) -> Vec<usize> {
        (0..self.trans.len())
            .filter(|&t| self.trans[t].alive && self.trans[t].ins.contains(&p))
            .collect()
    }

    fn producers(&self, p: usize) -> Vec<usize> {
        (0..self.trans.len())
            .filter(|&t| self.trans[t].alive && self.trans[t].outs.contains(&p))
            .collect()
    }

    /// Replaces `from` by `into` everywhere.
    fn merge(&mut self, from: usize, into: usize) {
        for t in self.trans.iter_mut().filter(|t| t.alive) {
            for list in [&mut t.ins, &mut t.outs] {
                for p in list.iter_mut() {
                    if *p == from {
                        *p = into;
                    }
                }
                list.sort_unstable();
                list.dedup();
            }
        }
        self.alive[from] = false;
        if self.source == from {
            self.source = into;
        }
        if self.sink == from {
            self.sink = into;
        }
    }

    /// Removes one-in/one-out invisible transitions whose places can be fused
    /// without changing the visible language.
    fn fuse(&mut self) {
        loop {
            let mut changed = false;
            for t in 0..self.trans.len() {
                let tr = &self.trans[t];
                if !tr.alive || tr.label.is_some() || tr.ins.len() != 1 || tr.outs.len() != 1 {
                    continue;
                }
                let (p, q) = (tr.ins[0], tr.outs[0]);
                if p == q {
                    self.trans[t].alive = false;
                    changed = true;
                    continue;
                }
                if p == self.source && q == self.sink {
                    continue;
                }
                if self.consumers(p) == [t] && q != self.source {
                    self.trans[t].alive = false;
                    self.merge(p, q);
                    changed = true;
                } else if self.producers(q) == [t] && q != self.sink && p != self.sink {
                    self.trans[t].alive = false;
                    self.merge(q, p);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn finish(self) -> PetriNet {
        let mut b = PetriNetBuilder::new();
        let mut ids = vec![None; self.places.len()];
        for (i, name) in self.places.iter().enumerate() {
            if self.alive[i] {
                ids[i] = Some(b.place(name.clone()));
            }
        }
        for t in self.trans.iter().filter(|t| t.alive) {
            let tid = match &t.label {
                Some(l) => b.visible(t.id.clone(), l.clone()),
                None => b.invisible(t.id.clone()),
            };
            for p in &t.ins {
                b.input(ids[*p].expect("live place"), tid);
            }
            for p in &t.outs {
                b.output(tid, ids[*p].expect("live place"));
            }
        }
        let n = b.place_count();
        let src: PlaceId = ids[self.source].expect("live source");
        let snk: PlaceId = ids[self.sink].expect("live sink");
        b.build(marking_of(n, &[src]), marking_of(n, &[snk]))
            .expect("discovered net is structurally valid")
    }
}

fn all_pairwise_concurrent(nodes: &[&Node], concurrency: &BTreeSet<Pair>) -> bool {
    let names: Option<Vec<&str>> = nodes.iter().map(|n| n.name()).collect();
    let Some(names) = names else { return false };
    names.len() >= 2
        && names.iter().enumerate().all(|(i, a)| {
            names[i + 1..]
                .iter()
                .all(|b| concurrency.contains(&dfg::pair(a, b)))
        })
}

/// Converts a filtered DFG into a Petri net. Each activity becomes one
/// visible transition between an entry and an exit place; every DFG edge
/// becomes a place, routed through AND gateways where all branches are
/// mutually concurrent and through choices otherwise.
pub fn build_net(filtered: &Dfg, concurrency: &BTreeSet<Pair>) -> PetriNet {
    let mut d = Draft::default();
    d.source = d.place("source".into());
    d.sink = d.place("sink".into());
    let mut entry = std::collections::BTreeMap::new();
    let mut exit = std::collections::BTreeMap::new();
    exit.insert(Node::Start, d.source);
    entry.insert(Node::End, d.sink);
    for a in filtered.activities().map(str::to_string).collect::<Vec<_>>() {
        let i = d.place(format!("in:{a}"));
        let o = d.place(format!("out:{a}"));
        d.transition(format!("t:{a}"), Some(a.clone()), vec![i], vec![o]);
        entry.insert(Node::Activity(a.clone()), i);
        exit.insert(Node::Activity(a), o);
    }
    let mut edge_place = std::collections::BTreeMap::new();
    for (x, y) in filtered.edges.keys() {
        let p = d.place(format!("{x}->{y}"));
        edge_place.insert((x.clone(), y.clone()), p);
    }

    for (x, &out_x) in &exit {
        let succ: Vec<&Node> = filtered.successors(x).map(|(n, _)| n).collect();
        if all_pairwise_concurrent(&succ, concurrency) {
            let outs = succ.iter().map(|y| edge_place[&(x.clone(), (*y).clone())]).collect();
            d.transition(format!("and-split:{x}"), None, vec![out_x], outs);
        } else {
            for y in succ {
                let e = edge_place[&(x.clone(), y.clone())];
                d.transition(format!("route:{x}->{y}"), None, vec![out_x], vec![e]);
            }
        }
    }
    for (y, &in_y) in &entry {
        let pred: Vec<&Node> = filtered.predecessors(y).map(|(n, _)| n).collect();
        if all_pairwise_concurrent(&pred, concurrency) {
            let ins = pred.iter().map(|x| edge_place[&((*x).clone(), y.clone())]).collect();
            d.transition(format!("and-join:{y}"), None, ins, vec![in_y]);
        } else {
            for x in pred {
                let e = edge_place[&(x.clone(), y.clone())];
                d.transition(format!("enter:{x}->{y}"), None, vec![e], vec![in_y]);
            }
        }
    }
    d.fuse();
    d.finish()
}
