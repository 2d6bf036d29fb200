//! Move-on-model token replay and behavioral metrics.
//!
//! Each observed event fires its labeled transition. When that transition is
//! not enabled, the cheapest firing sequence that enables it is inserted as
//! model moves. Visible model moves cost 1 each; invisible routing is free.

mod metrics;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::event_model::{EventLog, HighLevelEvent, Trace};
use crate::petri_net::{Marking, PetriNet, TransitionId};

pub use metrics::{
    measure_mouse_precision, measure_reactivity, mouse_runs, GridDistance, MetricsReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("event log contains no traces")]
    EmptyLog,
    #[error("no two consecutive controllable events inside any intra task")]
    NoControllablePairs,
    #[error("no mouse movement spanning at least two cells")]
    NoMouseRuns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReplayConfig {
    /// Upper bound on visible model moves inserted before one event.
    pub max_model_moves: u32,
    /// Upper bound on markings explored for one event.
    pub max_states: usize,
    /// Cost charged when no enabling sequence is found within the bounds.
    pub fallback_penalty: u32,
    /// Cost charged for an event whose name labels no transition.
    pub unknown_label_penalty: u32,
    /// Extra cost when the current marking cannot reach the event's
    /// transition and the case restarts from the initial marking.
    pub restart_penalty: u32,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            max_model_moves: 50,
            max_states: 50_000,
            fallback_penalty: 50,
            unknown_label_penalty: 1,
            restart_penalty: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventMove {
    pub event: String,
    /// The transition fired for the event, `None` for unknown labels.
    pub fired: Option<TransitionId>,
    /// Transitions fired beforehand to enable it, in firing order.
    pub model_moves: Vec<TransitionId>,
    pub cost: u32,
    pub search_bound_exceeded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnablingRecord {
    pub transition: TransitionId,
    pub enable_time_ms: u64,
    pub fire_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayResult {
    pub moves: Vec<EventMove>,
    pub cost: u64,
    pub fitness: f64,
    /// One record per event-driven firing of a visible transition.
    pub enabling_records: Vec<EnablingRecord>,
    pub search_bound_exceeded: bool,
}

/// Visible transitions firable from `m` after invisible firings only.
fn silently_enabled(net: &PetriNet, m: &Marking, cap: usize) -> HashSet<TransitionId> {
    let mut out = HashSet::new();
    let mut seen = HashSet::from([m.clone()]);
    let mut queue = VecDeque::from([m.clone()]);
    while let Some(cur) = queue.pop_front() {
        for t in net.enabled_transitions(&cur) {
            if net.transitions()[t.0].invisible {
                if seen.len() < cap {
                    let next = net.fire(&cur, t).expect("enabled");
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            } else {
                out.insert(t);
            }
        }
    }
    out
}

/// Cheapest firing sequence from `start` to a marking enabling `target`,
/// counting visible firings only; among equally cheap sequences the shortest
/// one wins. Dijkstra over markings.
fn enabling_sequence(
    net: &PetriNet,
    start: &Marking,
    target: TransitionId,
    config: &ReplayConfig,
) -> Option<(Vec<TransitionId>, Marking)> {
    let mut index: HashMap<Marking, usize> = HashMap::new();
    // marking, (visible, total) distance, predecessor
    type State = (Marking, (u32, u32), Option<(usize, TransitionId)>);
    let mut states: Vec<State> = Vec::new();
    index.insert(start.clone(), 0);
    states.push((start.clone(), (0, 0), None));
    let mut heap = BinaryHeap::from([Reverse(((0u32, 0u32), 0usize))]);
    let mut done = HashSet::new();
    while let Some(Reverse((d, i))) = heap.pop() {
        if d > states[i].1 || !done.insert(i) {
            continue;
        }
        let m = states[i].0.clone();
        if net.enabled(&m, target).unwrap_or(false) {
            let mut path = Vec::new();
            let mut at = i;
            while let Some((prev, t)) = states[at].2 {
                path.push(t);
                at = prev;
            }
            path.reverse();
            return Some((path, m));
        }
        for t in net.enabled_transitions(&m) {
            let step = u32::from(!net.transitions()[t.0].invisible);
            let nd = (d.0 + step, d.1 + 1);
            if nd.0 > config.max_model_moves {
                continue;
            }
            let next = net.fire(&m, t).expect("enabled");
            let j = match index.get(&next) {
                Some(&j) => {
                    if states[j].1 <= nd {
                        continue;
                    }
                    states[j].1 = nd;
                    states[j].2 = Some((i, t));
                    j
                }
                None => {
                    if states.len() >= config.max_states {
                        continue;
                    }
                    index.insert(next.clone(), states.len());
                    states.push((next, nd, Some((i, t))));
                    states.len() - 1
                }
            };
            heap.push(Reverse((nd, j)));
        }
    }
    None
}

pub fn replay_trace(net: &PetriNet, trace: &Trace<HighLevelEvent>) -> ReplayResult {
    replay_trace_with(net, trace, &ReplayConfig::default())
}

pub fn replay_trace_with(
    net: &PetriNet,
    trace: &Trace<HighLevelEvent>,
    config: &ReplayConfig,
) -> ReplayResult {
    const CLOSURE_CAP: usize = 2_000;
    let mut m = net.initial_marking().clone();
    let mut moves = Vec::with_capacity(trace.events.len());
    let mut records = Vec::new();
    let mut cost = 0u64;
    let mut exceeded = false;
    // the trace clock starts at 0
    let mut enabled_since: HashMap<TransitionId, u64> = silently_enabled(net, &m, CLOSURE_CAP)
        .into_iter()
        .map(|t| (t, 0))
        .collect();

    for e in &trace.events {
        let Some(t) = net.transition_by_label(&e.name) else {
            cost += config.unknown_label_penalty as u64;
            moves.push(EventMove {
                event: e.name.clone(),
                fired: None,
                model_moves: Vec::new(),
                cost: config.unknown_label_penalty,
                search_bound_exceeded: false,
            });
            continue;
        };
        let mut mv = EventMove {
            event: e.name.clone(),
            fired: Some(t),
            model_moves: Vec::new(),
            cost: 0,
            search_bound_exceeded: false,
        };
        if !net.enabled(&m, t).expect("known transition") {
            // a transition out of reach restarts the case from the initial marking
            let found = enabling_sequence(net, &m, t, config)
                .map(|(path, reached)| (path, reached, 0))
                .or_else(|| {
                    enabling_sequence(net, net.initial_marking(), t, config)
                        .map(|(path, reached)| (path, reached, config.restart_penalty))
                });
            match found {
                Some((path, reached, extra)) => {
                    mv.cost = extra
                        + path
                            .iter()
                            .filter(|p| !net.transitions()[p.0].invisible)
                            .count() as u32;
                    mv.model_moves = path;
                    m = reached;
                }
                None => {
                    // relocate the token(s) in front of the transition
                    let mut fresh = Marking::empty(net.place_count());
                    for &p in net.inputs(t) {
                        fresh.set(p, 1);
                    }
                    m = fresh;
                    mv.cost = config.fallback_penalty;
                    mv.search_bound_exceeded = true;
                    exceeded = true;
                }
            }
        }
        m = net.fire(&m, t).expect("enabled after model moves");
        let enable = enabled_since.get(&t).copied().unwrap_or(e.timestamp_ms);
        records.push(EnablingRecord {
            transition: t,
            enable_time_ms: enable.min(e.timestamp_ms),
            fire_time_ms: e.timestamp_ms,
        });
        let now = silently_enabled(net, &m, CLOSURE_CAP);
        enabled_since.retain(|k, _| now.contains(k) && *k != t);
        for k in now {
            enabled_since.entry(k).or_insert(e.timestamp_ms);
        }
        cost += mv.cost as u64;
        moves.push(mv);
    }

    let n = trace.events.len();
    let fitness = if n == 0 {
        1.0
    } else {
        (1.0 - cost as f64 / n as f64).max(0.0)
    };
    ReplayResult {
        moves,
        cost,
        fitness,
        enabling_records: records,
        search_bound_exceeded: exceeded,
    }
}

/// Replays every trace in parallel; results follow log order.
pub fn replay_log(net: &PetriNet, log: &EventLog<HighLevelEvent>) -> Vec<ReplayResult> {
    log.traces().par_iter().map(|t| replay_trace(net, t)).collect()
}

/// Mean per-trace fitness.
pub fn log_fitness(net: &PetriNet, log: &EventLog<HighLevelEvent>) -> Result<f64, ReplayError> {
    if log.is_empty() {
        return Err(ReplayError::EmptyLog);
    }
    Ok(mean_fitness(&replay_log(net, log)))
}

pub fn mean_fitness(results: &[ReplayResult]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().map(|r| r.fitness).sum::<f64>() / results.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionStats {
    pub transition: String,
    pub label: Option<String>,
    pub fires: u64,
    /// Fires per trace.
    pub frequency: f64,
    pub mean_gap_ms: f64,
}

/// Enable-to-fire gaps and firing frequencies, keyed by transition id.
/// Transitions that never fired are absent.
pub fn enabling_stats(net: &PetriNet, results: &[ReplayResult]) -> BTreeMap<String, TransitionStats> {
    let mut acc: BTreeMap<TransitionId, (u64, u64)> = BTreeMap::new();
    for r in results {
        for rec in &r.enabling_records {
            let e = acc.entry(rec.transition).or_default();
            e.0 += 1;
            e.1 += rec.fire_time_ms - rec.enable_time_ms;
        }
    }
    let traces = results.len().max(1) as f64;
    acc.into_iter()
        .map(|(t, (fires, gap))| {
            let tr = &net.transitions()[t.0];
            (
                tr.id.clone(),
                TransitionStats {
                    transition: tr.id.clone(),
                    label: tr.label.clone(),
                    fires,
                    frequency: fires as f64 / traces,
                    mean_gap_ms: gap as f64 / fires as f64,
                },
            )
        })
        .collect()
}
