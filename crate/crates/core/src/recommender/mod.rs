//! Intra Task and Inter Task recommendations.
//!
//! Intra Task advice compares, per terminating uncontrollable event, how the
//! user usually gets there with how the optimal trace does. Inter Task advice
//! flags uncontrollable events the user triggers more often than needed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_model::{EventLog, HighLevelEvent, Trace};
use crate::translator::{inter_sequence, segment_intra_tasks, IntraTask};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecommendError {
    #[error("reactivity must be positive, got {0}")]
    NonPositiveReactivity(f64),
    #[error("minimum occurrence rate {0} outside [0,1]")]
    RateOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntraRecommendation {
    pub task: String,
    pub occurrence_rate: f64,
    pub total_occurrence_per_trace: f64,
    pub avg_time_saving_ms: f64,
    pub avoid: Vec<String>,
    pub do_instead: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterRecommendation {
    pub task: String,
    pub occurrence_rate: f64,
    pub avg_time_saving_ms: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recommendation {
    Intra(IntraRecommendation),
    Inter(InterRecommendation),
}

impl Recommendation {
    pub fn task(&self) -> &str {
        match self {
            Recommendation::Intra(r) => &r.task,
            Recommendation::Inter(r) => &r.task,
        }
    }

    pub fn saving_ms(&self) -> f64 {
        match self {
            Recommendation::Intra(r) => r.avg_time_saving_ms,
            Recommendation::Inter(r) => r.avg_time_saving_ms,
        }
    }

    pub fn occurrence_rate(&self) -> f64 {
        match self {
            Recommendation::Intra(r) => r.occurrence_rate,
            Recommendation::Inter(r) => r.occurrence_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommendConfig {
    /// Deviations seen in a smaller fraction of traces are treated as noise.
    pub min_occurrence_rate: f64,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        Self {
            min_occurrence_rate: 0.15,
        }
    }
}

impl RecommendConfig {
    pub fn validate(&self) -> Result<(), RecommendError> {
        if !(0.0..=1.0).contains(&self.min_occurrence_rate) {
            return Err(RecommendError::RateOutOfRange(self.min_occurrence_rate));
        }
        Ok(())
    }
}

// ============================================================================
// Intra Tasks
// ============================================================================

/// Controllable names with each run of mouse moves folded into one step, so
/// that two realizations differing only in the path the cursor took compare
/// equal.
pub fn signature(names: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        let step = if n.starts_with("mouse to ") { "mouse to" } else { n };
        if step == "mouse to" && out.last().is_some_and(|l| l == "mouse to") {
            continue;
        }
        out.push(step.to_string());
    }
    out
}

fn names(task: &IntraTask) -> Vec<String> {
    task.controllables.iter().map(|c| c.name.clone()).collect()
}

fn sig_of(task: &IntraTask) -> Vec<String> {
    signature(&task.controllable_names())
}

/// Most frequent key; ties go to the smallest.
fn mode<K: Ord + Clone>(counts: &BTreeMap<K, usize>) -> Option<K> {
    let mut best: Option<(&K, usize)> = None;
    for (k, &c) in counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k.clone())
}

/// Observed realizations of one terminator.
#[derive(Default)]
struct Realizations {
    by_signature: BTreeMap<Vec<String>, usize>,
    exact: BTreeMap<Vec<String>, usize>,
}

impl Realizations {
    fn add(&mut self, task: &IntraTask) {
        *self.by_signature.entry(sig_of(task)).or_default() += 1;
        *self.exact.entry(names(task)).or_default() += 1;
    }
}

fn realizations<'a>(traces: impl Iterator<Item = &'a Trace<HighLevelEvent>>) -> BTreeMap<String, Realizations> {
    let mut out: BTreeMap<String, Realizations> = BTreeMap::new();
    for t in traces {
        for task in segment_intra_tasks(t) {
            out.entry(task.terminator.name.clone()).or_default().add(&task);
        }
    }
    out
}

/// For every terminator shared with the optimal trace whose usual user
/// realization differs from the optimal one, recommends the optimal one.
/// The saving is `(|avoid| - |do_instead|) * reactivity_ms`; only positive
/// savings are reported.
pub fn intra_recommendations(
    user_log: &EventLog<HighLevelEvent>,
    optimal: &Trace<HighLevelEvent>,
    reactivity_ms: f64,
    config: &RecommendConfig,
) -> Result<Vec<IntraRecommendation>, RecommendError> {
    if reactivity_ms <= 0.0 || reactivity_ms.is_nan() {
        return Err(RecommendError::NonPositiveReactivity(reactivity_ms));
    }
    config.validate()?;
    let user = realizations(user_log.traces().iter());
    let opt = realizations(std::iter::once(optimal));
    let n_traces = user_log.len().max(1) as f64;

    let mut out = Vec::new();
    for (terminator, opt_r) in &opt {
        let Some(user_r) = user.get(terminator) else { continue };
        let (Some(user_sig), Some(opt_sig)) = (mode(&user_r.by_signature), mode(&opt_r.by_signature)) else {
            continue;
        };
        if user_sig == opt_sig {
            continue;
        }
        // the usual exact sequence among those with the usual signature
        let avoid_counts: BTreeMap<Vec<String>, usize> = user_r
            .exact
            .iter()
            .filter(|(seq, _)| signature(&seq.iter().map(String::as_str).collect::<Vec<_>>()) == user_sig)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        let do_counts: BTreeMap<Vec<String>, usize> = opt_r
            .exact
            .iter()
            .filter(|(seq, _)| signature(&seq.iter().map(String::as_str).collect::<Vec<_>>()) == opt_sig)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        let (Some(avoid), Some(do_instead)) = (mode(&avoid_counts), mode(&do_counts)) else {
            continue;
        };
        let saving = (avoid.len() as f64 - do_instead.len() as f64) * reactivity_ms;
        if saving <= 0.0 {
            continue;
        }

        // traces containing the deviating realization, and how often
        let mut containing = 0usize;
        let mut occurrences = 0usize;
        for t in user_log.traces() {
            let k = segment_intra_tasks(t)
                .iter()
                .filter(|task| task.terminator.name == *terminator && sig_of(task) == user_sig)
                .count();
            if k > 0 {
                containing += 1;
                occurrences += k;
            }
        }
        let rate = containing as f64 / n_traces;
        if containing == 0 || rate < config.min_occurrence_rate {
            continue;
        }
        out.push(IntraRecommendation {
            task: terminator.clone(),
            occurrence_rate: rate,
            total_occurrence_per_trace: occurrences as f64 / containing as f64,
            avg_time_saving_ms: saving,
            avoid,
            do_instead,
        });
    }
    Ok(out)
}

// ============================================================================
// Inter Tasks
// ============================================================================

/// Indices into the trace's uncontrollable sequence of the occurrences of
/// `name` that go beyond what the optimal sequence needs. Immediate repeats
/// count first, then the latest occurrences make up any remaining excess.
pub fn redundant_occurrences(sequence: &[String], name: &str, optimal_count: usize) -> Vec<usize> {
    let positions: Vec<usize> = sequence
        .iter()
        .enumerate()
        .filter(|(_, n)| *n == name)
        .map(|(i, _)| i)
        .collect();
    let mut picked: Vec<usize> = positions
        .iter()
        .copied()
        .filter(|&i| i > 0 && sequence[i - 1] == name)
        .collect();
    let excess = positions.len().saturating_sub(optimal_count);
    for &i in positions.iter().rev() {
        if picked.len() >= excess {
            break;
        }
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked.sort_unstable();
    picked
}

/// Uncontrollable events triggered more often than in the optimal trace.
/// The saving of a trace is the total duration of the Intra Tasks ending in
/// the redundant occurrences, averaged over the traces that have any.
pub fn inter_recommendations(
    user_log: &EventLog<HighLevelEvent>,
    optimal: &Trace<HighLevelEvent>,
    config: &RecommendConfig,
) -> Result<Vec<InterRecommendation>, RecommendError> {
    config.validate()?;
    let mut optimal_counts: BTreeMap<String, usize> = BTreeMap::new();
    for n in inter_sequence(optimal).terminators {
        *optimal_counts.entry(n).or_default() += 1;
    }
    let n_traces = user_log.len().max(1) as f64;

    // name -> (traces with redundancy, summed per-trace saving)
    let mut found: BTreeMap<String, (usize, u64)> = BTreeMap::new();
    for t in user_log.traces() {
        let seq = inter_sequence(t).terminators;
        let durations: Vec<u64> = segment_intra_tasks(t)
            .iter()
            .filter(|task| !task.synthetic)
            .map(|task| task.duration_ms)
            .collect();
        let mut names: Vec<&String> = seq.iter().collect();
        names.sort();
        names.dedup();
        for name in names {
            let opt_count = optimal_counts.get(name).copied().unwrap_or(0);
            let redundant = redundant_occurrences(&seq, name, opt_count);
            if redundant.is_empty() {
                continue;
            }
            let saving: u64 = redundant.iter().map(|&i| durations[i]).sum();
            let entry = found.entry(name.clone()).or_default();
            entry.0 += 1;
            entry.1 += saving;
        }
    }

    let mut out = Vec::new();
    for (name, (containing, total)) in found {
        let rate = containing as f64 / n_traces;
        let saving = total as f64 / containing as f64;
        if rate < config.min_occurrence_rate || saving <= 0.0 {
            continue;
        }
        out.push(InterRecommendation {
            message: format!("should not repetitively do {name}"),
            task: name,
            occurrence_rate: rate,
            avg_time_saving_ms: saving,
        });
    }
    Ok(out)
}

// ============================================================================
// Ranking and output
// ============================================================================

/// Descending by saving, then by occurrence rate, then by task name.
pub fn rank(mut recs: Vec<Recommendation>) -> Vec<Recommendation> {
    recs.sort_by(|a, b| {
        b.saving_ms()
            .total_cmp(&a.saving_ms())
            .then(b.occurrence_rate().total_cmp(&a.occurrence_rate()))
            .then_with(|| a.task().cmp(b.task()))
    });
    recs
}

/// Both kinds of recommendation, ranked.
pub fn recommend(
    user_log: &EventLog<HighLevelEvent>,
    optimal: &Trace<HighLevelEvent>,
    reactivity_ms: f64,
    config: &RecommendConfig,
) -> Result<Vec<Recommendation>, RecommendError> {
    let mut all: Vec<Recommendation> = intra_recommendations(user_log, optimal, reactivity_ms, config)?
        .into_iter()
        .map(Recommendation::Intra)
        .collect();
    all.extend(
        inter_recommendations(user_log, optimal, config)?
            .into_iter()
            .map(Recommendation::Inter),
    );
    Ok(rank(all))
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recommendation::Intra(r) => {
                writeln!(f, "Task: {}", r.task)?;
                writeln!(f, "Occurrence Rate: {:.3}", r.occurrence_rate)?;
                writeln!(f, "Total Occurrence Per Trace: {:.3}", r.total_occurrence_per_trace)?;
                writeln!(f, "Average Time Saving: {:.0}", r.avg_time_saving_ms)?;
                writeln!(f, "User should not do: [{}]", r.avoid.join(", "))?;
                writeln!(f, "User should do instead: [{}]", r.do_instead.join(", "))
            }
            Recommendation::Inter(r) => {
                writeln!(f, "Task: {}", r.task)?;
                writeln!(f, "Occurrence Rate: {:.3}", r.occurrence_rate)?;
                writeln!(f, "Average Time Saving: {:.0}", r.avg_time_saving_ms)?;
                writeln!(f, "User should not repetitively do: {}", r.task)
            }
        }
    }
}

/// Recommendation blocks separated by blank lines.
pub fn to_text(recs: &[Recommendation]) -> String {
    if recs.is_empty() {
        return "No recommendations.\n".to_string();
    }
    recs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n")
}

pub fn to_json(recs: &[Recommendation]) -> String {
    serde_json::to_string_pretty(recs).expect("recommendations serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Builds a trace from `(name, controllable, timestamp)` triples.
    fn trace(id: &str, spec: &[(&str, bool, u64)]) -> Trace<HighLevelEvent> {
        Trace::new(
            id,
            spec.iter()
                .enumerate()
                .map(|(i, &(n, c, ts))| {
                    if c {
                        HighLevelEvent::controllable(n, ts, (i, i))
                    } else {
                        HighLevelEvent::uncontrollable(n, ts, (i, i))
                    }
                })
                .collect(),
        )
    }

    fn log(traces: Vec<Trace<HighLevelEvent>>) -> EventLog<HighLevelEvent> {
        EventLog::new(traces).unwrap()
    }

    fn no_filter() -> RecommendConfig {
        RecommendConfig { min_occurrence_rate: 0.0 }
    }

    fn mouse_maximize(id: &str) -> Trace<HighLevelEvent> {
        trace(
            id,
            &[
                ("mouse to 4,3", true, 0),
                ("mouse to 3,3", true, 100),
                ("mouse to 2,3", true, 200),
                ("mouse to 1,3", true, 300),
                ("mouse to 1,2", true, 400),
                ("mouse click", true, 500),
                ("explorer maximize", false, 600),
            ],
        )
    }

    fn hotkey_maximize() -> Trace<HighLevelEvent> {
        trace(
            "opt",
            &[("key 56", true, 0), ("key 15", true, 100), ("explorer maximize", false, 200)],
        )
    }

    #[test]
    fn six_mouse_events_against_two_keys() {
        let recs =
            intra_recommendations(&log(vec![mouse_maximize("a")]), &hotkey_maximize(), 901.0, &no_filter())
                .unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].avg_time_saving_ms, 3604.0);
        assert_eq!(recs[0].avoid.len(), 6);
        assert_eq!(recs[0].do_instead, vec!["key 56", "key 15"]);
        assert_eq!(recs[0].task, "explorer maximize");
    }

    #[test]
    fn nine_against_one() {
        let mut user = vec![("mouse click", true, 0)];
        user.extend(std::iter::repeat_n(("key TEXT", true, 10), 7));
        user.push(("key 28", true, 20));
        user.push(("explorer path to summaries", false, 30));
        let opt = trace("o", &[("mouse doubleclick", true, 0), ("explorer path to summaries", false, 5)]);
        let recs = intra_recommendations(&log(vec![trace("u", &user)]), &opt, 901.0, &no_filter()).unwrap();
        assert_eq!(recs[0].avg_time_saving_ms, 7208.0);
    }

    #[test]
    fn identical_behavior_gives_nothing() {
        let opt = mouse_maximize("o");
        let user = log(vec![mouse_maximize("a"), mouse_maximize("b")]);
        assert!(recommend(&user, &opt, 500.0, &no_filter()).unwrap().is_empty());
    }

    #[test]
    fn cursor_path_alone_is_not_a_deviation() {
        let opt = trace("o", &[("mouse to 1,2", true, 0), ("mouse click", true, 5), ("explorer maximize", false, 9)]);
        let user = log(vec![mouse_maximize("a")]);
        assert!(intra_recommendations(&user, &opt, 500.0, &no_filter()).unwrap().is_empty());
    }

    #[test]
    fn shorter_user_sequence_is_not_recommended_against() {
        let user = log(vec![hotkey_maximize()]);
        assert!(intra_recommendations(&user, &mouse_maximize("o"), 500.0, &no_filter())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn occurrence_statistics() {
        let twice = trace(
            "b",
            &[
                ("mouse to 1,2", true, 0),
                ("mouse click", true, 1),
                ("explorer maximize", false, 2),
                ("mouse to 1,2", true, 3),
                ("mouse click", true, 4),
                ("explorer maximize", false, 5),
            ],
        );
        let user = log(vec![mouse_maximize("a"), twice, hotkey_maximize()]);
        let opt = trace("o", &[("key 3675", true, 0), ("explorer maximize", false, 9)]);
        let r = &intra_recommendations(&user, &opt, 100.0, &no_filter()).unwrap()[0];
        assert!((r.occurrence_rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.total_occurrence_per_trace, 1.5);
        // the usual signature is [mouse to, mouse click]; its usual exact form wins
        assert_eq!(r.avoid, vec!["mouse to 1,2", "mouse click"]);
    }

    #[test]
    fn rare_deviation_is_filtered() {
        let mut traces: Vec<_> = (0..9).map(|i| {
            let mut t = hotkey_maximize();
            t.id = format!("h{i}");
            t
        }).collect();
        traces.push(mouse_maximize("m"));
        // the user's usual way matches the optimal one
        assert!(intra_recommendations(&log(traces), &hotkey_maximize(), 100.0, &RecommendConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn duplicated_minimize_saves_its_duration() {
        let opt = trace("o", &[("key 3675", true, 0), ("calculator minimize", false, 100)]);
        let user = trace(
            "u",
            &[
                ("key 3675", true, 0),
                ("calculator minimize", false, 100),
                ("key 56", true, 1000),
                ("calculator minimize", false, 2500),
            ],
        );
        let recs = inter_recommendations(&log(vec![user]), &opt, &no_filter()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].task, "calculator minimize");
        assert_eq!(recs[0].avg_time_saving_ms, 1500.0);
        assert_eq!(recs[0].occurrence_rate, 1.0);
        assert_eq!(recs[0].message, "should not repetitively do calculator minimize");
    }

    #[test]
    fn equal_inter_sequence_gives_nothing() {
        let opt = trace("o", &[("a", true, 0), ("x", false, 5), ("y", false, 9)]);
        let user = trace("u", &[("a", true, 0), ("x", false, 50), ("y", false, 90)]);
        assert!(inter_recommendations(&log(vec![user]), &opt, &no_filter()).unwrap().is_empty());
    }

    #[test]
    fn immediate_repeats_count_even_without_excess() {
        let seq: Vec<String> = ["a", "b", "b", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(redundant_occurrences(&seq, "b", 2), vec![2]);
        assert_eq!(redundant_occurrences(&seq, "a", 1), vec![3]);
        assert!(redundant_occurrences(&seq, "a", 2).is_empty());
    }

    #[test]
    fn ranking_examples() {
        let inter = |task: &str, saving: f64, rate: f64| {
            Recommendation::Inter(InterRecommendation {
                task: task.into(),
                occurrence_rate: rate,
                avg_time_saving_ms: saving,
                message: String::new(),
            })
        };
        let r = rank(vec![inter("a", 3604.0, 0.1), inter("b", 8109.0, 0.1)]);
        assert_eq!(r[0].saving_ms(), 8109.0);
        let r = rank(vec![inter("a", 10.0, 0.1), inter("b", 10.0, 0.4)]);
        assert_eq!(r[0].task(), "b");
        let r = rank(vec![inter("z", 10.0, 0.1), inter("c", 10.0, 0.1)]);
        assert_eq!(r[0].task(), "c");
        assert_eq!(rank(vec![inter("a", 1.0, 1.0)]).len(), 1);
    }

    #[test]
    fn text_block_layout() {
        let recs = intra_recommendations(&log(vec![mouse_maximize("a")]), &hotkey_maximize(), 901.0, &no_filter())
            .unwrap();
        let text = to_text(&[Recommendation::Intra(recs[0].clone())]);
        let expected = "Task: explorer maximize\nOccurrence Rate: 1.000\nTotal Occurrence Per Trace: 1.000\n\
Average Time Saving: 3604\nUser should not do: [mouse to 4,3, mouse to 3,3, mouse to 2,3, mouse to 1,3, mouse to 1,2, mouse click]\n\
User should do instead: [key 56, key 15]\n";
        assert_eq!(text, expected);
        let back: Vec<Recommendation> = serde_json::from_str(&to_json(&[Recommendation::Intra(recs[0].clone())])).unwrap();
        assert_eq!(back, vec![Recommendation::Intra(recs[0].clone())]);
    }

    #[test]
    fn bad_inputs() {
        let l = log(vec![mouse_maximize("a")]);
        assert!(matches!(
            intra_recommendations(&l, &hotkey_maximize(), 0.0, &no_filter()),
            Err(RecommendError::NonPositiveReactivity(_))
        ));
        assert!(matches!(
            inter_recommendations(&l, &hotkey_maximize(), &RecommendConfig { min_occurrence_rate: 2.0 }),
            Err(RecommendError::RateOutOfRange(_))
        ));
    }

    fn arb_recs() -> impl Strategy<Value = Vec<Recommendation>> {
        prop::collection::vec(("[a-d]", 0u32..5, 0u32..4), 0..12).prop_map(|v| {
            v.into_iter()
                .map(|(task, s, r)| {
                    Recommendation::Inter(InterRecommendation {
                        task,
                        occurrence_rate: r as f64 / 4.0,
                        avg_time_saving_ms: s as f64 * 100.0,
                        message: String::new(),
                    })
                })
                .collect()
        })
    }

    fn arb_user_log() -> impl Strategy<Value = Vec<Vec<(usize, bool)>>> {
        prop::collection::vec(prop::collection::vec((0usize..4, any::<bool>()), 1..12), 1..6)
    }

    proptest! {
        #[test]
        fn ranking_is_a_sorted_permutation(recs in arb_recs()) {
            let ranked = rank(recs.clone());
            prop_assert_eq!(ranked.len(), recs.len());
            for r in &recs {
                let a = recs.iter().filter(|x| *x == r).count();
                let b = ranked.iter().filter(|x| *x == r).count();
                prop_assert_eq!(a, b);
            }
            for w in ranked.windows(2) {
                prop_assert!(w[0].saving_ms() >= w[1].saving_ms());
            }
        }

        #[test]
        fn avoid_sequences_occur_as_reported(raw in arb_user_log()) {
            let names = ["mouse to 1,1", "mouse click", "key 56", "notepad close"];
            let traces: Vec<_> = raw.iter().enumerate().map(|(i, evs)| {
                let spec: Vec<(&str, bool, u64)> = evs
                    .iter()
                    .enumerate()
                    .map(|(j, &(k, _))| (names[k], k != 3, j as u64 * 10))
                    .collect();
                trace(&format!("t{i}"), &spec)
            }).collect();
            let l = log(traces);
            let opt = trace("o", &[("key 56", true, 0), ("notepad close", false, 5)]);
            for r in intra_recommendations(&l, &opt, 100.0, &no_filter()).unwrap() {
                prop_assert!(r.avg_time_saving_ms > 0.0);
                prop_assert!(r.avoid != r.do_instead);
                // recount traces holding the avoided sequence's signature
                let sig = signature(&r.avoid.iter().map(String::as_str).collect::<Vec<_>>());
                let holding = l.traces().iter().filter(|t| {
                    segment_intra_tasks(t).iter().any(|task| task.terminator.name == r.task && sig_of(task) == sig)
                }).count();
                prop_assert!((r.occurrence_rate - holding as f64 / l.len() as f64).abs() < 1e-12);
                let exact = l.traces().iter().any(|t| {
                    segment_intra_tasks(t).iter().any(|task| names_eq(task, &r.avoid))
                });
                prop_assert!(exact);
            }
        }
    }

    fn names_eq(task: &IntraTask, seq: &[String]) -> bool {
        task.controllables.iter().map(|c| &c.name).eq(seq.iter())
    }
}
