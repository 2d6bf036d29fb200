//! Intra Task segmentation.

use serde::{Deserialize, Serialize};

use crate::event_model::{HighLevelEvent, Trace};

/// Name of the synthetic terminator closing trailing controllables.
pub const TRACE_END: &str = "trace end";

/// A run of controllable events closed by one uncontrollable event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntraTask {
    pub controllables: Vec<HighLevelEvent>,
    pub terminator: HighLevelEvent,
    /// True when the terminator was not observed but added at the trace end.
    pub synthetic: bool,
    pub duration_ms: u64,
}

impl IntraTask {
    fn close(controllables: Vec<HighLevelEvent>, terminator: HighLevelEvent, synthetic: bool) -> Self {
        let start = controllables
            .first()
            .map_or(terminator.timestamp_ms, |c| c.timestamp_ms);
        Self {
            duration_ms: terminator.timestamp_ms - start,
            controllables,
            terminator,
            synthetic,
        }
    }

    pub fn controllable_names(&self) -> Vec<&str> {
        self.controllables.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Terminator names of one trace, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterSequence {
    pub terminators: Vec<String>,
}

pub fn segment_intra_tasks(high: &Trace<HighLevelEvent>) -> Vec<IntraTask> {
    let mut tasks = Vec::new();
    let mut pending = Vec::new();
    for e in &high.events {
        if e.is_controllable() {
            pending.push(e.clone());
        } else {
            tasks.push(IntraTask::close(std::mem::take(&mut pending), e.clone(), false));
        }
    }
    if let Some(last) = pending.last() {
        let end = last.source_span.1;
        let terminator = HighLevelEvent::uncontrollable(TRACE_END, last.timestamp_ms, (end, end));
        tasks.push(IntraTask::close(pending, terminator, true));
    }
    tasks
}

pub fn inter_sequence(high: &Trace<HighLevelEvent>) -> InterSequence {
    InterSequence {
        terminators: high
            .events
            .iter()
            .filter(|e| !e.is_controllable())
            .map(|e| e.name.clone())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(spec: &[(&str, bool, u64)]) -> Trace<HighLevelEvent> {
        Trace::new(
            "t",
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

    #[test]
    fn runs_bind_to_next_uncontrollable() {
        let t = trace(&[("a", true, 0), ("b", true, 10), ("u", false, 30), ("c", true, 40), ("v", false, 45)]);
        let tasks = segment_intra_tasks(&t);
        assert_eq!(tasks.len(), 2);
        assert_eq!(tasks[0].controllable_names(), ["a", "b"]);
        assert_eq!(tasks[0].terminator.name, "u");
        assert_eq!(tasks[0].duration_ms, 30);
        assert_eq!(tasks[1].duration_ms, 5);
        assert_eq!(inter_sequence(&t).terminators, ["u", "v"]);
    }

    #[test]
    fn lone_uncontrollable() {
        let tasks = segment_intra_tasks(&trace(&[("u", false, 7)]));
        assert_eq!(tasks.len(), 1);
        assert!(tasks[0].controllables.is_empty());
        assert_eq!(tasks[0].duration_ms, 0);
    }

    #[test]
    fn trailing_controllables_get_synthetic_terminator() {
        let t = trace(&[("u", false, 0), ("a", true, 10), ("b", true, 25)]);
        let tasks = segment_intra_tasks(&t);
        assert!(tasks[1].synthetic);
        assert_eq!(tasks[1].terminator.name, TRACE_END);
        assert_eq!(tasks[1].duration_ms, 15);
        assert_eq!(inter_sequence(&t).terminators, ["u"]);
    }

    #[test]
    fn empty_trace() {
        let t = trace(&[]);
        assert!(segment_intra_tasks(&t).is_empty());
        assert!(inter_sequence(&t).terminators.is_empty());
    }
}
