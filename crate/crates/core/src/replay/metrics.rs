//! Reactivity and mouse precision.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::event_model::{Cell, EventKey, EventLog, HighLevelEvent, LowLevelEvent};
use crate::translator::segment_intra_tasks;

use super::ReplayError;

/// Shortest-path metric on the screen grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridDistance {
    /// Diagonal moves allowed.
    #[default]
    Chebyshev,
    Manhattan,
}

impl GridDistance {
    pub fn between(self, a: Cell, b: Cell) -> u32 {
        match self {
            GridDistance::Chebyshev => a.chebyshev(b),
            GridDistance::Manhattan => a.manhattan(b),
        }
    }
}

/// Mean delay between consecutive controllable events of the same intra task.
pub fn measure_reactivity(log: &EventLog<HighLevelEvent>) -> Result<f64, ReplayError> {
    let mut sum = 0u64;
    let mut pairs = 0u64;
    for trace in log.traces() {
        for task in segment_intra_tasks(trace) {
            for w in task.controllables.windows(2) {
                sum += w[1].timestamp_ms - w[0].timestamp_ms;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(ReplayError::NoControllablePairs);
    }
    Ok(sum as f64 / pairs as f64)
}

/// Maximal runs of consecutive mouse-move events, as cell sequences.
pub fn mouse_runs(log: &EventLog<LowLevelEvent>) -> Vec<Vec<Cell>> {
    let mut runs = Vec::new();
    for trace in log.traces() {
        let mut current: Vec<Cell> = Vec::new();
        for e in &trace.events {
            if e.key() == EventKey::M {
                current.push(e.cell().expect("mouse move carries a cell"));
            } else if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }
    }
    runs
}

/// Mean over mouse runs of shortest distance / cells actually traversed.
/// Runs that never change cell are skipped.
pub fn measure_mouse_precision(
    log: &EventLog<LowLevelEvent>,
    distance: GridDistance,
) -> Result<f64, ReplayError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for run in mouse_runs(log) {
        let actual = run.windows(2).filter(|w| w[0] != w[1]).count();
        if actual == 0 {
            continue;
        }
        let shortest = distance.between(run[0], *run.last().expect("non-empty"));
        sum += shortest as f64 / actual as f64;
        n += 1;
    }
    if n == 0 {
        return Err(ReplayError::NoMouseRuns);
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub user_fitness: f64,
    pub optimal_fitness: f64,
    pub reactivity_ms: f64,
    pub mouse_precision: f64,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:<16} {:<26} {}",
            "User's Fitness", "Optimal Fitness", "User's Reactivity [ms]", "User's Mouse Precision"
        )?;
        writeln!(
            f,
            "{:<16.3} {:<16.3} {:<26.0} {:.3}",
            self.user_fitness, self.optimal_fitness, self.reactivity_ms, self.mouse_precision
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::{parse_low_level_log, Trace};

    #[test]
    fn reactivity_of_two_controllables() {
        let t = Trace::new(
            "t",
            vec![
                HighLevelEvent::controllable("a", 0, (0, 0)),
                HighLevelEvent::controllable("b", 500, (1, 1)),
                HighLevelEvent::uncontrollable("u", 9000, (2, 2)),
                // first controllable after a terminator is not paired with it
                HighLevelEvent::controllable("c", 20000, (3, 3)),
            ],
        );
        let log = EventLog::new(vec![t]).unwrap();
        assert_eq!(measure_reactivity(&log).unwrap(), 500.0);
    }

    #[test]
    fn reactivity_needs_pairs() {
        let t = Trace::new("t", vec![HighLevelEvent::controllable("a", 0, (0, 0))]);
        assert_eq!(
            measure_reactivity(&EventLog::new(vec![t]).unwrap()),
            Err(ReplayError::NoControllablePairs)
        );
    }

    #[test]
    fn straight_run_is_precise() {
        let log = parse_low_level_log("t;0;M;1,1\nt;1;M;1,2\nt;2;M;1,3\nt;3;M;1,4\n").unwrap();
        assert_eq!(measure_mouse_precision(&log, GridDistance::Chebyshev).unwrap(), 1.0);
    }

    #[test]
    fn detour_and_metric_choice() {
        // (1,1) -> (2,2) diagonally is one Chebyshev step but two Manhattan steps
        let log = parse_low_level_log(
            "t;0;M;1,1\nt;1;M;2,1\nt;2;M;2,2\nt;3;K3;1,2,2\nt;4;K4;1,2,2\nt;5;M;2,2\n",
        )
        .unwrap();
        assert_eq!(mouse_runs(&log).len(), 2);
        assert_eq!(measure_mouse_precision(&log, GridDistance::Chebyshev).unwrap(), 0.5);
        assert_eq!(measure_mouse_precision(&log, GridDistance::Manhattan).unwrap(), 1.0);
    }

    #[test]
    fn no_runs() {
        let log = parse_low_level_log("t;0;K1;28\n").unwrap();
        assert_eq!(
            measure_mouse_precision(&log, GridDistance::Chebyshev),
            Err(ReplayError::NoMouseRuns)
        );
    }
}
