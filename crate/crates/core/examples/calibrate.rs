//! Per-profile statistics for one seed: mean events and duration per trace,
//! fitness of the user log and of the optimal trace, reactivity and mouse
//! precision.
//!
//! `cargo run --release --example calibrate -- [traces] [seed]`

use std::time::Instant;

use behavemine::pipeline::{run_simulated, PipelineSettings};
use behavemine::simulator::{Profile, SimulationParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let traces: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(825);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    println!(
        "{:<8} {:>8} {:>9} {:>8} {:>8} {:>9} {:>9} {:>7}",
        "profile", "events", "time[s]", "fitness", "optimal", "react[ms]", "precision", "run[s]"
    );
    for profile in Profile::ALL {
        let params = SimulationParams {
            seed,
            trace_count: traces,
            ..profile.params()
        };
        let start = Instant::now();
        let run = run_simulated(&params, &PipelineSettings::default()).expect("pipeline runs");
        let n = run.user_high.len() as f64;
        let events = run.user_high.event_count() as f64 / n;
        let secs = run.user_high.traces().iter().map(|t| t.duration_ms()).sum::<u64>() as f64 / n / 1000.0;
        let m = run.report.metrics;
        println!(
            "{:<8} {:>8.2} {:>9.1} {:>8.3} {:>8.3} {:>9.0} {:>9.3} {:>7.1}",
            profile.to_string(),
            events,
            secs,
            m.user_fitness,
            m.optimal_fitness,
            m.reactivity_ms,
            m.mouse_precision,
            start.elapsed().as_secs_f64()
        );
    }
}
