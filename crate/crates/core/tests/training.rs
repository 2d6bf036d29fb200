//! Following recommendations moves a user toward the optimal behavior: after
//! the recommended change, the optimal trace fits the user's new net better.

use behavemine::pipeline::{run_simulated, PipelineSettings};
use behavemine::recommender::Recommendation;
use behavemine::simulator::{Profile, SimulationParams};

fn optimal_fitness(params: &SimulationParams) -> (f64, Vec<Recommendation>) {
    let run = run_simulated(params, &PipelineSettings::default()).unwrap();
    (run.report.metrics.optimal_fitness, run.report.recommendations)
}

#[test]
fn adopting_hotkeys_then_dropping_repetitions() {
    let user4 = SimulationParams {
        seed: 0,
        trace_count: 300,
        ..Profile::User4.params()
    };
    let (before, recs) = optimal_fitness(&user4);
    assert!(recs.iter().any(|r| matches!(r, Recommendation::Intra(i) if i.do_instead.iter().any(|e| e == "key 56"))));

    // the intra recommendations ask for hotkeys
    let with_hotkeys = SimulationParams {
        hotkey_usage: Profile::Optimal.params().hotkey_usage,
        ..user4.clone()
    };
    let (step1, recs) = optimal_fitness(&with_hotkeys);
    assert!(step1 > before, "{step1} <= {before}");
    assert!(recs.iter().any(|r| matches!(r, Recommendation::Inter(_))));

    // the remaining inter recommendations ask to stop repeating
    let without_repeats = SimulationParams {
        repetition: Profile::Optimal.params().repetition,
        ..with_hotkeys
    };
    let (step2, _) = optimal_fitness(&without_repeats);
    assert!(step2 > step1, "{step2} <= {step1}");
}
