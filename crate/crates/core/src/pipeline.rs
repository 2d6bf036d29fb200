//! End-to-end run: translate, discover, replay, measure and recommend.

use serde::Serialize;
use thiserror::Error;

use crate::discovery::{discover_detailed, DiscoveryError, DiscoveryParams};
use crate::event_model::{EventLog, HighLevelEvent, LowLevelEvent, Trace};
use crate::petri_net::PetriNet;
use crate::recommender::{self, RecommendConfig, RecommendError, Recommendation};
use crate::replay::{
    log_fitness, measure_mouse_precision, measure_reactivity, replay_trace, GridDistance, MetricsReport,
    ReplayError,
};
use crate::simulator::{simulate_log, Profile, SimError, SimulationParams};
use crate::translator::{translate_log, TranslateError};

/// Pipeline failure tagged with the stage it happened in.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("simulate: {0}")]
    Simulate(#[from] SimError),
    #[error("translate: {0}")]
    Translate(#[from] TranslateError),
    #[error("discover: {0}")]
    Discover(#[from] DiscoveryError),
    #[error("replay: {0}")]
    Replay(#[from] ReplayError),
    #[error("recommend: {0}")]
    Recommend(#[from] RecommendError),
    #[error("optimal: the optimal log must hold exactly one trace, found {0}")]
    OptimalTraceCount(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PipelineSettings {
    pub discovery: DiscoveryParams,
    pub recommend: RecommendConfig,
    pub distance: GridDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub metrics: MetricsReport,
    pub recommendations: Vec<Recommendation>,
    pub net_places: usize,
    pub net_transitions: usize,
}

impl PipelineReport {
    pub fn to_text(&self) -> String {
        format!(
            "{}\n{}",
            self.metrics,
            recommender::to_text(&self.recommendations)
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The single optimal trace for `seed`.
pub fn simulate_optimal(seed: u64) -> Result<EventLog<LowLevelEvent>, SimError> {
    simulate_log(&SimulationParams {
        seed,
        trace_count: 1,
        ..Profile::Optimal.params()
    })
}

pub fn single_trace(log: &EventLog<HighLevelEvent>) -> Result<&Trace<HighLevelEvent>, PipelineError> {
    match log.traces() {
        [t] => Ok(t),
        other => Err(PipelineError::OptimalTraceCount(other.len())),
    }
}

/// Everything derived from one user log and the optimal trace.
pub struct PipelineRun {
    pub user_high: EventLog<HighLevelEvent>,
    pub optimal_high: EventLog<HighLevelEvent>,
    pub net: PetriNet,
    pub report: PipelineReport,
}

pub fn run_pipeline(
    user_low: &EventLog<LowLevelEvent>,
    optimal_low: &EventLog<LowLevelEvent>,
    settings: &PipelineSettings,
) -> Result<PipelineRun, PipelineError> {
    let user_high = translate_log(user_low)?;
    let optimal_high = translate_log(optimal_low)?;
    let optimal = single_trace(&optimal_high)?;
    log::info!("translated {} user traces", user_high.len());

    let discovery = discover_detailed(&user_high, &settings.discovery)?;
    let net = discovery.net;
    log::info!(
        "discovered net with {} places and {} transitions",
        net.place_count(),
        net.transitions().len()
    );

    let user_fitness = log_fitness(&net, &user_high)?;
    let optimal_fitness = replay_trace(&net, optimal).fitness;
    let reactivity_ms = measure_reactivity(&user_high)?;
    let mouse_precision = measure_mouse_precision(user_low, settings.distance)?;
    let metrics = MetricsReport {
        user_fitness,
        optimal_fitness,
        reactivity_ms,
        mouse_precision,
    };

    let recommendations = recommender::recommend(&user_high, optimal, reactivity_ms, &settings.recommend)?;
    let report = PipelineReport {
        metrics,
        recommendations,
        net_places: net.place_count(),
        net_transitions: net.transitions().len(),
    };
    Ok(PipelineRun {
        user_high,
        optimal_high,
        net,
        report,
    })
}

/// Simulates the user log and the optimal trace with the same seed, then runs
/// the pipeline.
pub fn run_simulated(params: &SimulationParams, settings: &PipelineSettings) -> Result<PipelineRun, PipelineError> {
    let user = simulate_log(params)?;
    let optimal = simulate_optimal(params.seed)?;
    run_pipeline(&user, &optimal, settings)
}
