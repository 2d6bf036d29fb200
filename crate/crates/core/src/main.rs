//! `behavemine` command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use behavemine::discovery::{discover_detailed, DiscoveryParams};
use behavemine::event_model::{
    parse_high_level_log, parse_low_level_log, serialize_high_level_log, serialize_low_level_log, EventLog,
    HighLevelEvent, ParseError,
};
use behavemine::petri_net::{from_json, to_dot, to_json, NetError};
use behavemine::pipeline::{run_pipeline, simulate_optimal, single_trace, PipelineError, PipelineSettings};
use behavemine::recommender::{self, RecommendConfig};
use behavemine::replay::{log_fitness, measure_reactivity, replay_trace};
use behavemine::simulator::{simulate_log, Profile, SimulationParams};
use behavemine::translator::{translate_log, verify_spans};

#[derive(Debug, Error)]
enum CliError {
    #[error("{stage}: {path}: {source}")]
    Io {
        stage: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{stage}: {path}: {source}")]
    Parse {
        stage: &'static str,
        path: PathBuf,
        source: ParseError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("discover: {0}")]
    Net(#[from] NetError),
    #[error("translate: trace `{trace}`: {reason}")]
    Verify { trace: String, reason: String },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl CliError {
    fn config(e: impl ToString) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Parser)]
#[command(name = "behavemine", version, about = "Behavioral process mining for interaction logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a low-level event log.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Translate a low-level log into a high-level log.
    Translate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Check that every high-level event covers its low-level span.
        #[arg(long)]
        verify: bool,
    },
    /// Discover a Petri net from a high-level log.
    Discover {
        input: PathBuf,
        #[command(flatten)]
        mining: MiningArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replay a high-level log on a net.
    Replay {
        input: PathBuf,
        #[arg(long)]
        net: PathBuf,
        /// High-level log holding the optimal trace.
        #[arg(long)]
        optimal: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recommend Intra and Inter Task improvements for a high-level log.
    Recommend {
        input: PathBuf,
        /// High-level log holding the optimal trace.
        #[arg(long)]
        optimal: PathBuf,
        /// Reactivity in ms; measured from the log when absent.
        #[arg(long)]
        reactivity: Option<f64>,
        #[arg(long)]
        min_rate: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate (or load) a user log and run every stage.
    Pipeline {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        mining: MiningArgs,
        /// Low-level user log to analyse instead of simulating one.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Low-level log holding the optimal trace.
        #[arg(long)]
        optimal: Option<PathBuf>,
        #[arg(long)]
        min_rate: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimArgs {
    /// optimal, user1 .. user5
    #[arg(long)]
    profile: Option<String>,
    /// File of `key=value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    traces: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any simulation parameter, e.g. `--set hotkey_usage=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct MiningArgs {
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

// ============================================================================
// Configuration
// ============================================================================

/// `key=value` lines; `#` starts a comment.
fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Resolved settings for simulation and analysis.
struct Resolved {
    params: SimulationParams,
    settings: PipelineSettings,
    format: Format,
}

fn read_text(stage: &'static str, path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        stage,
        path: path.to_path_buf(),
        source,
    })
}

fn resolve(sim: &SimArgs, mining: Option<&MiningArgs>, min_rate: Option<f64>, format: Option<Format>) -> Result<Resolved, CliError> {
    let mut file = match &sim.config {
        Some(p) => parse_config(&read_text("config", p)?)?,
        None => BTreeMap::new(),
    };
    let profile_name = sim
        .profile
        .clone()
        .or_else(|| file.remove("profile"))
        .unwrap_or_else(|| "optimal".to_string());
    let profile: Profile = profile_name.parse().map_err(CliError::config)?;
    let mut params = profile.params();
    if profile == Profile::Optimal {
        // a log of the optimal profile defaults to the usual size
        params.trace_count = Profile::User1.params().trace_count;
    }
    let mut settings = PipelineSettings::default();
    let mut fmt = Format::Text;

    let mut apply = |k: &str, v: &str| -> Result<(), CliError> {
        match k {
            "eta" => settings.discovery.eta = v.parse().map_err(CliError::config)?,
            "epsilon" | "epsilon_percentile" => {
                settings.discovery.epsilon_percentile = v.parse().map_err(CliError::config)?
            }
            "min_rate" | "min_occurrence_rate" => {
                settings.recommend.min_occurrence_rate = v.parse().map_err(CliError::config)?
            }
            "format" => fmt = Format::from_str(v, true).map_err(CliError::config)?,
            k if SimulationParams::is_parameter(k) => params.set(k, v).map_err(CliError::config)?,
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    };
    for (k, v) in &file {
        apply(k, v)?;
    }
    for kv in &sim.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("`{kv}`: expected key=value")))?;
        apply(k.trim(), v.trim())?;
    }
    if let Some(n) = sim.traces {
        apply("trace_count", &n.to_string())?;
    }
    if let Some(s) = sim.seed {
        apply("seed", &s.to_string())?;
    }
    if let Some(m) = mining {
        if let Some(e) = m.eta {
            apply("eta", &e.to_string())?;
        }
        if let Some(e) = m.epsilon {
            apply("epsilon", &e.to_string())?;
        }
    }
    if let Some(r) = min_rate {
        apply("min_rate", &r.to_string())?;
    }
    if let Some(f) = format {
        fmt = f;
    }
    params.validate().map_err(CliError::config)?;
    settings.discovery.validate().map_err(CliError::config)?;
    settings.recommend.validate().map_err(CliError::config)?;
    Ok(Resolved {
        params,
        settings,
        format: fmt,
    })
}

fn mining_params(m: &MiningArgs) -> Result<DiscoveryParams, CliError> {
    let mut p = DiscoveryParams::default();
    if let Some(e) = m.eta {
        p.eta = e;
    }
    if let Some(e) = m.epsilon {
        p.epsilon_percentile = e;
    }
    p.validate().map_err(CliError::config)?;
    Ok(p)
}

// ============================================================================
// Commands
// ============================================================================

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            stage: "output",
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_high(stage: &'static str, path: &Path) -> Result<EventLog<HighLevelEvent>, CliError> {
    parse_high_level_log(&read_text(stage, path)?).map_err(|source| CliError::Parse {
        stage,
        path: path.to_path_buf(),
        source,
    })
}

fn load_low(stage: &'static str, path: &Path) -> Result<EventLog<behavemine::event_model::LowLevelEvent>, CliError> {
    parse_low_level_log(&read_text(stage, path)?).map_err(|source| CliError::Parse {
        stage,
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_simulate(sim: &SimArgs, output: Option<&Path>) -> Result<(), CliError> {
    let r = resolve(sim, None, None, None)?;
    if r.params.trace_count == 0 {
        log::warn!("trace count is 0; writing an empty log");
    }
    let log = simulate_log(&r.params).map_err(PipelineError::from)?;
    emit(&serialize_low_level_log(&log), output)?;
    eprintln!("simulated {} traces, {} events", log.len(), log.event_count());
    Ok(())
}

fn cmd_translate(input: &Path, output: Option<&Path>, verify: bool) -> Result<(), CliError> {
    let low = load_low("translate", input)?;
    let high = translate_log(&low).map_err(PipelineError::from)?;
    if verify {
        for (l, h) in low.traces().iter().zip(high.traces()) {
            verify_spans(l, h).map_err(|e| CliError::Verify {
                trace: l.id.clone(),
                reason: e.to_string(),
            })?;
        }
        eprintln!("verified spans of {} traces", high.len());
    }
    emit(&serialize_high_level_log(&high), output)
}

fn cmd_discover(input: &Path, mining: &MiningArgs, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    let log = load_high("discover", input)?;
    let params = mining_params(mining)?;
    let d = discover_detailed(&log, &params).map_err(PipelineError::from)?;
    if d.sequential_fallback {
        log::warn!("concurrency dropped to keep the net sound");
    }
    let text = match format {
        Format::Dot => to_dot(&d.net),
        _ => to_json(&d.net),
    };
    emit(&text, output)
}

#[derive(Serialize)]
struct ReplaySummary {
    fitness: f64,
    optimal_fitness: Option<f64>,
    reactivity_ms: Option<f64>,
    traces: usize,
}

fn cmd_replay(
    input: &Path,
    net_path: &Path,
    optimal: Option<&Path>,
    format: Format,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let net = from_json(&read_text("replay", net_path)?)?;
    let log = load_high("replay", input)?;
    let fitness = log_fitness(&net, &log).map_err(PipelineError::from)?;
    let optimal_fitness = match optimal {
        Some(p) => {
            let opt = load_high("replay", p)?;
            Some(replay_trace(&net, single_trace(&opt)?).fitness)
        }
        None => None,
    };
    let summary = ReplaySummary {
        fitness,
        optimal_fitness,
        reactivity_ms: measure_reactivity(&log).ok(),
        traces: log.len(),
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
        _ => {
            let mut s = format!("traces: {}\nfitness: {:.3}\n", summary.traces, summary.fitness);
            if let Some(f) = summary.optimal_fitness {
                s.push_str(&format!("optimal fitness: {f:.3}\n"));
            }
            if let Some(r) = summary.reactivity_ms {
                s.push_str(&format!("reactivity [ms]: {r:.0}\n"));
            }
            s
        }
    };
    emit(&text, output)
}

fn cmd_recommend(
    input: &Path,
    optimal: &Path,
    reactivity: Option<f64>,
    min_rate: Option<f64>,
    format: Format,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let log = load_high("recommend", input)?;
    let opt_log = load_high("recommend", optimal)?;
    let opt = single_trace(&opt_log)?;
    let reactivity = match reactivity {
        Some(r) => r,
        None => measure_reactivity(&log).map_err(PipelineError::from)?,
    };
    let mut config = RecommendConfig::default();
    if let Some(r) = min_rate {
        config.min_occurrence_rate = r;
    }
    let recs = recommender::recommend(&log, opt, reactivity, &config).map_err(PipelineError::from)?;
    let text = match format {
        Format::Json => recommender::to_json(&recs) + "\n",
        _ => recommender::to_text(&recs),
    };
    emit(&text, output)
}

fn cmd_pipeline(
    sim: &SimArgs,
    mining: &MiningArgs,
    input: Option<&Path>,
    optimal: Option<&Path>,
    min_rate: Option<f64>,
    format: Option<Format>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let r = resolve(sim, Some(mining), min_rate, format)?;
    let user = match input {
        Some(p) => load_low("simulate", p)?,
        None => simulate_log(&r.params).map_err(PipelineError::from)?,
    };
    let opt = match optimal {
        Some(p) => load_low("optimal", p)?,
        None => simulate_optimal(r.params.seed).map_err(PipelineError::from)?,
    };
    let run = run_pipeline(&user, &opt, &r.settings)?;
    let text = match r.format {
        Format::Json => run.report.to_json() + "\n",
        _ => run.report.to_text(),
    };
    emit(&text, output)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { sim, output } => cmd_simulate(sim, output.as_deref()),
        Command::Translate { input, output, verify } => cmd_translate(input, output.as_deref(), *verify),
        Command::Discover {
            input,
            mining,
            format,
            output,
        } => cmd_discover(input, mining, *format, output.as_deref()),
        Command::Replay {
            input,
            net,
            optimal,
            format,
            output,
        } => cmd_replay(input, net, optimal.as_deref(), *format, output.as_deref()),
        Command::Recommend {
            input,
            optimal,
            reactivity,
            min_rate,
            format,
            output,
        } => cmd_recommend(input, optimal, *reactivity, *min_rate, *format, output.as_deref()),
        Command::Pipeline {
            sim,
            mining,
            input,
            optimal,
            min_rate,
            format,
            output,
        } => cmd_pipeline(
            sim,
            mining,
            input.as_deref(),
            optimal.as_deref(),
            *min_rate,
            *format,
            output.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BEHAVEMINE_LOG_LEVEL", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(profile: Option<&str>, overrides: &[&str]) -> SimArgs {
        SimArgs {
            profile: profile.map(String::from),
            config: None,
            traces: None,
            seed: None,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# comment\nprofile = user2\n\nseed=7 # trailing\n").unwrap();
        assert_eq!(c["profile"], "user2");
        assert_eq!(c["seed"], "7");
        assert!(matches!(parse_config("nonsense"), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_profile() {
        let r = resolve(&sim(Some("user2"), &["hotkey_usage=0.5", "eta=0.2"]), None, Some(0.3), Some(Format::Json)).unwrap();
        assert_eq!(r.params.hotkey_usage, 0.5);
        assert_eq!(r.params.reactivity, Profile::User2.params().reactivity);
        assert_eq!(r.settings.discovery.eta, 0.2);
        assert_eq!(r.settings.recommend.min_occurrence_rate, 0.3);
        assert_eq!(r.format, Format::Json);
    }

    #[test]
    fn optimal_profile_log_has_many_traces() {
        assert_eq!(resolve(&sim(None, &[]), None, None, None).unwrap().params.trace_count, 825);
    }

    #[test]
    fn bad_settings() {
        assert!(resolve(&sim(Some("user9"), &[]), None, None, None).is_err());
        assert!(resolve(&sim(None, &["bogus=1"]), None, None, None).is_err());
        assert!(resolve(&sim(None, &["search=2"]), None, None, None).is_err());
    }
}
