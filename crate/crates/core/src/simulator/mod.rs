//! Simulation of low-level interaction logs for the summary task.
//!
//! Behavior is controlled by likelihoods in `[0, 1]`. Every trace draws its
//! randomness from the seed and its own index, so traces can be generated in
//! parallel without changing the output.

pub mod scenario;
pub mod session;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_model::{EventLog, LowLevelEvent, Trace};

pub use scenario::{realize_subtask, scenario, Gate, Subtask, SubtaskSpec};
pub use session::{median_delay_ms, Session};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown profile `{0}` (expected optimal or user1..user5)")]
    UnknownProfile(String),
    #[error("parameter {name}={value} outside [0,1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid value `{value}` for {name}")]
    InvalidValue { name: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub reactivity: f64,
    pub mouse_precision: f64,
    pub minimize: f64,
    pub app_closing: f64,
    pub app_open_or_reopen: f64,
    pub search: f64,
    pub hotkey_usage: f64,
    pub repetition: f64,
    pub sequential: f64,
    /// Likelihood of typing a character correctly on the first attempt.
    pub key_precision: f64,
    pub seed: u64,
    pub trace_count: usize,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Profile::Optimal.params()
    }
}

impl SimulationParams {
    fn likelihoods(&self) -> [(&'static str, f64); 10] {
        [
            ("reactivity", self.reactivity),
            ("mouse_precision", self.mouse_precision),
            ("minimize", self.minimize),
            ("app_closing", self.app_closing),
            ("app_open_or_reopen", self.app_open_or_reopen),
            ("search", self.search),
            ("hotkey_usage", self.hotkey_usage),
            ("repetition", self.repetition),
            ("sequential", self.sequential),
            ("key_precision", self.key_precision),
        ]
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in self.likelihoods() {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    /// Sets one parameter from its textual name and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SimError> {
        let invalid = || SimError::InvalidValue {
            name: key.to_string(),
            value: value.to_string(),
        };
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = v.parse().map_err(|_| invalid())?,
            "trace_count" | "traces" => self.trace_count = v.parse().map_err(|_| invalid())?,
            k => {
                let x: f64 = v.parse().map_err(|_| invalid())?;
                let slot = match k {
                    "reactivity" => &mut self.reactivity,
                    "mouse_precision" => &mut self.mouse_precision,
                    "minimize" => &mut self.minimize,
                    "app_closing" => &mut self.app_closing,
                    "app_open_or_reopen" => &mut self.app_open_or_reopen,
                    "search" => &mut self.search,
                    "hotkey_usage" => &mut self.hotkey_usage,
                    "repetition" => &mut self.repetition,
                    "sequential" => &mut self.sequential,
                    "key_precision" => &mut self.key_precision,
                    other => return Err(SimError::UnknownParameter(other.to_string())),
                };
                *slot = x;
            }
        }
        Ok(())
    }

    pub fn is_parameter(key: &str) -> bool {
        matches!(
            key,
            "seed"
                | "trace_count"
                | "traces"
                | "reactivity"
                | "mouse_precision"
                | "minimize"
                | "app_closing"
                | "app_open_or_reopen"
                | "search"
                | "hotkey_usage"
                | "repetition"
                | "sequential"
                | "key_precision"
        )
    }

    /// `key=value` lines, one per parameter.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.likelihoods() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("seed={}\ntrace_count={}\n", self.seed, self.trace_count));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Profile {
    Optimal,
    User1,
    User2,
    User3,
    User4,
    User5,
}

impl Profile {
    pub const ALL: [Profile; 6] = [
        Profile::Optimal,
        Profile::User1,
        Profile::User2,
        Profile::User3,
        Profile::User4,
        Profile::User5,
    ];

    pub fn description(self) -> &'static str {
        match self {
            Profile::Optimal => "High precision and reactivity, no repetitions, hotkeys",
            Profile::User1 => "Lower reactivity, low mouse precision",
            Profile::User2 => "Very low reactivity, no hotkey usage",
            Profile::User3 => "Very low reactivity, repetitions",
            Profile::User4 => "Low reactivity, repetitions, no hotkeys",
            Profile::User5 => "High reactivity, low key precision, repetitions, no hotkeys",
        }
    }

    /// Reactivity is chosen so the median delay matches the profile's
    /// observed mean controllable delay.
    pub fn params(self) -> SimulationParams {
        let optimal = SimulationParams {
            reactivity: 1.0,
            mouse_precision: 1.0,
            minimize: 0.05,
            app_closing: 0.95,
            app_open_or_reopen: 0.05,
            search: 0.05,
            hotkey_usage: 0.95,
            repetition: 0.05,
            sequential: 0.95,
            key_precision: 1.0,
            seed: 0,
            trace_count: 825,
        };
        match self {
            Profile::Optimal => SimulationParams {
                trace_count: 1,
                ..optimal
            },
            Profile::User1 => SimulationParams {
                reactivity: 0.6156,
                mouse_precision: 0.05,
                ..optimal
            },
            Profile::User2 => SimulationParams {
                reactivity: 0.3633,
                hotkey_usage: 0.05,
                ..optimal
            },
            Profile::User3 => SimulationParams {
                reactivity: 0.34,
                repetition: 0.95,
                ..optimal
            },
            Profile::User4 => SimulationParams {
                reactivity: 0.5522,
                hotkey_usage: 0.05,
                repetition: 0.95,
                ..optimal
            },
            Profile::User5 => SimulationParams {
                reactivity: 0.99,
                hotkey_usage: 0.05,
                repetition: 0.95,
                key_precision: 0.05,
                ..optimal
            },
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Profile::Optimal => "optimal",
            Profile::User1 => "user1",
            Profile::User2 => "user2",
            Profile::User3 => "user3",
            Profile::User4 => "user4",
            Profile::User5 => "user5",
        };
        f.write_str(s)
    }
}

impl FromStr for Profile {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect::<String>()
            .to_lowercase();
        Profile::ALL
            .into_iter()
            .find(|p| p.to_string() == norm)
            .ok_or_else(|| SimError::UnknownProfile(s.to_string()))
    }
}

pub fn preset(name: &str) -> Result<SimulationParams, SimError> {
    Ok(name.parse::<Profile>()?.params())
}

/// One complete execution of the scenario.
pub fn simulate_trace(params: &SimulationParams, index: usize) -> Trace<LowLevelEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    let mut session = Session::new(params, rng);
    for subtask in scenario::subtask_order(&mut session) {
        realize_subtask(&mut session, subtask);
    }
    Trace::new(format!("trace-{index:04}"), session.events)
}

pub fn simulate_log(params: &SimulationParams) -> Result<EventLog<LowLevelEvent>, SimError> {
    params.validate()?;
    let traces: Vec<_> = (0..params.trace_count)
        .into_par_iter()
        .map(|i| simulate_trace(params, i))
        .collect();
    Ok(EventLog::new(traces).expect("trace ids are unique"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::{serialize_low_level_log, validate_trace};

    #[test]
    fn presets_match_profile_descriptions() {
        let o = preset("Optimal").unwrap();
        assert_eq!((o.hotkey_usage, o.repetition), (0.95, 0.05));
        assert_eq!(preset("user2").unwrap().hotkey_usage, 0.05);
        assert_eq!(preset("User1").unwrap().mouse_precision, 0.05);
        assert!(matches!(preset("user9"), Err(SimError::UnknownProfile(_))));
        for p in Profile::ALL {
            let params = p.params();
            params.validate().unwrap();
            for (name, v) in params.likelihoods() {
                if !matches!(name, "reactivity" | "mouse_precision" | "key_precision") {
                    assert!(v == 0.05 || v == 0.95, "{p} {name}={v}");
                }
            }
        }
    }

    #[test]
    fn zero_traces() {
        let p = SimulationParams {
            trace_count: 0,
            ..SimulationParams::default()
        };
        assert!(simulate_log(&p).unwrap().is_empty());
    }

    #[test]
    fn same_seed_same_log() {
        let p = SimulationParams {
            trace_count: 5,
            seed: 11,
            ..Profile::User4.params()
        };
        let a = serialize_low_level_log(&simulate_log(&p).unwrap());
        let b = serialize_low_level_log(&simulate_log(&p).unwrap());
        assert_eq!(a, b);
        let c = serialize_low_level_log(
            &simulate_log(&SimulationParams { seed: 12, ..p }).unwrap(),
        );
        assert_ne!(a, c);
    }

    #[test]
    fn traces_are_ordered() {
        for profile in Profile::ALL {
            let p = SimulationParams {
                trace_count: 4,
                ..profile.params()
            };
            for t in simulate_log(&p).unwrap().traces() {
                assert!(validate_trace(t).is_ok(), "{profile}");
            }
        }
    }

    #[test]
    fn set_and_reject() {
        let mut p = SimulationParams::default();
        p.set("hotkey_usage", "0.05").unwrap();
        p.set("seed", "42").unwrap();
        assert_eq!((p.hotkey_usage, p.seed), (0.05, 42));
        assert!(matches!(p.set("bogus", "1"), Err(SimError::UnknownParameter(_))));
        p.set("search", "1.5").unwrap();
        assert!(matches!(p.validate(), Err(SimError::OutOfRange { name: "search", .. })));
    }
}
