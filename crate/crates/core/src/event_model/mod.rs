//! Events, traces and event logs at both abstraction levels.
//!
//! Low-level events are raw logger records (window and input events with a
//! key such as `A3` or `K1`). High-level events are named, mining-ready
//! events derived from runs of low-level events.

mod io;
pub mod keycodes;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{
    parse_high_level_log, parse_low_level_log, serialize_high_level_log,
    serialize_low_level_log, ParseError,
};
pub use keycodes::{InputType, KeyCodeTable};

/// Side length of the screen grid used for mouse coordinates.
pub const GRID_SIZE: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("unknown event key `{0}`")]
    UnknownEventKey(String),
    #[error("{key} expects {expected} parameters, got {actual}")]
    ArityMismatch {
        key: EventKey,
        expected: usize,
        actual: usize,
    },
    #[error("{key}: invalid parameter `{value}`: {reason}")]
    InvalidParam {
        key: EventKey,
        value: String,
        reason: &'static str,
    },
    #[error("duplicate trace id `{0}`")]
    DuplicateTraceId(String),
}

// ============================================================================
// Low-level events
// ============================================================================

/// Event keys emitted by the logger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKey {
    /// Application opened.
    A1,
    /// Application closed.
    A2,
    /// Application maximized.
    A3,
    /// Application minimized.
    A4,
    /// Window title changed.
    A5,
    /// Window position changed.
    A6,
    /// Window hierarchy order changed.
    A7,
    /// Explorer path changed.
    A8,
    /// Key pressed.
    K1,
    /// Key released.
    K2,
    /// Mouse button pressed.
    K3,
    /// Mouse button released.
    K4,
    /// Mouse wheel.
    K5,
    /// Mouse position.
    M,
}

impl EventKey {
    pub const ALL: [EventKey; 14] = [
        EventKey::A1,
        EventKey::A2,
        EventKey::A3,
        EventKey::A4,
        EventKey::A5,
        EventKey::A6,
        EventKey::A7,
        EventKey::A8,
        EventKey::K1,
        EventKey::K2,
        EventKey::K3,
        EventKey::K4,
        EventKey::K5,
        EventKey::M,
    ];

    /// Parameter names in logger order.
    pub fn schema(self) -> &'static [&'static str] {
        match self {
            EventKey::A1 => &[
                "PID",
                "ProcessName",
                "WindowTitle",
                "width",
                "height",
                "top_left_x",
                "top_left_y",
            ],
            EventKey::A2 => &["PID", "ProcessName", "WindowTitle"],
            EventKey::A3 | EventKey::A4 => &["PID", "ProcessName"],
            EventKey::A5 => &["PID", "ProcessName", "WindowTitle"],
            EventKey::A6 => &[
                "PID",
                "ProcessName",
                "width",
                "height",
                "top_left_x",
                "top_left_y",
            ],
            EventKey::A7 => &["Hierarchy"],
            EventKey::A8 => &["PID", "OldPath", "NewPath"],
            EventKey::K1 | EventKey::K2 => &["KeyCode"],
            EventKey::K3 | EventKey::K4 => &["KeyCode", "x", "y"],
            EventKey::K5 => &["Direction"],
            EventKey::M => &["x", "y"],
        }
    }

    pub fn arity(self) -> usize {
        self.schema().len()
    }

    /// True for the window/system keys `A1`..`A8`.
    pub fn is_application(self) -> bool {
        matches!(
            self,
            EventKey::A1
                | EventKey::A2
                | EventKey::A3
                | EventKey::A4
                | EventKey::A5
                | EventKey::A6
                | EventKey::A7
                | EventKey::A8
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKey::A1 => "A1",
            EventKey::A2 => "A2",
            EventKey::A3 => "A3",
            EventKey::A4 => "A4",
            EventKey::A5 => "A5",
            EventKey::A6 => "A6",
            EventKey::A7 => "A7",
            EventKey::A8 => "A8",
            EventKey::K1 => "K1",
            EventKey::K2 => "K2",
            EventKey::K3 => "K3",
            EventKey::K4 => "K4",
            EventKey::K5 => "K5",
            EventKey::M => "M",
        }
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKey {
    type Err = EventError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| EventError::UnknownEventKey(s.to_string()))
    }
}

/// A cell of the 4x4 screen grid, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: u8,
    pub y: u8,
}

impl Cell {
    /// Panics if the coordinates fall outside the grid.
    pub fn new(x: u8, y: u8) -> Self {
        assert!(
            (1..=GRID_SIZE).contains(&x) && (1..=GRID_SIZE).contains(&y),
            "cell ({x},{y}) outside grid"
        );
        Self { x, y }
    }

    pub fn chebyshev(self, other: Cell) -> u32 {
        let dx = (self.x as i32 - other.x as i32).unsigned_abs();
        let dy = (self.y as i32 - other.y as i32).unsigned_abs();
        dx.max(dy)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        (self.x as i32 - other.x as i32).unsigned_abs()
            + (self.y as i32 - other.y as i32).unsigned_abs()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

fn parse_grid_coord(key: EventKey, value: &str) -> Result<u8, EventError> {
    match value.parse::<u8>() {
        Ok(v) if (1..=GRID_SIZE).contains(&v) => Ok(v),
        _ => Err(EventError::InvalidParam {
            key,
            value: value.to_string(),
            reason: "grid coordinate must be an integer in 1..4",
        }),
    }
}

/// A raw logger record. Construct through [`LowLevelEvent::new`], which checks
/// the parameter schema of the key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LowLevelEvent {
    timestamp_ms: u64,
    key: EventKey,
    params: Vec<String>,
}

impl LowLevelEvent {
    pub fn new(timestamp_ms: u64, key: EventKey, params: Vec<String>) -> Result<Self, EventError> {
        if params.len() != key.arity() {
            return Err(EventError::ArityMismatch {
                key,
                expected: key.arity(),
                actual: params.len(),
            });
        }
        for p in &params {
            if p.contains([',', '\n', '\r']) {
                return Err(EventError::InvalidParam {
                    key,
                    value: p.clone(),
                    reason: "parameters may not contain commas or line breaks",
                });
            }
        }
        let table = KeyCodeTable::standard();
        match key {
            EventKey::M => {
                parse_grid_coord(key, &params[0])?;
                parse_grid_coord(key, &params[1])?;
            }
            EventKey::K3 | EventKey::K4 => {
                let ok = params[0]
                    .parse::<u32>()
                    .is_ok_and(|c| table.contains(InputType::Mouse, c));
                if !ok {
                    return Err(EventError::InvalidParam {
                        key,
                        value: params[0].clone(),
                        reason: "unknown mouse button code",
                    });
                }
                parse_grid_coord(key, &params[1])?;
                parse_grid_coord(key, &params[2])?;
            }
            EventKey::K1 | EventKey::K2 => {
                if !table.is_valid_keyboard_code(&params[0]) {
                    return Err(EventError::InvalidParam {
                        key,
                        value: params[0].clone(),
                        reason: "key code not recorded and not TEXT/NUM",
                    });
                }
            }
            EventKey::K5 => {
                if params[0] != "1" && params[0] != "-1" {
                    return Err(EventError::InvalidParam {
                        key,
                        value: params[0].clone(),
                        reason: "wheel direction must be 1 or -1",
                    });
                }
            }
            _ => {}
        }
        Ok(Self {
            timestamp_ms,
            key,
            params,
        })
    }

    /// Mouse position event.
    pub fn mouse_move(timestamp_ms: u64, cell: Cell) -> Self {
        Self::new(timestamp_ms, EventKey::M, vec![cell.x.to_string(), cell.y.to_string()])
            .expect("grid cell is always valid")
    }

    pub fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }

    pub fn key(&self) -> EventKey {
        self.key
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// The grid cell carried by `M`, `K3` and `K4` events.
    pub fn cell(&self) -> Option<Cell> {
        let (x, y) = match self.key {
            EventKey::M => (&self.params[0], &self.params[1]),
            EventKey::K3 | EventKey::K4 => (&self.params[1], &self.params[2]),
            _ => return None,
        };
        Some(Cell::new(x.parse().ok()?, y.parse().ok()?))
    }

    /// The key code of `K1`..`K4` events.
    pub fn key_code(&self) -> Option<&str> {
        match self.key {
            EventKey::K1 | EventKey::K2 | EventKey::K3 | EventKey::K4 => Some(&self.params[0]),
            _ => None,
        }
    }
}

// ============================================================================
// High-level events
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// Physically performed by the user (keystroke, mouse move, click).
    Controllable,
    /// A system-side consequence of controllable events.
    Uncontrollable,
}

impl EventKind {
    pub fn code(self) -> char {
        match self {
            EventKind::Controllable => 'C',
            EventKind::Uncontrollable => 'U',
        }
    }
}

/// Named event derived from a span of low-level events.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HighLevelEvent {
    pub name: String,
    pub kind: EventKind,
    pub timestamp_ms: u64,
    /// Inclusive index range into the originating low-level trace.
    pub source_span: (usize, usize),
}

impl HighLevelEvent {
    pub fn controllable(name: impl Into<String>, timestamp_ms: u64, span: (usize, usize)) -> Self {
        Self {
            name: name.into(),
            kind: EventKind::Controllable,
            timestamp_ms,
            source_span: span,
        }
    }

    pub fn uncontrollable(
        name: impl Into<String>,
        timestamp_ms: u64,
        span: (usize, usize),
    ) -> Self {
        Self {
            name: name.into(),
            kind: EventKind::Uncontrollable,
            timestamp_ms,
            source_span: span,
        }
    }

    pub fn is_controllable(&self) -> bool {
        self.kind == EventKind::Controllable
    }
}

// ============================================================================
// Traces and logs
// ============================================================================

/// Anything carrying a millisecond timestamp.
pub trait Timestamped {
    fn timestamp_ms(&self) -> u64;
}

impl Timestamped for LowLevelEvent {
    fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }
}

impl Timestamped for HighLevelEvent {
    fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace<E> {
    pub id: String,
    pub events: Vec<E>,
}

impl<E> Trace<E> {
    pub fn new(id: impl Into<String>, events: Vec<E>) -> Self {
        Self {
            id: id.into(),
            events,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl<E: Timestamped> Trace<E> {
    /// Elapsed time between the first and last event.
    pub fn duration_ms(&self) -> u64 {
        match (self.events.first(), self.events.last()) {
            (Some(a), Some(b)) => b.timestamp_ms() - a.timestamp_ms(),
            _ => 0,
        }
    }
}

/// An ordering violation: the event at `index` is earlier than its predecessor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub previous_ms: u64,
    pub timestamp_ms: u64,
}

/// Checks that timestamps never decrease. Ties are allowed.
pub fn validate_trace<E: Timestamped>(trace: &Trace<E>) -> Result<(), Vec<Violation>> {
    let violations: Vec<Violation> = trace
        .events
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].timestamp_ms() < w[0].timestamp_ms())
        .map(|(i, w)| Violation {
            index: i + 1,
            previous_ms: w[0].timestamp_ms(),
            timestamp_ms: w[1].timestamp_ms(),
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// A collection of uniquely identified traces, kept sorted by trace id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog<E> {
    traces: Vec<Trace<E>>,
}

impl<E> Default for EventLog<E> {
    fn default() -> Self {
        Self { traces: Vec::new() }
    }
}

impl<E> EventLog<E> {
    pub fn new(mut traces: Vec<Trace<E>>) -> Result<Self, EventError> {
        traces.sort_by(|a, b| a.id.cmp(&b.id));
        let mut seen = BTreeSet::new();
        for t in &traces {
            if !seen.insert(t.id.as_str()) {
                return Err(EventError::DuplicateTraceId(t.id.clone()));
            }
        }
        Ok(Self { traces })
    }

    pub fn traces(&self) -> &[Trace<E>] {
        &self.traces
    }

    pub fn into_traces(self) -> Vec<Trace<E>> {
        self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    /// Applies `f` to every trace, keeping ids.
    pub fn map_traces<F, T>(&self, f: F) -> Result<EventLog<T>, EventError>
    where
        F: Fn(&Trace<E>) -> Trace<T>,
    {
        EventLog::new(self.traces.iter().map(f).collect())
    }
}
