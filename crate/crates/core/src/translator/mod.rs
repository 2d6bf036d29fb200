//! Low-level to high-level translation and Intra/Inter Task segmentation.

mod segment;

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::event_model::{
    Cell, EventKey, EventLog, HighLevelEvent, LowLevelEvent, Trace,
};

pub use segment::{inter_sequence, segment_intra_tasks, InterSequence, IntraTask, TRACE_END};

/// Two click pairs in the same cell closer than this become a double click.
pub const DOUBLE_CLICK_WINDOW_MS: u64 = 400;
/// Application events closer than this to their predecessor join its burst.
pub const BURST_WINDOW_MS: u64 = 150;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("trace `{trace}`, event {index}: {key} refers to a process that cannot be resolved")]
    OrphanAEvent {
        trace: String,
        index: usize,
        key: EventKey,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("event {index} has span {span:?} overlapping or preceding its predecessor")]
    Overlap { index: usize, span: (usize, usize) },
    #[error("event {index} has span {span:?} beyond the low-level trace")]
    OutOfRange { index: usize, span: (usize, usize) },
    #[error("low-level event {0} is not covered by any span")]
    Uncovered(usize),
    #[error("event {index} does not carry the timestamp of its span start")]
    Timestamp { index: usize },
}

/// Lower numbers win when a burst mixes keys.
fn burst_priority(key: EventKey) -> u8 {
    match key {
        EventKey::A2 => 0,
        EventKey::A1 => 1,
        EventKey::A8 => 2,
        EventKey::A3 => 3,
        EventKey::A4 => 4,
        EventKey::A5 => 5,
        EventKey::A7 => 6,
        EventKey::A6 => 7,
        _ => u8::MAX,
    }
}

/// `notepad.exe` -> `notepad`.
pub fn app_name(process: &str) -> String {
    let base = process.rsplit(['/', '\\']).next().unwrap_or(process);
    let base = base.strip_suffix(".exe").or_else(|| base.strip_suffix(".EXE")).unwrap_or(base);
    base.to_lowercase()
}

/// Last non-empty component of a path.
pub fn path_tail(path: &str) -> &str {
    path.trim_end_matches(['/', '\\'])
        .rsplit(['/', '\\'])
        .next()
        .unwrap_or(path)
}

/// First `PID#ProcessName` entry of an A7 hierarchy.
fn hierarchy_head(hierarchy: &str) -> Option<(&str, &str)> {
    let first = hierarchy.split(';').next()?;
    let (pid, name) = first.split_once('#')?;
    (!name.is_empty()).then_some((pid, name))
}

fn record_process(pids: &mut HashMap<String, String>, e: &LowLevelEvent) {
    let p = e.params();
    match e.key() {
        EventKey::A1
        | EventKey::A2
        | EventKey::A3
        | EventKey::A4
        | EventKey::A5
        | EventKey::A6 => {
            if !p[1].is_empty() {
                pids.insert(p[0].clone(), p[1].clone());
            }
        }
        EventKey::A7 => {
            for entry in p[0].split(';') {
                if let Some((pid, name)) = entry.split_once('#') {
                    if !name.is_empty() {
                        pids.insert(pid.to_string(), name.to_string());
                    }
                }
            }
        }
        _ => {}
    }
}

fn application_event_name(
    e: &LowLevelEvent,
    pids: &HashMap<String, String>,
) -> Option<String> {
    let p = e.params();
    let action = |process: &str, action: &str| {
        let app = app_name(process);
        (!app.is_empty()).then(|| format!("{app} {action}"))
    };
    match e.key() {
        EventKey::A1 => action(&p[1], "open"),
        EventKey::A2 => action(&p[1], "close"),
        EventKey::A3 => action(&p[1], "maximize"),
        EventKey::A4 => action(&p[1], "minimize"),
        EventKey::A5 => action(&p[1], "rename"),
        EventKey::A6 => action(&p[1], "move"),
        EventKey::A7 => hierarchy_head(&p[0]).and_then(|(_, name)| action(name, "focus")),
        EventKey::A8 => {
            let process = pids.get(&p[0])?;
            action(process, &format!("path to {}", path_tail(&p[2])))
        }
        _ => None,
    }
}

fn click_name(code: &str, double: bool) -> &'static str {
    match (code == "2", double) {
        (false, false) => "mouse click",
        (false, true) => "mouse doubleclick",
        (true, false) => "mouse rightclick",
        (true, true) => "mouse doublerightclick",
    }
}

/// Whether `events[i]` and `events[i + 1]` form a press/release pair.
fn click_pair_at(events: &[LowLevelEvent], i: usize) -> Option<Cell> {
    let press = events.get(i)?;
    let release = events.get(i + 1)?;
    (press.key() == EventKey::K3
        && release.key() == EventKey::K4
        && press.key_code() == release.key_code()
        && press.cell() == release.cell())
    .then(|| press.cell())
    .flatten()
}

/// Translates one low-level trace.
///
/// Mouse moves become `mouse to x,y` when the cell changes, press/release
/// pairs become clicks, key presses become `key <code>` and key releases are
/// absorbed. Runs of application events become one uncontrollable event.
pub fn translate_trace(low: &Trace<LowLevelEvent>) -> Result<Trace<HighLevelEvent>, TranslateError> {
    let ev = &low.events;
    let mut out = Vec::new();
    let mut pids: HashMap<String, String> = HashMap::new();
    let mut cursor: Option<Cell> = None;
    let mut i = 0;
    while i < ev.len() {
        let e = &ev[i];
        let ts = e.timestamp_ms();
        match e.key() {
            EventKey::M => {
                let cell = e.cell().expect("validated mouse move");
                if cursor != Some(cell) {
                    out.push(HighLevelEvent::controllable(format!("mouse to {cell}"), ts, (i, i)));
                }
                cursor = Some(cell);
                i += 1;
            }
            EventKey::K3 => {
                cursor = e.cell();
                let code = e.key_code().unwrap_or("1");
                if let Some(cell) = click_pair_at(ev, i) {
                    let double = click_pair_at(ev, i + 2).is_some_and(|c2| {
                        c2 == cell
                            && ev[i + 2].key_code() == e.key_code()
                            && ev[i + 3].timestamp_ms() - ts <= DOUBLE_CLICK_WINDOW_MS
                    });
                    let end = if double { i + 3 } else { i + 1 };
                    out.push(HighLevelEvent::controllable(click_name(code, double), ts, (i, end)));
                    i = end + 1;
                } else {
                    out.push(HighLevelEvent::controllable("mouse press", ts, (i, i)));
                    i += 1;
                }
            }
            EventKey::K4 => {
                cursor = e.cell();
                out.push(HighLevelEvent::controllable("mouse release", ts, (i, i)));
                i += 1;
            }
            EventKey::K1 => {
                let code = e.key_code().expect("key event");
                out.push(HighLevelEvent::controllable(format!("key {code}"), ts, (i, i)));
                i += 1;
            }
            EventKey::K2 => i += 1,
            EventKey::K5 => {
                let dir = if e.params()[0] == "1" { "up" } else { "down" };
                out.push(HighLevelEvent::controllable(format!("mouse wheel {dir}"), ts, (i, i)));
                i += 1;
            }
            _ => {
                let mut end = i;
                while end + 1 < ev.len()
                    && ev[end + 1].key().is_application()
                    && ev[end + 1].timestamp_ms() - ev[end].timestamp_ms() <= BURST_WINDOW_MS
                {
                    end += 1;
                }
                for b in &ev[i..=end] {
                    record_process(&mut pids, b);
                }
                let (offset, lead) = ev[i..=end]
                    .iter()
                    .enumerate()
                    .min_by_key(|(k, b)| (burst_priority(b.key()), *k))
                    .expect("non-empty burst");
                let name = application_event_name(lead, &pids).ok_or_else(|| {
                    TranslateError::OrphanAEvent {
                        trace: low.id.clone(),
                        index: i + offset,
                        key: lead.key(),
                    }
                })?;
                out.push(HighLevelEvent::uncontrollable(name, ts, (i, end)));
                i = end + 1;
            }
        }
    }
    Ok(Trace::new(low.id.clone(), out))
}

/// Translates every trace in parallel; the first failing trace (by id) is reported.
pub fn translate_log(
    log: &EventLog<LowLevelEvent>,
) -> Result<EventLog<HighLevelEvent>, TranslateError> {
    let traces = log
        .traces()
        .par_iter()
        .map(translate_trace)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EventLog::new(traces).expect("ids carried over from a valid log"))
}

/// Checks that spans are ordered, disjoint, start at the event's timestamp and
/// cover every low-level event except key releases and same-cell mouse moves.
pub fn verify_spans(
    low: &Trace<LowLevelEvent>,
    high: &Trace<HighLevelEvent>,
) -> Result<(), SpanError> {
    let n = low.events.len();
    let mut covered = vec![false; n];
    let mut next_free = 0;
    for (index, h) in high.events.iter().enumerate() {
        let (s, e) = h.source_span;
        if e >= n || s > e {
            return Err(SpanError::OutOfRange { index, span: (s, e) });
        }
        if s < next_free {
            return Err(SpanError::Overlap { index, span: (s, e) });
        }
        if low.events[s].timestamp_ms() != h.timestamp_ms {
            return Err(SpanError::Timestamp { index });
        }
        covered[s..=e].iter_mut().for_each(|c| *c = true);
        next_free = e + 1;
    }
    let mut cursor = None;
    for (i, e) in low.events.iter().enumerate() {
        let silent = match e.key() {
            EventKey::K2 => true,
            EventKey::M => cursor == e.cell(),
            _ => false,
        };
        if e.cell().is_some() {
            cursor = e.cell();
        }
        if !covered[i] && !silent {
            return Err(SpanError::Uncovered(i));
        }
    }
    Ok(())
}
