//! Line-oriented log files.
//!
//! Low-level: `trace_id;timestamp_ms;EVENT_KEY;param1,param2,...`
//! High-level: `trace_id;timestamp_ms;kind;name;span_start,span_end` with kind `C` or `U`.
//!
//! Lines starting with `#` and blank lines are ignored. Output is canonical:
//! traces in lexicographic id order, events in timestamp order, `\n` endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{EventError, EventKind, EventLog, HighLevelEvent, LowLevelEvent, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown event key `{key}`")]
    UnknownEventKey { line: usize, key: String },
    #[error("line {line}: {key} expects {expected} parameters, got {actual}")]
    ArityMismatch {
        line: usize,
        key: String,
        expected: usize,
        actual: usize,
    },
    #[error("line {line}: timestamp {timestamp_ms} precedes previous event of trace `{trace}`")]
    NonMonotoneTimestamp {
        line: usize,
        trace: String,
        timestamp_ms: u64,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::MalformedLine { line, .. }
            | ParseError::UnknownEventKey { line, .. }
            | ParseError::ArityMismatch { line, .. }
            | ParseError::NonMonotoneTimestamp { line, .. } => *line,
        }
    }

    fn from_event(line: usize, err: EventError) -> Self {
        match err {
            EventError::UnknownEventKey(key) => ParseError::UnknownEventKey { line, key },
            EventError::ArityMismatch {
                key,
                expected,
                actual,
            } => ParseError::ArityMismatch {
                line,
                key: key.to_string(),
                expected,
                actual,
            },
            other => ParseError::MalformedLine {
                line,
                reason: other.to_string(),
            },
        }
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

/// Yields `(1-based line number, content)` for every non-comment, non-blank line.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_trace_id(line: usize, raw: &str) -> Result<String, ParseError> {
    if raw.is_empty() {
        return Err(malformed(line, "empty trace id"));
    }
    Ok(raw.to_string())
}

fn parse_timestamp(line: usize, raw: &str) -> Result<u64, ParseError> {
    raw.parse()
        .map_err(|_| malformed(line, format!("invalid timestamp `{raw}`")))
}

/// Groups events by trace id in order of appearance, enforcing per-trace ordering.
struct TraceGrouper<E> {
    traces: BTreeMap<String, Vec<E>>,
}

impl<E: super::Timestamped> TraceGrouper<E> {
    fn new() -> Self {
        Self {
            traces: BTreeMap::new(),
        }
    }

    fn push(&mut self, line: usize, id: String, event: E) -> Result<(), ParseError> {
        let events = self.traces.entry(id.clone()).or_default();
        if let Some(prev) = events.last() {
            if event.timestamp_ms() < prev.timestamp_ms() {
                return Err(ParseError::NonMonotoneTimestamp {
                    line,
                    trace: id,
                    timestamp_ms: event.timestamp_ms(),
                });
            }
        }
        events.push(event);
        Ok(())
    }

    fn finish(self) -> EventLog<E> {
        let traces = self
            .traces
            .into_iter()
            .map(|(id, events)| Trace::new(id, events))
            .collect();
        EventLog::new(traces).expect("grouped ids are unique")
    }
}

pub fn parse_low_level_log(text: &str) -> Result<EventLog<LowLevelEvent>, ParseError> {
    let mut grouper = TraceGrouper::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.splitn(4, ';').collect();
        if fields.len() != 4 {
            return Err(malformed(line, "expected `trace_id;timestamp_ms;EVENT_KEY;params`"));
        }
        let id = parse_trace_id(line, fields[0])?;
        let ts = parse_timestamp(line, fields[1])?;
        let key = fields[2]
            .parse()
            .map_err(|e| ParseError::from_event(line, e))?;
        let params = fields[3].split(',').map(str::to_string).collect();
        let event = LowLevelEvent::new(ts, key, params).map_err(|e| ParseError::from_event(line, e))?;
        grouper.push(line, id, event)?;
    }
    Ok(grouper.finish())
}

pub fn serialize_low_level_log(log: &EventLog<LowLevelEvent>) -> String {
    let mut out = String::new();
    for trace in log.traces() {
        for e in &trace.events {
            let _ = writeln!(
                out,
                "{};{};{};{}",
                trace.id,
                e.timestamp_ms(),
                e.key(),
                e.params().join(",")
            );
        }
    }
    out
}

pub fn parse_high_level_log(text: &str) -> Result<EventLog<HighLevelEvent>, ParseError> {
    let mut grouper = TraceGrouper::new();
    for (line, content) in content_lines(text) {
        let head: Vec<&str> = content.splitn(4, ';').collect();
        if head.len() != 4 {
            return Err(malformed(line, "expected `trace_id;timestamp_ms;kind;name;span`"));
        }
        let id = parse_trace_id(line, head[0])?;
        let ts = parse_timestamp(line, head[1])?;
        let kind = match head[2] {
            "C" => EventKind::Controllable,
            "U" => EventKind::Uncontrollable,
            other => return Err(malformed(line, format!("unknown kind `{other}`"))),
        };
        let (name, span) = head[3]
            .rsplit_once(';')
            .ok_or_else(|| malformed(line, "missing source span"))?;
        if name.is_empty() {
            return Err(malformed(line, "empty event name"));
        }
        let (s, e) = span
            .split_once(',')
            .ok_or_else(|| malformed(line, "span must be `start,end`"))?;
        let start: usize = s
            .parse()
            .map_err(|_| malformed(line, format!("invalid span start `{s}`")))?;
        let end: usize = e
            .parse()
            .map_err(|_| malformed(line, format!("invalid span end `{e}`")))?;
        if end < start {
            return Err(malformed(line, "span end precedes start"));
        }
        let event = HighLevelEvent {
            name: name.to_string(),
            kind,
            timestamp_ms: ts,
            source_span: (start, end),
        };
        grouper.push(line, id, event)?;
    }
    Ok(grouper.finish())
}

pub fn serialize_high_level_log(log: &EventLog<HighLevelEvent>) -> String {
    let mut out = String::new();
    for trace in log.traces() {
        for e in &trace.events {
            let _ = writeln!(
                out,
                "{};{};{};{};{},{}",
                trace.id,
                e.timestamp_ms,
                e.kind.code(),
                e.name,
                e.source_span.0,
                e.source_span.1
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_model::EventKey;

    #[test]
    fn minimal_input() {
        let log = parse_low_level_log("t1;0;M;2,3\nt1;105;K3;1,2,3\n").unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.traces()[0].len(), 2);
        assert_eq!(log.traces()[0].events[1].key(), EventKey::K3);
    }

    #[test]
    fn arity_mismatch_carries_line() {
        let err = parse_low_level_log("# header\nt1;50;A8;pid1,docs\n").unwrap_err();
        assert!(matches!(err, ParseError::ArityMismatch { line: 2, expected: 3, actual: 2, .. }));
    }

    #[test]
    fn unknown_key() {
        let err = parse_low_level_log("t1;0;Z9;1").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownEventKey {
                line: 1,
                key: "Z9".into()
            }
        );
    }

    #[test]
    fn non_monotone() {
        let err = parse_low_level_log("t1;10;M;1,1\nt2;0;M;1,1\nt1;5;M;1,2\n").unwrap_err();
        assert!(matches!(err, ParseError::NonMonotoneTimestamp { line: 3, .. }));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_low_level_log("t1;0;M").unwrap_err(),
            ParseError::MalformedLine { line: 1, .. }
        ));
        assert!(matches!(
            parse_low_level_log("t1;x;M;1,1").unwrap_err(),
            ParseError::MalformedLine { line: 1, .. }
        ));
        assert!(matches!(
            parse_low_level_log("t1;0;M;1,7").unwrap_err(),
            ParseError::MalformedLine { line: 1, .. }
        ));
    }

    #[test]
    fn empty_log_serializes_empty() {
        assert_eq!(serialize_low_level_log(&EventLog::default()), "");
        assert_eq!(serialize_high_level_log(&EventLog::default()), "");
    }

    #[test]
    fn single_event_line() {
        let e = LowLevelEvent::new(0, EventKey::K1, vec!["28".into()]).unwrap();
        let log = EventLog::new(vec![Trace::new("t1", vec![e])]).unwrap();
        assert_eq!(serialize_low_level_log(&log), "t1;0;K1;28\n");
    }

    #[test]
    fn hierarchy_param_keeps_semicolons() {
        let text = "t1;0;A7;12#explorer.exe;40#notepad.exe\n";
        let log = parse_low_level_log(text).unwrap();
        assert_eq!(log.traces()[0].events[0].params()[0], "12#explorer.exe;40#notepad.exe");
        assert_eq!(serialize_low_level_log(&log), text);
    }

    #[test]
    fn canonicalization_is_a_fixed_point() {
        // interleaved traces, comments, blank lines, CRLF
        let raw = "# c\nt2;5;K1;TEXT\r\n\nt1;0;M;1,1\nt2;9;K2;TEXT\nt1;3;K5;-1\n";
        let once = serialize_low_level_log(&parse_low_level_log(raw).unwrap());
        assert_eq!(once, "t1;0;M;1,1\nt1;3;K5;-1\nt2;5;K1;TEXT\nt2;9;K2;TEXT\n");
        let twice = serialize_low_level_log(&parse_low_level_log(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn high_level_round_trip_with_commas_in_names() {
        let text = "a;0;C;mouse to 4,3;0,0\na;120;U;explorer path to documents/company data;3,5\n";
        let log = parse_high_level_log(text).unwrap();
        assert_eq!(log.traces()[0].events[0].name, "mouse to 4,3");
        assert_eq!(log.traces()[0].events[1].source_span, (3, 5));
        assert_eq!(serialize_high_level_log(&log), text);
    }

    #[test]
    fn high_level_errors() {
        assert!(parse_high_level_log("a;0;X;n;0,0").is_err());
        assert!(parse_high_level_log("a;0;C;n;3,1").is_err());
        assert!(parse_high_level_log("a;0;C;n").is_err());
    }
}
