//! Contact-sensor event logs: parsing, hourly open ratios, discretization,
//! and the closed-outside-working-hours assumption.

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::TimeSlotSchedule;
use crate::series::{DoorState, StateSeries};
use crate::time::{format_timestamp, parse_timestamp, HourRange};

pub const EVENT_CSV_HEADER: &str = "timestamp,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensorEvent {
    pub timestamp: NaiveDateTime,
    /// `true` = open (1), `false` = closed (0).
    pub open: bool,
}

/// Ordered contact-sensor events, at most one per timestamp.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    entries: Vec<SensorEvent>,
}

impl EventLog {
    /// Sorts by timestamp; for equal timestamps the last given value wins.
    pub fn new(mut entries: Vec<SensorEvent>) -> Self {
        entries.sort_by_key(|e| e.timestamp);
        let mut out: Vec<SensorEvent> = Vec::with_capacity(entries.len());
        for e in entries {
            match out.last_mut() {
                Some(last) if last.timestamp == e.timestamp => *last = e,
                _ => out.push(e),
            }
        }
        Self { entries: out }
    }

    pub fn entries(&self) -> &[SensorEvent] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Event CSV with header, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.entries.len() + 1));
        out.push_str(EVENT_CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format_timestamp(e.timestamp));
            out.push_str(if e.open { ",1\n" } else { ",0\n" });
        }
        out
    }
}

/// Parses `<YYYY-MM-DDThh:mm:ss>,<0|1>` lines. Blank lines and a header
/// `timestamp,value` on the first non-blank line are skipped.
pub fn parse_event_log(text: &str) -> Result<EventLog> {
    let mut entries = Vec::new();
    let mut first = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if std::mem::take(&mut first) && line == EVENT_CSV_HEADER {
            continue;
        }
        let mut fields = line.split(',');
        let (ts, value) = match (fields.next(), fields.next(), fields.next()) {
            (Some(ts), Some(value), None) => (ts.trim(), value.trim()),
            _ => return Err(Error::parse(line_no, "expected `timestamp,value`")),
        };
        let timestamp = parse_timestamp(ts)
            .ok_or_else(|| Error::parse(line_no, format!("malformed timestamp `{ts}`")))?;
        let open = match value {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(
                    line_no,
                    format!("value `{other}` is not 0 or 1"),
                ))
            }
        };
        entries.push(SensorEvent { timestamp, open });
    }
    Ok(EventLog::new(entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioSource {
    Measured,
    Assumed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyRatio {
    pub ratio: f64,
    pub source: RatioSource,
}

/// One open-duration ratio per contiguous calendar hour.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRatioSeries {
    start: NaiveDateTime,
    ratios: Vec<HourlyRatio>,
}

impl HourlyRatioSeries {
    pub fn new(start: NaiveDateTime, ratios: Vec<HourlyRatio>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InvalidRange("ratio series must not be empty".into()));
        }
        if let Some(bad) = ratios.iter().find(|r| !(0.0..=1.0).contains(&r.ratio)) {
            return Err(Error::InvalidRange(format!(
                "ratio {} outside [0,1]",
                bad.ratio
            )));
        }
        if !crate::time::is_hour_aligned(start) {
            return Err(Error::InvalidRange(format!(
                "series start {start} is not on the hour"
            )));
        }
        Ok(Self { start, ratios })
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn ratios(&self) -> &[HourlyRatio] {
        &self.ratios
    }
}

/// Fraction of each hour in `range` during which the door was open, using a
/// zero-order hold between events. Before the first event the door is
/// assumed closed and those hours are marked [`RatioSource::Assumed`].
pub fn hourly_open_ratio(log: &EventLog, range: HourRange) -> HourlyRatioSeries {
    let events = log.entries();
    let first_event = events.first().map(|e| e.timestamp);
    // Index of the first event strictly after the current position.
    let mut next = events.partition_point(|e| e.timestamp <= range.first());
    let mut held = next.checked_sub(1).map(|i| events[i].open).unwrap_or(false);

    let mut ratios = Vec::with_capacity(range.len());
    for hour in range.hours() {
        let end = hour + Duration::hours(1);
        let mut cursor = hour;
        let mut open_ms: i64 = 0;
        while next < events.len() && events[next].timestamp < end {
            let t = events[next].timestamp;
            if held {
                open_ms += (t - cursor).num_milliseconds();
            }
            held = events[next].open;
            cursor = t;
            next += 1;
        }
        if held {
            open_ms += (end - cursor).num_milliseconds();
        }
        let source = match first_event {
            Some(t0) if t0 < end => RatioSource::Measured,
            _ => RatioSource::Assumed,
        };
        ratios.push(HourlyRatio {
            ratio: (open_ms as f64 / 3_600_000.0).clamp(0.0, 1.0),
            source,
        });
    }
    HourlyRatioSeries {
        start: range.first(),
        ratios,
    }
}

/// Ratio bands: `ratio <= closed_max` is closed, `ratio >= open_min` is open,
/// anything strictly between is move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    closed_max: f64,
    open_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            closed_max: 0.2,
            open_min: 0.8,
        }
    }
}

impl Thresholds {
    pub fn new(closed_max: f64, open_min: f64) -> Result<Self> {
        if !(0.0 < closed_max && closed_max < open_min && open_min < 1.0) {
            return Err(Error::config(
                "thresholds",
                format!("need 0 < closed_max < open_min < 1, got {closed_max}, {open_min}"),
            ));
        }
        Ok(Self {
            closed_max,
            open_min,
        })
    }

    pub fn closed_max(&self) -> f64 {
        self.closed_max
    }

    pub fn open_min(&self) -> f64 {
        self.open_min
    }

    pub fn classify(&self, ratio: f64) -> DoorState {
        if ratio <= self.closed_max {
            DoorState::Closed
        } else if ratio >= self.open_min {
            DoorState::Open
        } else {
            DoorState::Move
        }
    }
}

pub fn discretize(series: &HourlyRatioSeries, th: Thresholds) -> StateSeries {
    let states = series.ratios.iter().map(|r| th.classify(r.ratio)).collect();
    StateSeries::new(series.start, states).expect("ratio series is non-empty and aligned")
}

/// Sets every forced-closed hour to [`DoorState::Closed`].
pub fn apply_closure_assumptions(series: &StateSeries, schedule: &TimeSlotSchedule) -> StateSeries {
    let mut out = series.clone();
    let start = series.start();
    for (i, s) in out.states_mut().iter_mut().enumerate() {
        if schedule.is_forced_closed(start + Duration::hours(i as i64)) {
            *s = DoorState::Closed;
        }
    }
    out
}

/// Parse, resample, discretize and apply closure assumptions in one go.
pub fn ingest_states(
    log: &EventLog,
    range: HourRange,
    th: Thresholds,
    schedule: &TimeSlotSchedule,
) -> StateSeries {
    let ratios = hourly_open_ratio(log, range);
    apply_closure_assumptions(&discretize(&ratios, th), schedule)
}
