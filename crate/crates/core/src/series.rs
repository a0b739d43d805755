//! Door states and hourly state series.

use std::fmt;
use std::str::FromStr;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{format_timestamp, is_hour_aligned, parse_timestamp, HourRange};

/// Hourly door classification. The discriminant is the index into
/// probability vectors and transition-matrix rows: `(open, move, closed)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoorState {
    Open = 0,
    Move = 1,
    Closed = 2,
}

impl DoorState {
    pub const ALL: [DoorState; 3] = [DoorState::Open, DoorState::Move, DoorState::Closed];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DoorState::Open => "open",
            DoorState::Move => "move",
            DoorState::Closed => "closed",
        }
    }

    /// Open-fraction used by profiles: 1, 0.5, 0.
    pub fn open_fraction(self) -> f64 {
        match self {
            DoorState::Open => 1.0,
            DoorState::Move => 0.5,
            DoorState::Closed => 0.0,
        }
    }
}

impl fmt::Display for DoorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DoorState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "open" => Ok(DoorState::Open),
            "move" => Ok(DoorState::Move),
            "closed" => Ok(DoorState::Closed),
            other => Err(format!("unknown door state `{other}`")),
        }
    }
}

/// Contiguous hourly sequence of door states starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSeries {
    start: NaiveDateTime,
    states: Vec<DoorState>,
}

impl StateSeries {
    pub fn new(start: NaiveDateTime, states: Vec<DoorState>) -> Result<Self> {
        if !is_hour_aligned(start) {
            return Err(Error::InvalidRange(format!(
                "series start {start} is not on the hour"
            )));
        }
        if states.is_empty() {
            return Err(Error::InvalidRange("state series must not be empty".into()));
        }
        Ok(Self { start, states })
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn states(&self) -> &[DoorState] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [DoorState] {
        &mut self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn hour_at(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::hours(i as i64)
    }

    pub fn range(&self) -> HourRange {
        HourRange::new(self.start, self.hour_at(self.states.len() - 1))
            .expect("series invariants imply a valid range")
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDateTime, DoorState)> + '_ {
        self.states
            .iter()
            .enumerate()
            .map(move |(i, &s)| (self.hour_at(i), s))
    }

    /// CSV with header `hour,state`, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.states.len() + 1));
        out.push_str("hour,state\n");
        for (t, s) in self.iter() {
            out.push_str(&format_timestamp(t));
            out.push(',');
            out.push_str(s.as_str());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut start = None;
        let mut expected: Option<NaiveDateTime> = None;
        let mut states = Vec::new();
        let mut seen_data = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r').trim();
            if line.is_empty() {
                continue;
            }
            if !seen_data && states.is_empty() && line == "hour,state" {
                seen_data = true;
                continue;
            }
            seen_data = true;
            let (hour, state) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(line_no, "expected `hour,state`"))?;
            let t = parse_timestamp(hour.trim())
                .ok_or_else(|| Error::parse(line_no, format!("malformed hour `{hour}`")))?;
            let s: DoorState = state.trim().parse().map_err(|e| Error::parse(line_no, e))?;
            match expected {
                None => {
                    if !is_hour_aligned(t) {
                        return Err(Error::parse(line_no, "hour is not aligned to :00"));
                    }
                    start = Some(t);
                }
                Some(e) if e != t => {
                    return Err(Error::parse(
                        line_no,
                        format!(
                            "expected hour {}, found {}",
                            format_timestamp(e),
                            hour.trim()
                        ),
                    ));
                }
                Some(_) => {}
            }
            expected = Some(t + Duration::hours(1));
            states.push(s);
        }
        match start {
            Some(start) => Self::new(start, states),
            None => Err(Error::InsufficientData("state CSV has no rows".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_order_matches_probability_vector() {
        assert_eq!(DoorState::Open.index(), 0);
        assert_eq!(DoorState::Move.index(), 1);
        assert_eq!(DoorState::Closed.index(), 2);
        assert_eq!(DoorState::from_index(1), Some(DoorState::Move));
        assert_eq!(DoorState::from_index(3), None);
    }

    #[test]
    fn csv_round_trip() {
        let start = parse_timestamp("2013-10-07T08:00:00").unwrap();
        let s = StateSeries::new(
            start,
            vec![DoorState::Open, DoorState::Move, DoorState::Closed],
        )
        .unwrap();
        let csv = s.to_csv();
        assert_eq!(
            csv,
            "hour,state\n2013-10-07T08:00:00,open\n2013-10-07T09:00:00,move\n2013-10-07T10:00:00,closed\n"
        );
        assert_eq!(StateSeries::from_csv(&csv).unwrap(), s);
        assert_eq!(
            StateSeries::from_csv(&csv.replace('\n', "\r\n")).unwrap(),
            s
        );
    }

    #[test]
    fn csv_rejects_gaps_and_bad_states() {
        let gap = "hour,state\n2013-10-07T08:00:00,open\n2013-10-07T10:00:00,open\n";
        match StateSeries::from_csv(gap) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(StateSeries::from_csv("2013-10-07T08:00:00,ajar\n").is_err());
        assert!(StateSeries::from_csv("hour,state\n").is_err());
    }
}
