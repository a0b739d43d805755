//! Calendar hours and inclusive hour ranges (local wall-clock, no time zones).

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

/// Timestamp layout used by every CSV file.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn is_hour_aligned(t: NaiveDateTime) -> bool {
    t.minute() == 0 && t.second() == 0 && t.nanosecond() == 0
}

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).ok()
}

/// Inclusive range of calendar hours `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HourRange {
    first: NaiveDateTime,
    last: NaiveDateTime,
}

impl HourRange {
    pub fn new(first: NaiveDateTime, last: NaiveDateTime) -> Result<Self> {
        if !is_hour_aligned(first) || !is_hour_aligned(last) {
            return Err(Error::InvalidRange(format!(
                "hours must be aligned to :00 (got {first} .. {last})"
            )));
        }
        if last < first {
            return Err(Error::InvalidRange(format!("{last} is before {first}")));
        }
        Ok(Self { first, last })
    }

    /// `days` whole days starting at midnight of `start`.
    pub fn days(start: NaiveDate, days: u32) -> Result<Self> {
        if days == 0 {
            return Err(Error::InvalidRange("zero days".into()));
        }
        let first = start.and_hms_opt(0, 0, 0).expect("midnight exists");
        Self::new(first, first + Duration::hours(24 * i64::from(days) - 1))
    }

    pub fn first(&self) -> NaiveDateTime {
        self.first
    }

    pub fn last(&self) -> NaiveDateTime {
        self.last
    }

    /// Exclusive end, one hour after `last`.
    pub fn end(&self) -> NaiveDateTime {
        self.last + Duration::hours(1)
    }

    pub fn len(&self) -> usize {
        ((self.last - self.first).num_hours() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hours(&self) -> impl Iterator<Item = NaiveDateTime> {
        let first = self.first;
        (0..self.len() as i64).map(move |i| first + Duration::hours(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(s: &str) -> NaiveDateTime {
        parse_timestamp(s).unwrap()
    }

    #[test]
    fn range_length_and_iteration() {
        let r = HourRange::new(at("2013-10-07T08:00:00"), at("2013-10-07T10:00:00")).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.hours().last(), Some(at("2013-10-07T10:00:00")));
        assert_eq!(r.end(), at("2013-10-07T11:00:00"));
    }

    #[test]
    fn rejects_unaligned_or_reversed() {
        assert!(HourRange::new(at("2013-10-07T08:30:00"), at("2013-10-07T10:00:00")).is_err());
        assert!(HourRange::new(at("2013-10-07T10:00:00"), at("2013-10-07T08:00:00")).is_err());
        assert!(HourRange::days(NaiveDate::from_ymd_opt(2013, 10, 1).unwrap(), 0).is_err());
    }

    #[test]
    fn sixty_days() {
        let r = HourRange::days(NaiveDate::from_ymd_opt(2013, 10, 1).unwrap(), 60).unwrap();
        assert_eq!(r.len(), 1440);
        assert_eq!(r.last(), at("2013-11-29T23:00:00"));
    }
}
