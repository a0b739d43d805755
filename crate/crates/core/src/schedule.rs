//! Daily time slots: working, lunch, and the hours assumed closed.

use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Working,
    Lunch,
    ForcedClosed,
}

/// Weekday hour sets for the two modelled slots. Weekends and every weekday
/// hour outside both sets are forced closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSlotSchedule {
    working_hours: BTreeSet<u32>,
    lunch_hours: BTreeSet<u32>,
}

impl Default for TimeSlotSchedule {
    fn default() -> Self {
        Self {
            working_hours: (8..12).chain(14..20).collect(),
            lunch_hours: [12, 13].into_iter().collect(),
        }
    }
}

impl TimeSlotSchedule {
    pub fn new(
        working_hours: impl IntoIterator<Item = u32>,
        lunch_hours: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        let working_hours: BTreeSet<u32> = working_hours.into_iter().collect();
        let lunch_hours: BTreeSet<u32> = lunch_hours.into_iter().collect();
        if let Some(h) = working_hours.iter().chain(&lunch_hours).find(|&&h| h > 23) {
            return Err(Error::InvalidModel(format!("hour {h} is outside 0..=23")));
        }
        if let Some(h) = working_hours.intersection(&lunch_hours).next() {
            return Err(Error::InvalidModel(format!(
                "hour {h} is both a working and a lunch hour"
            )));
        }
        Ok(Self {
            working_hours,
            lunch_hours,
        })
    }

    pub fn working_hours(&self) -> &BTreeSet<u32> {
        &self.working_hours
    }

    pub fn lunch_hours(&self) -> &BTreeSet<u32> {
        &self.lunch_hours
    }

    pub fn slot_of(&self, t: NaiveDateTime) -> Slot {
        if matches!(t.weekday(), Weekday::Sat | Weekday::Sun) {
            return Slot::ForcedClosed;
        }
        let h = t.hour();
        if self.lunch_hours.contains(&h) {
            Slot::Lunch
        } else if self.working_hours.contains(&h) {
            Slot::Working
        } else {
            Slot::ForcedClosed
        }
    }

    pub fn is_forced_closed(&self, t: NaiveDateTime) -> bool {
        self.slot_of(t) == Slot::ForcedClosed
    }
}
