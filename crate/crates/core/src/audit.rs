//! Behavioural audit of a scenario run.
//!
//! The world is stepped tick by tick and only observable state is
//! inspected: where each occupant is, and whether the door is open, after
//! each tick. The rules that produced the state are not consulted.

use chrono::{Datelike, NaiveDateTime, Timelike, Weekday};
use serde::Serialize;

use crate::agents::{Location, World};
use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, AUDREY, KHADIJA, STEPHANE, VISITORS};
use crate::series::{DoorState, StateSeries};

const OCCUPANTS: [&str; 4] = [KHADIJA, STEPHANE, AUDREY, VISITORS];

/// Observed state after one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snapshot {
    /// Tick time (the clock before it advanced).
    pub time: NaiveDateTime,
    /// Locations in [`OCCUPANTS`] order.
    pub locations: [Location; 4],
    pub door_open: bool,
}

impl Snapshot {
    fn in_office(&self, idx: usize) -> bool {
        self.locations[idx] == Location::Office
    }

    fn office_empty(&self) -> bool {
        (0..4).all(|i| !self.in_office(i))
    }
}

const AUDREY_IDX: usize = 2;
const VISITORS_IDX: usize = 3;

#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub ticks: usize,
    /// Night or weekend hours that were not Closed.
    pub night_violations: Vec<NaiveDateTime>,
    /// Ticks with the Audrey premise (in office, no visitor, door open)
    /// where the door was still open two ticks later.
    pub audrey_violations: Vec<NaiveDateTime>,
    pub audrey_checks: usize,
    /// Ticks where the office emptied for lunch and the door stayed open.
    pub lunch_violations: Vec<NaiveDateTime>,
    pub lunch_checks: usize,
    /// Trace events of Audrey on days she is scheduled away.
    pub audrey_absent_events: usize,
    /// Visitor departures with Audrey in the office and the door not
    /// closed by the following tick.
    pub visitor_departure_violations: Vec<NaiveDateTime>,
    pub visitor_departure_checks: usize,
}

impl AuditReport {
    pub fn violations(&self) -> usize {
        self.night_violations.len()
            + self.audrey_violations.len()
            + self.lunch_violations.len()
            + self.audrey_absent_events
            + self.visitor_departure_violations.len()
    }
}

fn snapshot(world: &World, time: NaiveDateTime) -> Snapshot {
    let mut locations = [Location::Away; 4];
    for (slot, name) in locations.iter_mut().zip(OCCUPANTS) {
        *slot = world.location_of(name).unwrap_or(Location::Away);
    }
    Snapshot {
        time,
        locations,
        door_open: world.door_open(),
    }
}

/// Runs a scenario world to `until`, recording a snapshot per tick.
pub fn observe(
    mut world: World,
    until: NaiveDateTime,
) -> Result<(World, Vec<Snapshot>, StateSeries)> {
    if until <= world.clock() {
        return Err(Error::InvalidRange(format!(
            "{until} is not after the world clock"
        )));
    }
    let mut snaps = Vec::new();
    while world.clock() < until {
        let t = world.clock();
        world.tick();
        snaps.push(snapshot(&world, t));
    }
    let series = world.state_series()?;
    Ok((world, snaps, series))
}

fn is_night_or_weekend(t: NaiveDateTime) -> bool {
    matches!(t.weekday(), Weekday::Sat | Weekday::Sun) || t.hour() < 8 || t.hour() >= 20
}

/// Departure for lunch: the office goes from occupied to empty and every
/// occupant who left is now in the cafeteria before mid-afternoon.
fn emptied_for_lunch(before: &Snapshot, after: &Snapshot) -> bool {
    if before.office_empty() || !after.office_empty() || after.time.hour() >= 14 {
        return false;
    }
    (0..4)
        .filter(|&i| before.in_office(i))
        .all(|i| after.locations[i] == Location::Cafeteria)
}

pub fn audit_snapshots(
    cfg: &ScenarioConfig,
    world: &World,
    snaps: &[Snapshot],
    series: &StateSeries,
) -> AuditReport {
    let mut report = AuditReport {
        ticks: snaps.len(),
        ..AuditReport::default()
    };

    for (t, s) in series.iter() {
        if is_night_or_weekend(t) && s != DoorState::Closed {
            report.night_violations.push(t);
        }
    }

    let premise = |s: &Snapshot| s.in_office(AUDREY_IDX) && !s.in_office(VISITORS_IDX);
    for k in 0..snaps.len().saturating_sub(2) {
        let s = &snaps[k];
        if !(premise(s) && s.door_open) {
            continue;
        }
        report.audrey_checks += 1;
        let resolved = snaps[k + 1..=k + 2]
            .iter()
            .any(|n| !n.door_open || !premise(n));
        if !resolved {
            report.audrey_violations.push(s.time);
        }
    }

    for w in snaps.windows(3) {
        let (before, after, next) = (&w[0], &w[1], &w[2]);
        if emptied_for_lunch(before, after) {
            report.lunch_checks += 1;
            if after.door_open && next.door_open {
                report.lunch_violations.push(after.time);
            }
        }
        if before.in_office(VISITORS_IDX)
            && !after.in_office(VISITORS_IDX)
            && after.in_office(AUDREY_IDX)
        {
            report.visitor_departure_checks += 1;
            if after.door_open && next.door_open {
                report.visitor_departure_violations.push(after.time);
            }
        }
    }

    report.audrey_absent_events = world
        .trace()
        .iter()
        .filter(|e| e.agent == AUDREY && !cfg.audrey_presence.present_on(e.time.date()))
        .count();
    report
}

/// Observes and audits in one go.
pub fn audit_scenario(
    cfg: &ScenarioConfig,
    world: World,
    until: NaiveDateTime,
) -> Result<(StateSeries, AuditReport)> {
    let (world, snaps, series) = observe(world, until)?;
    let report = audit_snapshots(cfg, &world, &snaps, &series);
    Ok((series, report))
}
