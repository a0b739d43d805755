//! Per-slot hourly Markov chain over door states: transition counting,
//! normalization, sampling and simulation.

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::schedule::{Slot, TimeSlotSchedule};
use crate::series::{DoorState, StateSeries};
use crate::time::HourRange;

/// Row sum tolerance for a transition matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Transition counts, rows = from-state, columns = to-state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountMatrix {
    pub counts: [[u64; 3]; 3],
}

impl CountMatrix {
    pub fn add(&mut self, from: DoorState, to: DoorState) {
        self.counts[from.index()][to.index()] += 1;
    }

    pub fn get(&self, from: DoorState, to: DoorState) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Row-stochastic 3x3 matrix in `(open, move, closed)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TransitionMatrix {
    probs: [[f64; 3]; 3],
}

impl TransitionMatrix {
    pub fn new(probs: [[f64; 3]; 3]) -> Result<Self> {
        for (i, row) in probs.iter().enumerate() {
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidModel(format!(
                    "row {i} has entry {p} outside [0,1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidModel(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn identity() -> Self {
        Self {
            probs: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn probs(&self) -> &[[f64; 3]; 3] {
        &self.probs
    }

    pub fn row(&self, from: DoorState) -> [f64; 3] {
        self.probs[from.index()]
    }

    pub fn get(&self, from: DoorState, to: DoorState) -> f64 {
        self.probs[from.index()][to.index()]
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        self.probs
            .iter()
            .flatten()
            .zip(other.probs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for TransitionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = <[[f64; 3]; 3]>::deserialize(d)?;
        TransitionMatrix::new(probs).map_err(serde::de::Error::custom)
    }
}

/// Counts consecutive-hour transitions, attributing each pair to the slot of
/// its destination hour. Pairs whose destination is forced closed are skipped.
pub fn count_transitions(
    series: &StateSeries,
    schedule: &TimeSlotSchedule,
) -> Result<(CountMatrix, CountMatrix)> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 hours to count transitions, got {}",
            series.len()
        )));
    }
    let mut working = CountMatrix::default();
    let mut lunch = CountMatrix::default();
    let states = series.states();
    for (i, pair) in states.windows(2).enumerate() {
        match schedule.slot_of(series.hour_at(i + 1)) {
            Slot::Working => working.add(pair[0], pair[1]),
            Slot::Lunch => lunch.add(pair[0], pair[1]),
            Slot::ForcedClosed => {}
        }
    }
    Ok((working, lunch))
}

/// Divides each row by its sum; an empty row becomes a self-loop.
pub fn normalize(counts: &CountMatrix) -> TransitionMatrix {
    let mut probs = [[0.0; 3]; 3];
    for (i, row) in counts.counts.iter().enumerate() {
        let sum: u64 = row.iter().sum();
        if sum == 0 {
            probs[i][i] = 1.0;
        } else {
            for j in 0..3 {
                probs[i][j] = row[j] as f64 / sum as f64;
            }
        }
    }
    TransitionMatrix { probs }
}

pub fn empirical_tm(
    series: &StateSeries,
    schedule: &TimeSlotSchedule,
) -> Result<(TransitionMatrix, TransitionMatrix)> {
    let (working, lunch) = count_transitions(series, schedule)?;
    Ok((normalize(&working), normalize(&lunch)))
}

/// Picks the next state for a uniform draw `r` by cumulative search over the
/// row: `[0, P_o)` open, `[P_o, P_o+P_m)` move, rest closed. States with zero
/// probability are never returned.
pub fn select_state(row: [f64; 3], r: f64) -> DoorState {
    let mut acc = 0.0;
    let mut last_positive = DoorState::Closed;
    for s in DoorState::ALL {
        let p = row[s.index()];
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = s;
        if r < acc {
            return s;
        }
    }
    last_positive
}

/// One hourly transition: a single uniform draw from `rng`.
pub fn step(current: DoorState, tm: &TransitionMatrix, rng: &mut RandomStream) -> DoorState {
    select_state(tm.row(current), rng.uniform())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    pub tm_working: TransitionMatrix,
    pub tm_lunch: TransitionMatrix,
    pub schedule: TimeSlotSchedule,
    pub initial_state: DoorState,
}

impl MarkovModel {
    pub fn new(tm_working: TransitionMatrix, tm_lunch: TransitionMatrix) -> Self {
        Self {
            tm_working,
            tm_lunch,
            schedule: TimeSlotSchedule::default(),
            initial_state: DoorState::Closed,
        }
    }

    /// Fits both slot matrices from an observed series.
    pub fn fit(series: &StateSeries, schedule: TimeSlotSchedule) -> Result<Self> {
        let (tm_working, tm_lunch) = empirical_tm(series, &schedule)?;
        Ok(Self {
            tm_working,
            tm_lunch,
            schedule,
            initial_state: DoorState::Closed,
        })
    }

    /// Matrix for a slot; `None` for forced-closed hours.
    pub fn matrix_for(&self, slot: Slot) -> Option<&TransitionMatrix> {
        match slot {
            Slot::Working => Some(&self.tm_working),
            Slot::Lunch => Some(&self.tm_lunch),
            Slot::ForcedClosed => None,
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            tm_working: self.tm_working,
            tm_lunch: self.tm_lunch,
            working_hours: self.schedule.working_hours().iter().copied().collect(),
            lunch_hours: self.schedule.lunch_hours().iter().copied().collect(),
            initial_state: self.initial_state,
        };
        serde_json::to_string_pretty(&file).expect("model serializes") + "\n"
    }

    /// Loads and validates a model file.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        Ok(Self {
            tm_working: file.tm_working,
            tm_lunch: file.tm_lunch,
            schedule: TimeSlotSchedule::new(file.working_hours, file.lunch_hours)?,
            initial_state: file.initial_state,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    tm_working: TransitionMatrix,
    tm_lunch: TransitionMatrix,
    working_hours: Vec<u32>,
    lunch_hours: Vec<u32>,
    initial_state: DoorState,
}

/// Simulates one state per hour of `range`. Forced-closed hours emit
/// `Closed` without drawing; every other hour steps from the previously
/// emitted state with its slot's matrix.
pub fn simulate(model: &MarkovModel, range: HourRange, rng: &mut RandomStream) -> StateSeries {
    let mut prev = model.initial_state;
    let mut states = Vec::with_capacity(range.len());
    for i in 0..range.len() {
        let t = range.first() + Duration::hours(i as i64);
        let next = match model.matrix_for(model.schedule.slot_of(t)) {
            Some(tm) => step(prev, tm, rng),
            None => DoorState::Closed,
        };
        states.push(next);
        prev = next;
    }
    StateSeries::new(range.first(), states).expect("range is non-empty and aligned")
}
