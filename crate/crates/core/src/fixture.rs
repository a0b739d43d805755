//! Synthetic sensor logs generated from a known Markov model, standing in
//! for recorded data.
//!
//! The hourly states come from [`simulate`] on the root stream of `seed`.
//! They are then rendered as the events a contact sensor would report. The
//! door changes at a jittered minute near the start of each hour. A Move
//! hour opens the door and then closes it after a drawn fraction of the hour.
//! Each event is dropped independently with a small probability, which leaves
//! the log showing the stale state.

use chrono::Duration;

use crate::ingest::{EventLog, SensorEvent};
use crate::markov::{simulate, MarkovModel, TransitionMatrix};
use crate::rng::RandomStream;
use crate::series::{DoorState, StateSeries};
use crate::time::HourRange;

pub const NOISE_STREAM: &str = "fixture/noise";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureNoise {
    /// Change happens uniformly within this many seconds after the hour.
    pub max_jitter_secs: i64,
    /// Open fraction of a Move hour is drawn uniformly from this range.
    pub move_fraction: (f64, f64),
    pub drop_probability: f64,
}

impl Default for FixtureNoise {
    fn default() -> Self {
        Self {
            max_jitter_secs: 5 * 60,
            move_fraction: (0.3, 0.7),
            drop_probability: 0.02,
        }
    }
}

/// The model the shipped fixture is drawn from.
pub fn reference_model() -> MarkovModel {
    let working =
        TransitionMatrix::new([[0.60, 0.25, 0.15], [0.30, 0.40, 0.30], [0.20, 0.20, 0.60]])
            .expect("valid matrix");
    let lunch = TransitionMatrix::new([[0.10, 0.05, 0.85], [0.05, 0.05, 0.90], [0.05, 0.05, 0.90]])
        .expect("valid matrix");
    MarkovModel::new(working, lunch)
}

pub struct Fixture {
    /// States the events were rendered from.
    pub states: StateSeries,
    pub events: EventLog,
}

pub fn generate(model: &MarkovModel, range: HourRange, seed: u64, noise: FixtureNoise) -> Fixture {
    let states = simulate(model, range, &mut RandomStream::new(seed));
    let mut rng = RandomStream::substream(seed, NOISE_STREAM);
    let mut events = Vec::new();
    // Anchor the log so the first hour counts as measured.
    events.push(SensorEvent {
        timestamp: range.first(),
        open: false,
    });
    let mut door_open = false;
    let emit = |events: &mut Vec<SensorEvent>, t, open: bool, rng: &mut RandomStream| {
        if !rng.bernoulli(noise.drop_probability) {
            events.push(SensorEvent { timestamp: t, open });
        }
    };
    for (hour, state) in states.iter() {
        let jitter = Duration::seconds(rng.uniform_int(0, noise.max_jitter_secs));
        match state {
            DoorState::Open if !door_open => {
                emit(&mut events, hour + jitter, true, &mut rng);
                door_open = true;
            }
            DoorState::Closed if door_open => {
                emit(&mut events, hour + jitter, false, &mut rng);
                door_open = false;
            }
            DoorState::Move => {
                let (lo, hi) = noise.move_fraction;
                let frac = lo + (hi - lo) * rng.uniform();
                let open_at = if door_open { hour } else { hour + jitter };
                if !door_open {
                    emit(&mut events, open_at, true, &mut rng);
                }
                let close_at = open_at + Duration::seconds((frac * 3600.0).round() as i64);
                emit(&mut events, close_at, false, &mut rng);
                door_open = false;
            }
            _ => {}
        }
    }
    Fixture {
        states,
        events: EventLog::new(events),
    }
}
