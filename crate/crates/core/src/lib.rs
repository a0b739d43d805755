//! Occupant door-behaviour models.
//!
//! Two engines produce hourly door-state series ([`StateSeries`]) over the
//! same calendar: a per-slot Markov chain ([`markov`]) and a rule-based agent
//! engine ([`agents`]) that can host either a group agent reproducing the
//! chain exactly or the office scenario in [`scenario`]. [`ingest`] turns
//! contact-sensor logs into the same representation and [`analysis`]
//! compares series.

pub mod agents;
pub mod analysis;
pub mod audit;
pub mod error;
pub mod fixture;
pub mod ingest;
pub mod markov;
pub mod rng;
pub mod scenario;
pub mod schedule;
pub mod series;
pub mod time;

pub use agents::{
    group_agent, group_world, run, select_intention, Action, AgentState, Belief, Beliefs, Location,
    Rule, TraceEvent, World,
};
pub use analysis::{
    build_report, hourly_profile, profile_tvd, state_match_rate, ComparisonReport, HourlyProfile,
    LabeledRun,
};
pub use error::{Error, Result};
pub use ingest::{
    apply_closure_assumptions, discretize, hourly_open_ratio, ingest_states, parse_event_log,
    EventLog, HourlyRatio, HourlyRatioSeries, RatioSource, SensorEvent, Thresholds,
};
pub use markov::{
    count_transitions, empirical_tm, normalize, simulate, step, CountMatrix, MarkovModel,
    TransitionMatrix,
};
pub use rng::RandomStream;
pub use scenario::{build_scenario, realize_presence, PresenceCalendar, ScenarioConfig};
pub use schedule::{Slot, TimeSlotSchedule};
pub use series::{DoorState, StateSeries};
pub use time::HourRange;
