//! Tick-based belief/desire/intention engine.
//!
//! Every tick runs five phases in a fixed order:
//!
//! 1. messages queued during the previous tick are delivered into the
//!    recipients' beliefs (`msg.<topic>`);
//! 2. each agent perceives the world (door, clock, who is where, its agenda);
//! 3. each agent selects one intention: the highest-priority rule whose guard
//!    holds and whose probability test passes on the agent's own substream;
//! 4. intentions execute in agent order, so the last door action wins;
//! 5. the clock advances and the door's open time is accumulated. When an
//!    hour completes it is discretized and the closure assumption applied.
//!
//! Guards only see beliefs, and beliefs only change in phases 1 and 2, so all
//! guards of a tick evaluate against the same pre-tick snapshot.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Thresholds;
use crate::markov::{step, MarkovModel};
use crate::rng::RandomStream;
use crate::schedule::TimeSlotSchedule;
use crate::series::{DoorState, StateSeries};
use crate::time::{format_timestamp, is_hour_aligned};

pub const DEFAULT_TICK_MINUTES: u32 = 5;

/// Name of the agent returned by [`group_agent`].
pub const GROUP_AGENT_NAME: &str = "Group";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Location {
    Office,
    Corridor,
    Cafeteria,
    MeetingRoom,
    Lecture,
    Away,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::Office => "Office",
            Location::Corridor => "Corridor",
            Location::Cafeteria => "Cafeteria",
            Location::MeetingRoom => "MeetingRoom",
            Location::Lecture => "Lecture",
            Location::Away => "Away",
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Location {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            Location::Office,
            Location::Corridor,
            Location::Cafeteria,
            Location::MeetingRoom,
            Location::Lecture,
            Location::Away,
        ]
        .into_iter()
        .find(|l| l.as_str() == s)
        .ok_or_else(|| format!("unknown location `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    Flag(bool),
    Number(i64),
    Text(String),
    Door(DoorState),
    Place(Location),
    Message {
        payload: String,
        received: NaiveDateTime,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Beliefs(BTreeMap<String, Belief>);

impl Beliefs {
    pub fn get(&self, key: &str) -> Option<&Belief> {
        self.0.get(key)
    }

    pub fn set(&mut self, key: &str, value: Belief) {
        match self.0.get_mut(key) {
            Some(slot) => *slot = value,
            None => {
                self.0.insert(key.to_owned(), value);
            }
        }
    }

    pub fn remove(&mut self, key: &str) -> Option<Belief> {
        self.0.remove(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// `true` only for `Flag(true)`.
    pub fn flag(&self, key: &str) -> bool {
        matches!(self.0.get(key), Some(Belief::Flag(true)))
    }

    pub fn number(&self, key: &str) -> Option<i64> {
        match self.0.get(key) {
            Some(Belief::Number(n)) => Some(*n),
            _ => None,
        }
    }

    /// Text beliefs and message payloads.
    pub fn text(&self, key: &str) -> Option<&str> {
        match self.0.get(key) {
            Some(Belief::Text(s)) => Some(s),
            Some(Belief::Message { payload, .. }) => Some(payload),
            _ => None,
        }
    }

    pub fn door(&self, key: &str) -> Option<DoorState> {
        match self.0.get(key) {
            Some(Belief::Door(d)) => Some(*d),
            _ => None,
        }
    }

    pub fn place(&self, key: &str) -> Option<Location> {
        match self.0.get(key) {
            Some(Belief::Place(p)) => Some(*p),
            _ => None,
        }
    }

    /// Payload of a delivered message `msg.<topic>`.
    pub fn message(&self, topic: &str) -> Option<&str> {
        match self.0.get(&format!("msg.{topic}")) {
            Some(Belief::Message { payload, .. }) => Some(payload),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Belief)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn is_truthy(&self, key: &str) -> bool {
        match self.0.get(key) {
            Some(Belief::Flag(b)) => *b,
            Some(Belief::Message { payload, .. }) => payload == "yes",
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: String,
    pub recipient: String,
    pub topic: String,
    pub payload: String,
}

/// A planned stay somewhere. Entries with a `condition` only apply while the
/// agent believes the condition key (a `Flag(true)` or a message `yes`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgendaEntry {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub location: Location,
    pub activity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

pub type Guard = Arc<dyn Fn(&Beliefs, NaiveDateTime) -> bool + Send + Sync>;

#[derive(Debug, Clone)]
pub enum Action {
    OpenDoor,
    CloseDoor,
    /// Pass without touching the door (logged).
    LeaveDoor,
    MoveTo(Location),
    /// Move to the location the agent's agenda currently prescribes.
    FollowPlan,
    Send {
        to: String,
        topic: String,
        payload: String,
    },
    NoOp,
    /// One hourly Markov step on the shared stream; see [`group_agent`].
    MarkovStep(Arc<MarkovModel>),
}

impl Action {
    pub fn send(to: &str, topic: &str, payload: &str) -> Self {
        Action::Send {
            to: to.to_owned(),
            topic: topic.to_owned(),
            payload: payload.to_owned(),
        }
    }
}

#[derive(Clone)]
pub struct Rule {
    pub name: String,
    pub guard: Guard,
    pub actions: Vec<Action>,
    pub probability: f64,
    pub priority: i32,
}

impl Rule {
    pub fn new<G>(name: &str, priority: i32, guard: G, actions: Vec<Action>) -> Self
    where
        G: Fn(&Beliefs, NaiveDateTime) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.to_owned(),
            guard: Arc::new(guard),
            actions,
            probability: 1.0,
            priority,
        }
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.probability = p;
        self
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule")
            .field("name", &self.name)
            .field("priority", &self.priority)
            .field("probability", &self.probability)
            .field("actions", &self.actions)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub name: String,
    pub location: Location,
    pub beliefs: Beliefs,
    rules: Vec<Rule>,
    plan: Vec<AgendaEntry>,
    tentative: Vec<AgendaEntry>,
    rng: RandomStream,
}

impl AgentState {
    /// Rules are kept sorted by descending priority; priorities must be
    /// unique and probabilities within `[0, 1]`.
    pub fn new(name: &str, location: Location, mut rules: Vec<Rule>) -> Result<Self> {
        rules.sort_by_key(|r| std::cmp::Reverse(r.priority));
        if let Some(w) = rules.windows(2).find(|w| w[0].priority == w[1].priority) {
            return Err(Error::config(
                format!("{name}.rules"),
                format!(
                    "rules `{}` and `{}` share priority {}",
                    w[0].name, w[1].name, w[0].priority
                ),
            ));
        }
        if let Some(r) = rules.iter().find(|r| !(0.0..=1.0).contains(&r.probability)) {
            return Err(Error::config(
                format!("{name}.{}", r.name),
                format!("probability {} outside [0,1]", r.probability),
            ));
        }
        Ok(Self {
            name: name.to_owned(),
            location,
            beliefs: Beliefs::default(),
            rules,
            plan: Vec::new(),
            tentative: Vec::new(),
            rng: RandomStream::substream(0, name),
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Installs an agenda. Unconditional entries must not overlap.
    pub fn with_agenda(mut self, mut entries: Vec<AgendaEntry>) -> Result<Self> {
        entries.sort_by_key(|e| e.start);
        let (tentative, plan): (Vec<_>, Vec<_>) =
            entries.into_iter().partition(|e| e.condition.is_some());
        if let Some(w) = plan.windows(2).find(|w| w[1].start < w[0].end) {
            return Err(Error::config(
                format!("{}.agenda", self.name),
                format!("entries starting {} and {} overlap", w[0].start, w[1].start),
            ));
        }
        self.plan = plan;
        self.tentative = tentative;
        Ok(self)
    }

    pub fn agenda(&self) -> impl Iterator<Item = &AgendaEntry> {
        self.plan.iter().chain(&self.tentative)
    }

    pub fn rng(&self) -> &RandomStream {
        &self.rng
    }

    fn active_entry(&self, now: NaiveDateTime) -> Option<&AgendaEntry> {
        let find = |entries: &'_ [AgendaEntry]| -> Option<usize> {
            let idx = entries.partition_point(|e| e.start <= now);
            (0..idx).rev().take(4).find(|&i| entries[i].end > now)
        };
        let tentative = find(&self.tentative)
            .map(|i| &self.tentative[i])
            .filter(|e| {
                e.condition
                    .as_deref()
                    .is_some_and(|c| self.beliefs.is_truthy(c))
            });
        tentative.or_else(|| find(&self.plan).map(|i| &self.plan[i]))
    }

    fn next_entry(&self, now: NaiveDateTime) -> Option<&AgendaEntry> {
        let idx = self.plan.partition_point(|e| e.start <= now);
        self.plan.get(idx).filter(|e| e.start.date() == now.date())
    }
}

/// Chooses this tick's intention. Rules are scanned by descending priority;
/// the first rule whose guard holds draws `r` from the agent's substream and
/// fires iff `r < probability`, otherwise scanning continues.
pub fn select_intention(agent: &mut AgentState, clock: NaiveDateTime) -> Intention {
    for rule in &agent.rules {
        if !(rule.guard)(&agent.beliefs, clock) {
            continue;
        }
        if agent.rng.uniform() < rule.probability {
            return Intention {
                rule: Some(rule.name.clone()),
                actions: rule.actions.clone(),
            };
        }
    }
    Intention::default()
}

#[derive(Debug, Clone, Default)]
pub struct Intention {
    pub rule: Option<String>,
    pub actions: Vec<Action>,
}

impl Intention {
    pub fn is_noop(&self) -> bool {
        self.actions.iter().all(|a| matches!(a, Action::NoOp))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    #[serde(with = "timestamp_serde")]
    pub time: NaiveDateTime,
    pub agent: String,
    pub event: String,
    pub detail: String,
}

pub const EVENT_DOOR_OPEN: &str = "door_open";
pub const EVENT_DOOR_CLOSE: &str = "door_close";

mod timestamp_serde {
    use chrono::NaiveDateTime;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::time::{format_timestamp, parse_timestamp};

    pub fn serialize<S: Serializer>(t: &NaiveDateTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_timestamp(*t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDateTime, D::Error> {
        let s = String::deserialize(d)?;
        parse_timestamp(&s).ok_or_else(|| serde::de::Error::custom(format!("bad timestamp {s}")))
    }
}

/// Trace as JSON lines `{time, agent, event, detail}`.
pub fn trace_to_jsonl(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in trace {
        out.push_str(&serde_json::to_string(e).expect("trace event serializes"));
        out.push('\n');
    }
    out
}

pub fn trace_from_jsonl(text: &str) -> Result<Vec<TraceEvent>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(i + 1, e.to_string())))
        .collect()
}

#[derive(Debug, Clone)]
pub struct World {
    clock: NaiveDateTime,
    tick_minutes: u32,
    seed: u64,
    door_open: bool,
    open_ticks: u32,
    hour_ticks: u32,
    pub agents: Vec<AgentState>,
    pub message_queue: Vec<Message>,
    trace: Vec<TraceEvent>,
    shared_rng: RandomStream,
    thresholds: Thresholds,
    schedule: TimeSlotSchedule,
    start: NaiveDateTime,
    initial_door_open: bool,
    hour_states: Vec<DoorState>,
}

impl World {
    /// Empty world starting at the (hour-aligned) `start` with a 5-minute
    /// tick. `seed` keys the shared stream and every agent substream.
    pub fn new(start: NaiveDateTime, seed: u64, door_open: bool) -> Result<Self> {
        if !is_hour_aligned(start) {
            return Err(Error::InvalidRange(format!(
                "world start {start} is not on the hour"
            )));
        }
        Ok(Self {
            clock: start,
            tick_minutes: DEFAULT_TICK_MINUTES,
            seed,
            door_open,
            open_ticks: 0,
            hour_ticks: 0,
            agents: Vec::new(),
            message_queue: Vec::new(),
            trace: Vec::new(),
            shared_rng: RandomStream::new(seed),
            thresholds: Thresholds::default(),
            schedule: TimeSlotSchedule::default(),
            start,
            initial_door_open: door_open,
            hour_states: Vec::new(),
        })
    }

    /// Tick length; must divide 60.
    pub fn with_tick_minutes(mut self, minutes: u32) -> Result<Self> {
        if minutes == 0 || 60 % minutes != 0 {
            return Err(Error::config(
                "tick_minutes",
                format!("{minutes} does not divide 60"),
            ));
        }
        self.tick_minutes = minutes;
        Ok(self)
    }

    pub fn with_thresholds(mut self, thresholds: Thresholds) -> Self {
        self.thresholds = thresholds;
        self
    }

    pub fn with_schedule(mut self, schedule: TimeSlotSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Appends an agent and gives it the substream `(seed, name)`.
    pub fn add_agent(&mut self, mut agent: AgentState) -> Result<()> {
        if self.agents.iter().any(|a| a.name == agent.name) {
            return Err(Error::config(
                "agents",
                format!("duplicate agent `{}`", agent.name),
            ));
        }
        agent.rng = RandomStream::substream(self.seed, &agent.name);
        self.agents.push(agent);
        Ok(())
    }

    pub fn clock(&self) -> NaiveDateTime {
        self.clock
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tick_minutes(&self) -> u32 {
        self.tick_minutes
    }

    pub fn door_open(&self) -> bool {
        self.door_open
    }

    pub fn initial_door_open(&self) -> bool {
        self.initial_door_open
    }

    pub fn door_state(&self) -> DoorState {
        if self.door_open {
            DoorState::Open
        } else {
            DoorState::Closed
        }
    }

    /// Open ticks and total ticks accumulated in the current hour.
    pub fn hour_accumulator(&self) -> (u32, u32) {
        (self.open_ticks, self.hour_ticks)
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn schedule(&self) -> &TimeSlotSchedule {
        &self.schedule
    }

    pub fn shared_rng(&self) -> &RandomStream {
        &self.shared_rng
    }

    /// States of the hours completed so far.
    pub fn hour_states(&self) -> &[DoorState] {
        &self.hour_states
    }

    pub fn agent(&self, name: &str) -> Option<&AgentState> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn location_of(&self, name: &str) -> Option<Location> {
        self.agent(name).map(|a| a.location)
    }

    /// Names of agents currently in the office, in agent order.
    pub fn occupants(&self) -> Vec<&str> {
        self.agents
            .iter()
            .filter(|a| a.location == Location::Office)
            .map(|a| a.name.as_str())
            .collect()
    }

    fn log(&mut self, agent: &str, event: &str, detail: String) {
        self.trace.push(TraceEvent {
            time: self.clock,
            agent: agent.to_owned(),
            event: event.to_owned(),
            detail,
        });
    }

    fn deliver(&mut self) {
        let clock = self.clock;
        for msg in std::mem::take(&mut self.message_queue) {
            match self.agents.iter_mut().find(|a| a.name == msg.recipient) {
                Some(agent) => agent.beliefs.set(
                    &format!("msg.{}", msg.topic),
                    Belief::Message {
                        payload: msg.payload,
                        received: clock,
                    },
                ),
                None => {
                    let detail = format!("{} -> {}: no such agent", msg.topic, msg.recipient);
                    self.log(&msg.sender, "undeliverable", detail);
                }
            }
        }
    }

    fn perceive(&mut self) {
        let clock = self.clock;
        let door_open = self.door_open;
        let last_hour = self.hour_states.last().copied();
        let whereabouts: Vec<(String, Location)> = self
            .agents
            .iter()
            .map(|a| (a.name.clone(), a.location))
            .collect();
        for agent in &mut self.agents {
            let b = &mut agent.beliefs;
            b.set("clock.minute", Belief::Number(i64::from(clock.minute())));
            b.set(
                "clock.minute_of_day",
                Belief::Number(i64::from(clock.hour() * 60 + clock.minute())),
            );
            b.set(
                "clock.weekday",
                Belief::Number(i64::from(clock.weekday().num_days_from_monday())),
            );
            b.set("door.open", Belief::Flag(door_open));
            match last_hour {
                Some(s) => b.set("door.last_hour", Belief::Door(s)),
                None if !b.contains("door.last_hour") => b.set(
                    "door.last_hour",
                    Belief::Door(if door_open {
                        DoorState::Open
                    } else {
                        DoorState::Closed
                    }),
                ),
                None => {}
            }
            b.set("self.location", Belief::Place(agent.location));
            let mut others = 0;
            for (name, loc) in &whereabouts {
                if *name == agent.name {
                    continue;
                }
                let here = *loc == Location::Office;
                others += i64::from(here);
                b.set(&format!("present.{name}"), Belief::Flag(here));
            }
            b.set("office.others", Belief::Number(others));

            // Messages are forgotten at the end of the day they arrived.
            b.0.retain(|_, v| match v {
                Belief::Message { received, .. } => received.date() == clock.date(),
                _ => true,
            });

            let (place, activity) = match agent.active_entry(clock) {
                Some(e) => (e.location, e.activity.clone()),
                None => (Location::Away, "home".to_owned()),
            };
            let next = agent
                .next_entry(clock)
                .map(|e| (e.activity.clone(), (e.start - clock).num_minutes()));
            let b = &mut agent.beliefs;
            b.set("plan.location", Belief::Place(place));
            b.set("plan.activity", Belief::Text(activity));
            match next {
                Some((activity, minutes)) => {
                    b.set("plan.next_activity", Belief::Text(activity));
                    b.set("plan.next_in", Belief::Number(minutes));
                }
                None => {
                    b.remove("plan.next_activity");
                    b.remove("plan.next_in");
                }
            }
        }
    }

    fn set_door(&mut self, open: bool, agent: &str, detail: String) {
        self.door_open = open;
        let event = if open {
            EVENT_DOOR_OPEN
        } else {
            EVENT_DOOR_CLOSE
        };
        self.log(agent, event, detail);
    }

    fn execute(&mut self, idx: usize, intention: Intention) {
        let name = self.agents[idx].name.clone();
        let rule = intention.rule.unwrap_or_default();
        for action in intention.actions {
            match action {
                Action::OpenDoor => self.set_door(true, &name, rule.clone()),
                Action::CloseDoor => self.set_door(false, &name, rule.clone()),
                Action::LeaveDoor => self.log(&name, "door_leave", rule.clone()),
                Action::MoveTo(to) => self.move_agent(idx, to, &rule),
                Action::FollowPlan => {
                    let to = self.agents[idx]
                        .beliefs
                        .place("plan.location")
                        .unwrap_or(Location::Away);
                    self.move_agent(idx, to, &rule);
                }
                Action::Send { to, topic, payload } => {
                    self.log(&name, "send", format!("{topic}={payload} -> {to}"));
                    self.message_queue.push(Message {
                        sender: name.clone(),
                        recipient: to,
                        topic,
                        payload,
                    });
                }
                Action::NoOp => {}
                Action::MarkovStep(model) => self.markov_step(idx, &model, &rule),
            }
        }
    }

    fn move_agent(&mut self, idx: usize, to: Location, rule: &str) {
        let from = self.agents[idx].location;
        if from != to {
            self.agents[idx].location = to;
            let name = self.agents[idx].name.clone();
            self.log(&name, "move", format!("{rule}: {from} -> {to}"));
        }
    }

    fn markov_step(&mut self, idx: usize, model: &MarkovModel, rule: &str) {
        let name = self.agents[idx].name.clone();
        let hour = self.clock - Duration::minutes(i64::from(self.clock.minute()));
        let Some(tm) = model.matrix_for(model.schedule.slot_of(hour)) else {
            self.set_door(false, &name, format!("{rule}: forced closed"));
            return;
        };
        let prev = self.agents[idx]
            .beliefs
            .door("door.last_hour")
            .unwrap_or(model.initial_state);
        let next = step(prev, tm, &mut self.shared_rng);
        self.set_door(next != DoorState::Closed, &name, format!("{rule}: {next}"));
        self.message_queue.push(Message {
            sender: name.clone(),
            recipient: name,
            topic: "markov.sample".into(),
            payload: next.as_str().into(),
        });
    }

    fn advance(&mut self) {
        self.hour_ticks += 1;
        if self.door_open {
            self.open_ticks += 1;
        }
        let hour_start = self.clock - Duration::minutes(i64::from(self.clock.minute()));
        self.clock += Duration::minutes(i64::from(self.tick_minutes));
        if is_hour_aligned(self.clock) {
            let ratio = f64::from(self.open_ticks) / f64::from(self.hour_ticks);
            let state = if self.schedule.is_forced_closed(hour_start) {
                DoorState::Closed
            } else {
                self.thresholds.classify(ratio)
            };
            self.hour_states.push(state);
            self.open_ticks = 0;
            self.hour_ticks = 0;
        }
    }

    /// Runs one tick through all five phases.
    pub fn tick(&mut self) {
        self.deliver();
        self.perceive();
        let clock = self.clock;
        let intentions: Vec<Intention> = self
            .agents
            .iter_mut()
            .map(|a| select_intention(a, clock))
            .collect();
        for (idx, intention) in intentions.into_iter().enumerate() {
            if !intention.is_noop() {
                self.execute(idx, intention);
            }
        }
        self.advance();
    }

    /// Door-state series of the hours completed so far.
    pub fn state_series(&self) -> Result<StateSeries> {
        StateSeries::new(self.start, self.hour_states.clone())
    }

    /// Rebuilds the door series from the trace alone.
    pub fn replay_door_series(&self) -> Result<StateSeries> {
        replay_door(
            &self.trace,
            self.start,
            self.initial_door_open,
            self.clock,
            self.tick_minutes,
            self.thresholds,
            &self.schedule,
        )
    }
}

/// Ticks until the clock reaches `until` and returns the hourly series of
/// every completed hour since the world started.
pub fn run(mut world: World, until: NaiveDateTime) -> Result<(World, StateSeries)> {
    if until <= world.clock {
        return Err(Error::InvalidRange(format!(
            "run target {until} is not after the world clock {}",
            world.clock
        )));
    }
    while world.clock < until {
        world.tick();
    }
    let series = world.state_series()?;
    Ok((world, series))
}

/// Replays door actuations from a trace: within each tick the last
/// actuation wins, and hours are discretized as in [`World::tick`].
pub fn replay_door(
    trace: &[TraceEvent],
    start: NaiveDateTime,
    initial_open: bool,
    until: NaiveDateTime,
    tick_minutes: u32,
    thresholds: Thresholds,
    schedule: &TimeSlotSchedule,
) -> Result<StateSeries> {
    let mut events = trace
        .iter()
        .filter(|e| e.event == EVENT_DOOR_OPEN || e.event == EVENT_DOOR_CLOSE)
        .peekable();
    let tick = Duration::minutes(i64::from(tick_minutes));
    let mut open = initial_open;
    let mut clock = start;
    let (mut open_ticks, mut ticks) = (0u32, 0u32);
    let mut states = Vec::new();
    while clock < until {
        while let Some(e) = events.next_if(|e| e.time <= clock) {
            open = e.event == EVENT_DOOR_OPEN;
        }
        ticks += 1;
        open_ticks += u32::from(open);
        let hour_start = clock - Duration::minutes(i64::from(clock.minute()));
        clock += tick;
        if is_hour_aligned(clock) {
            states.push(if schedule.is_forced_closed(hour_start) {
                DoorState::Closed
            } else {
                thresholds.classify(f64::from(open_ticks) / f64::from(ticks))
            });
            open_ticks = 0;
            ticks = 0;
        }
    }
    StateSeries::new(start, states)
}

/// The whole office as one agent whose behaviour is the Markov chain.
///
/// At the top of every hour it applies [`step`] to its belief about the
/// previous hour's state, drawing from the world's shared stream exactly as
/// [`crate::markov::simulate`] does. Open holds the door open all hour,
/// Closed keeps it shut, and Move opens it for the first half hour only.
/// Forced-closed hours close the door without drawing.
pub fn group_agent(model: &MarkovModel) -> AgentState {
    let model = Arc::new(model.clone());
    let rules = vec![
        Rule::new(
            "markov_hourly",
            2,
            |_, clock| clock.minute() == 0,
            vec![Action::MarkovStep(Arc::clone(&model))],
        ),
        Rule::new(
            "move_half_hour_close",
            1,
            |b, clock| clock.minute() == 30 && b.message("markov.sample") == Some("move"),
            vec![Action::CloseDoor],
        ),
    ];
    let mut agent =
        AgentState::new(GROUP_AGENT_NAME, Location::Office, rules).expect("static rule set");
    agent
        .beliefs
        .set("door.last_hour", Belief::Door(model.initial_state));
    agent
}

/// World holding only the group agent, on the model's schedule.
pub fn group_world(model: &MarkovModel, start: NaiveDateTime, seed: u64) -> Result<World> {
    let mut world = World::new(start, seed, false)?.with_schedule(model.schedule.clone());
    world.add_agent(group_agent(model))?;
    Ok(world)
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            format_timestamp(self.time),
            self.agent,
            self.event,
            self.detail
        )
    }
}
