//! The three-occupant office with visitors, expressed as rule-driven agents.
//!
//! Each weekday the scenario substream for that date realizes a
//! [`DayPresence`]: arrival and departure times, lunch, the afternoon
//! coffee break, Stephane's lectures and meetings and any visits. Those
//! stays become agent agendas; the door behaviour lives in the rules built
//! by [`build_scenario`].
//!
//! Quantifiers in the field notes are tunable probabilities:
//! "mostly" defaults to 0.8 and "sometimes" to 0.5.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::agents::{Action, AgendaEntry, AgentState, Beliefs, Location, Rule, World};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub const KHADIJA: &str = "Khadija";
pub const STEPHANE: &str = "Stephane";
pub const AUDREY: &str = "Audrey";
pub const VISITORS: &str = "Visitors";

/// Belief key Stephane sets (via a message to himself) when joining coffee.
pub const COFFEE_JOIN: &str = "msg.coffee_join";

/// Minutes after midnight, written `HH:MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClockTime(u32);

impl ClockTime {
    pub const fn hm(h: u32, m: u32) -> Self {
        ClockTime(h * 60 + m)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }

    fn on(self, day: NaiveDate) -> NaiveDateTime {
        day.and_hms_opt(0, 0, 0).expect("midnight") + Duration::minutes(i64::from(self.0))
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl Serialize for ClockTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClockTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let parsed = s.split_once(':').and_then(|(h, m)| {
            let (h, m): (u32, u32) = (h.parse().ok()?, m.parse().ok()?);
            (h < 24 && m < 60 && s.len() == 5).then_some(ClockTime::hm(h, m))
        });
        parsed.ok_or_else(|| serde::de::Error::custom(format!("expected HH:MM, got `{s}`")))
    }
}

/// `mean ± jitter_min`, drawn uniformly in whole minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jittered {
    pub mean: ClockTime,
    pub jitter_min: u32,
}

impl Jittered {
    const fn new(h: u32, m: u32, jitter_min: u32) -> Self {
        Self {
            mean: ClockTime::hm(h, m),
            jitter_min,
        }
    }

    fn earliest(&self) -> i64 {
        i64::from(self.mean.0) - i64::from(self.jitter_min)
    }

    fn latest(&self) -> i64 {
        i64::from(self.mean.0) + i64::from(self.jitter_min)
    }

    fn draw(&self, rng: &mut RandomStream) -> i64 {
        rng.uniform_int(self.earliest(), self.latest())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: ClockTime,
    pub end: ClockTime,
}

impl Span {
    const fn new(start: ClockTime, end: ClockTime) -> Self {
        Self { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresenceWindows {
    pub arrival: Jittered,
    pub departure: Jittered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudreyPresence {
    EvenWeeks,
    OddWeeks,
    Always,
    Never,
}

impl AudreyPresence {
    pub fn present_on(self, day: NaiveDate) -> bool {
        let week = day.iso_week().week();
        match self {
            AudreyPresence::EvenWeeks => week.is_multiple_of(2),
            AudreyPresence::OddWeeks => week % 2 == 1,
            AudreyPresence::Always => true,
            AudreyPresence::Never => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StayRange {
    pub min: u32,
    pub max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub khadija: PresenceWindows,
    pub stephane: PresenceWindows,
    pub audrey: PresenceWindows,
    pub audrey_presence: AudreyPresence,
    pub stephane_lecture_days: Vec<Weekday>,
    pub lecture: Span,
    pub stephane_meeting_days: Vec<Weekday>,
    pub meeting: Span,
    /// Expected visits per weekday.
    pub visitor_rate: f64,
    pub visitor_stay_min: StayRange,
    pub lunch: Span,
    /// Lunch departs within this many minutes after `lunch.start` and
    /// returns within this many minutes before `lunch.end`.
    pub lunch_jitter_min: u32,
    pub coffee: Jittered,
    pub coffee_duration_min: u32,
    pub p_khadija_close_after_morning_open: f64,
    pub p_stephane_accepts_coffee: f64,
    pub p_stephane_busy: f64,
    pub p_visitor_leaves_open: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            khadija: PresenceWindows {
                arrival: Jittered::new(8, 30, 20),
                departure: Jittered::new(18, 0, 30),
            },
            stephane: PresenceWindows {
                arrival: Jittered::new(9, 15, 30),
                departure: Jittered::new(18, 30, 30),
            },
            audrey: PresenceWindows {
                arrival: Jittered::new(9, 45, 20),
                departure: Jittered::new(17, 30, 20),
            },
            audrey_presence: AudreyPresence::EvenWeeks,
            stephane_lecture_days: vec![Weekday::Tue, Weekday::Thu],
            lecture: Span::new(ClockTime::hm(10, 0), ClockTime::hm(12, 0)),
            stephane_meeting_days: vec![Weekday::Mon, Weekday::Wed],
            meeting: Span::new(ClockTime::hm(14, 15), ClockTime::hm(15, 0)),
            visitor_rate: 1.0,
            visitor_stay_min: StayRange { min: 20, max: 40 },
            lunch: Span::new(ClockTime::hm(12, 15), ClockTime::hm(13, 45)),
            lunch_jitter_min: 10,
            coffee: Jittered::new(15, 30, 30),
            coffee_duration_min: 15,
            p_khadija_close_after_morning_open: 0.8,
            p_stephane_accepts_coffee: 0.5,
            p_stephane_busy: 0.5,
            p_visitor_leaves_open: 0.8,
        }
    }
}

const DAY_START: i64 = 8 * 60;
const DAY_END: i64 = 20 * 60;

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::config("scenario", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        for (field, p) in [
            (
                "p_khadija_close_after_morning_open",
                self.p_khadija_close_after_morning_open,
            ),
            ("p_stephane_accepts_coffee", self.p_stephane_accepts_coffee),
            ("p_stephane_busy", self.p_stephane_busy),
            ("p_visitor_leaves_open", self.p_visitor_leaves_open),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(
                    field,
                    format!("probability {p} outside [0,1]"),
                ));
            }
        }
        let in_day = |field: &str, lo: i64, hi: i64| -> Result<()> {
            if lo < DAY_START || hi > DAY_END || lo > hi {
                return Err(Error::config(field, "window must lie within 08:00-20:00"));
            }
            Ok(())
        };
        for (name, w) in [
            ("khadija", &self.khadija),
            ("stephane", &self.stephane),
            ("audrey", &self.audrey),
        ] {
            in_day(
                &format!("{name}.arrival"),
                w.arrival.earliest(),
                w.arrival.latest(),
            )?;
            in_day(
                &format!("{name}.departure"),
                w.departure.earliest(),
                w.departure.latest(),
            )?;
            if w.arrival.latest() >= w.departure.earliest() {
                return Err(Error::config(
                    format!("{name}.departure"),
                    "departure window must start after the arrival window",
                ));
            }
        }
        for (field, span) in [
            ("lecture", self.lecture),
            ("meeting", self.meeting),
            ("lunch", self.lunch),
        ] {
            in_day(field, span.start.0.into(), span.end.0.into())?;
            if span.start >= span.end {
                return Err(Error::config(field, "start must precede end"));
            }
        }
        if 2 * self.lunch_jitter_min >= self.lunch.end.0 - self.lunch.start.0 {
            return Err(Error::config(
                "lunch_jitter_min",
                "jitter leaves no lunch break",
            ));
        }
        if self.coffee_duration_min == 0 {
            return Err(Error::config("coffee_duration_min", "must be positive"));
        }
        in_day(
            "coffee",
            self.coffee.earliest(),
            self.coffee.latest() + i64::from(self.coffee_duration_min),
        )?;
        if !(self.visitor_rate.is_finite() && self.visitor_rate >= 0.0) {
            return Err(Error::config(
                "visitor_rate",
                "must be a non-negative number",
            ));
        }
        let stay = self.visitor_stay_min;
        if stay.min == 0 || stay.min > stay.max {
            return Err(Error::config("visitor_stay_min", "need 0 < min <= max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Work,
    Lunch,
    Coffee,
    Meeting,
    Lecture,
    Visit,
}

impl Activity {
    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Work => "work",
            Activity::Lunch => "lunch",
            Activity::Coffee => "coffee",
            Activity::Meeting => "meeting",
            Activity::Lecture => "lecture",
            Activity::Visit => "visit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stay {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub location: Location,
    pub activity: Activity,
}

/// One day's realized stays per agent. Stays of one agent are ordered and
/// never overlap; outside them the agent is away.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DayPresence {
    pub stays: BTreeMap<String, Vec<Stay>>,
    /// Stephane's coffee break, taken only if he accepts the invitation.
    pub stephane_coffee: Option<Stay>,
    pub coffee_time: Option<NaiveDateTime>,
}

impl DayPresence {
    pub fn stays_of(&self, agent: &str) -> &[Stay] {
        self.stays.get(agent).map(Vec::as_slice).unwrap_or(&[])
    }

    /// First moment the agent is in the office.
    pub fn office_arrival(&self, agent: &str) -> Option<NaiveDateTime> {
        self.stays_of(agent)
            .iter()
            .find(|s| s.location == Location::Office)
            .map(|s| s.start)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PresenceCalendar {
    pub days: BTreeMap<NaiveDate, DayPresence>,
}

impl PresenceCalendar {
    /// Realizes `days` consecutive days, each from its own substream
    /// `presence/<date>` so a day does not depend on the range it sits in.
    pub fn realize(cfg: &ScenarioConfig, seed: u64, first_day: NaiveDate, days: u32) -> Self {
        let days = (0..days)
            .map(|i| {
                let day = first_day + Duration::days(i64::from(i));
                let mut rng = RandomStream::substream(seed, &format!("presence/{day}"));
                (day, realize_presence(cfg, day, &mut rng))
            })
            .collect();
        Self { days }
    }
}

const MAX_REDRAWS: usize = 100;
const VISIT_MARGIN_MIN: i64 = 10;

/// Builds a day of stays from `[arrive, depart)` with excursions cut in;
/// whatever is not covered by an excursion is office time.
fn timeline(
    day: NaiveDate,
    arrive: i64,
    depart: i64,
    excursions: &mut [(i64, i64, Location, Activity)],
) -> Vec<Stay> {
    let at = |m: i64| day.and_hms_opt(0, 0, 0).expect("midnight") + Duration::minutes(m);
    excursions.sort_by_key(|e| e.0);
    let mut stays = Vec::new();
    let mut cursor = arrive;
    for &(s, e, location, activity) in excursions.iter() {
        let s = s.max(cursor);
        let e = e.min(depart);
        if s >= e {
            continue;
        }
        if s > cursor {
            stays.push(Stay {
                start: at(cursor),
                end: at(s),
                location: Location::Office,
                activity: Activity::Work,
            });
        }
        stays.push(Stay {
            start: at(s),
            end: at(e),
            location,
            activity,
        });
        cursor = e;
    }
    if cursor < depart {
        stays.push(Stay {
            start: at(cursor),
            end: at(depart),
            location: Location::Office,
            activity: Activity::Work,
        });
    }
    stays
}

/// Realizes one day. Weekends are empty. Arrivals keep the order
/// Khadija, Stephane, Audrey by redrawing, then falling back to the
/// configured means in that order.
pub fn realize_presence(
    cfg: &ScenarioConfig,
    day: NaiveDate,
    rng: &mut RandomStream,
) -> DayPresence {
    if matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
        return DayPresence::default();
    }
    let audrey_in = cfg.audrey_presence.present_on(day);
    let windows: Vec<(&str, &PresenceWindows)> = [
        (KHADIJA, &cfg.khadija),
        (STEPHANE, &cfg.stephane),
        (AUDREY, &cfg.audrey),
    ]
    .into_iter()
    .filter(|(name, _)| *name != AUDREY || audrey_in)
    .collect();

    let mut arrivals = Vec::new();
    let mut ordered = false;
    for _ in 0..=MAX_REDRAWS {
        arrivals = windows.iter().map(|(_, w)| w.arrival.draw(rng)).collect();
        if arrivals.windows(2).all(|p| p[0] <= p[1]) {
            ordered = true;
            break;
        }
    }
    if !ordered {
        let mut means: Vec<i64> = windows
            .iter()
            .map(|(_, w)| i64::from(w.arrival.mean.0))
            .collect();
        means.sort_unstable();
        arrivals = means;
    }
    let departures: Vec<i64> = windows.iter().map(|(_, w)| w.departure.draw(rng)).collect();

    let coffee_start = cfg.coffee.draw(rng);
    let coffee_end = coffee_start + i64::from(cfg.coffee_duration_min);
    let lunch_jitter = i64::from(cfg.lunch_jitter_min);

    let mut out = DayPresence {
        coffee_time: Some(ClockTime(coffee_start as u32).on(day)),
        ..DayPresence::default()
    };
    for (i, (name, _)) in windows.iter().enumerate() {
        let lunch_out = i64::from(cfg.lunch.start.0) + rng.uniform_int(0, lunch_jitter);
        let lunch_back = i64::from(cfg.lunch.end.0) - rng.uniform_int(0, lunch_jitter);
        let mut excursions = vec![(lunch_out, lunch_back, Location::Cafeteria, Activity::Lunch)];
        match *name {
            KHADIJA | AUDREY => excursions.push((
                coffee_start,
                coffee_end,
                Location::Cafeteria,
                Activity::Coffee,
            )),
            _ => {
                if cfg.stephane_lecture_days.contains(&day.weekday()) {
                    excursions.push((
                        cfg.lecture.start.0.into(),
                        cfg.lecture.end.0.into(),
                        Location::Lecture,
                        Activity::Lecture,
                    ));
                }
                if cfg.stephane_meeting_days.contains(&day.weekday()) {
                    excursions.push((
                        cfg.meeting.start.0.into(),
                        cfg.meeting.end.0.into(),
                        Location::MeetingRoom,
                        Activity::Meeting,
                    ));
                }
            }
        }
        let stays = timeline(day, arrivals[i], departures[i], &mut excursions);
        out.stays.insert((*name).to_owned(), stays);
    }

    let coffee = Stay {
        start: ClockTime(coffee_start as u32).on(day),
        end: ClockTime(coffee_end as u32).on(day),
        location: Location::Cafeteria,
        activity: Activity::Coffee,
    };
    let stephane_in_office_for_coffee = out
        .stays_of(STEPHANE)
        .iter()
        .any(|s| s.location == Location::Office && s.start <= coffee.start && s.end >= coffee.end);
    if stephane_in_office_for_coffee {
        out.stephane_coffee = Some(coffee);
    }

    let visits = realize_visits(cfg, day, &out, coffee_start, coffee_end, rng);
    if !visits.is_empty() {
        out.stays.insert(VISITORS.to_owned(), visits);
    }
    out
}

/// Visits fall inside Stephane's office stays with a margin on both sides
/// and keep clear of the coffee invitation.
fn realize_visits(
    cfg: &ScenarioConfig,
    day: NaiveDate,
    presence: &DayPresence,
    coffee_start: i64,
    coffee_end: i64,
    rng: &mut RandomStream,
) -> Vec<Stay> {
    let midnight = day.and_hms_opt(0, 0, 0).expect("midnight");
    let minute = |t: NaiveDateTime| (t - midnight).num_minutes();
    let count =
        cfg.visitor_rate.floor() as usize + usize::from(rng.bernoulli(cfg.visitor_rate.fract()));
    let hosts: Vec<(i64, i64)> = presence
        .stays_of(STEPHANE)
        .iter()
        .filter(|s| s.location == Location::Office)
        .map(|s| {
            (
                minute(s.start) + VISIT_MARGIN_MIN,
                minute(s.end) - VISIT_MARGIN_MIN,
            )
        })
        .collect();
    let blocked = (coffee_start - 15, coffee_end + VISIT_MARGIN_MIN);

    let mut visits: Vec<(i64, i64)> = Vec::new();
    for _ in 0..count {
        let len = rng.uniform_int(
            i64::from(cfg.visitor_stay_min.min),
            i64::from(cfg.visitor_stay_min.max),
        );
        let overlaps = |s: i64, e: i64, other: (i64, i64)| s < other.1 && other.0 < e;
        let candidates: Vec<i64> = hosts
            .iter()
            .flat_map(|&(lo, hi)| lo..=(hi - len))
            .filter(|&s| !overlaps(s, s + len, blocked))
            .filter(|&s| {
                visits.iter().all(|&(vs, ve)| {
                    !overlaps(s, s + len, (vs - VISIT_MARGIN_MIN, ve + VISIT_MARGIN_MIN))
                })
            })
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let pick = rng.uniform_int(0, candidates.len() as i64 - 1) as usize;
        visits.push((candidates[pick], candidates[pick] + len));
    }
    visits.sort_unstable();
    visits
        .into_iter()
        .map(|(s, e)| Stay {
            start: midnight + Duration::minutes(s),
            end: midnight + Duration::minutes(e),
            location: Location::Office,
            activity: Activity::Visit,
        })
        .collect()
}

fn agenda(calendar: &PresenceCalendar, agent: &str) -> Vec<AgendaEntry> {
    let mut entries: Vec<AgendaEntry> = calendar
        .days
        .values()
        .flat_map(|d| d.stays_of(agent).iter())
        .map(|s| AgendaEntry {
            start: s.start,
            end: s.end,
            location: s.location,
            activity: s.activity.as_str().to_owned(),
            condition: None,
        })
        .collect();
    if agent == STEPHANE {
        entries.extend(
            calendar
                .days
                .values()
                .filter_map(|d| d.stephane_coffee.as_ref())
                .map(|s| AgendaEntry {
                    start: s.start,
                    end: s.end,
                    location: s.location,
                    activity: s.activity.as_str().to_owned(),
                    condition: Some(COFFEE_JOIN.to_owned()),
                }),
        );
    }
    entries
}

// Belief helpers shared by the rule guards.

fn here(b: &Beliefs) -> Location {
    b.place("self.location").unwrap_or(Location::Away)
}

fn planned(b: &Beliefs) -> Location {
    b.place("plan.location").unwrap_or(Location::Away)
}

fn leaving(b: &Beliefs) -> bool {
    here(b) == Location::Office && planned(b) != Location::Office
}

fn entering(b: &Beliefs) -> bool {
    here(b) != Location::Office && planned(b) == Location::Office
}

fn relocating(b: &Beliefs) -> bool {
    here(b) != Location::Office && planned(b) != Location::Office && planned(b) != here(b)
}

fn activity_is(b: &Beliefs, activity: Activity) -> bool {
    b.text("plan.activity") == Some(activity.as_str())
}

fn going_home(b: &Beliefs) -> bool {
    b.text("plan.activity") == Some("home")
}

fn door_open(b: &Beliefs) -> bool {
    b.flag("door.open")
}

fn present(b: &Beliefs, name: &str) -> bool {
    b.flag(&format!("present.{name}"))
}

fn others_present(b: &Beliefs) -> bool {
    b.number("office.others").unwrap_or(0) > 0
}

fn pass_and_close() -> Vec<Action> {
    vec![Action::OpenDoor, Action::FollowPlan, Action::CloseDoor]
}

fn pass_and_leave_open() -> Vec<Action> {
    vec![Action::OpenDoor, Action::FollowPlan]
}

fn relocate_rule() -> Rule {
    Rule::new(
        "relocate",
        0,
        |b, _| relocating(b),
        vec![Action::FollowPlan],
    )
}

fn khadija_rules(cfg: &ScenarioConfig) -> Vec<Rule> {
    vec![
        Rule::new(
            "offer_coffee",
            10,
            |b, _| {
                here(b) == Location::Office
                    && planned(b) == Location::Office
                    && b.text("plan.next_activity") == Some(Activity::Coffee.as_str())
                    && b.number("plan.next_in").is_some_and(|m| m <= 10)
                    && present(b, STEPHANE)
                    && b.message("coffee_offered").is_none()
            },
            vec![
                Action::send(STEPHANE, "coffee", "?"),
                Action::send(KHADIJA, "coffee_offered", "yes"),
            ],
        ),
        Rule::new(
            "lunch_close",
            9,
            |b, _| leaving(b) && activity_is(b, Activity::Lunch),
            vec![Action::CloseDoor, Action::FollowPlan],
        ),
        // coffee in each hand on the way back
        Rule::new(
            "coffee_fetch_leave_open",
            8,
            |b, _| {
                leaving(b)
                    && activity_is(b, Activity::Coffee)
                    && b.message("coffee_reply") == Some("bring")
                    && !present(b, AUDREY)
            },
            pass_and_leave_open(),
        ),
        Rule::new(
            "leave_with_others",
            7,
            |b, _| leaving(b) && others_present(b),
            vec![Action::LeaveDoor, Action::FollowPlan],
        ),
        Rule::new(
            "leave_last_close",
            6,
            |b, _| leaving(b),
            vec![Action::CloseDoor, Action::FollowPlan],
        ),
        Rule::new(
            "morning_open_close",
            5,
            |b, _| entering(b) && here(b) == Location::Away && !door_open(b),
            pass_and_close(),
        )
        .with_probability(cfg.p_khadija_close_after_morning_open),
        Rule::new(
            "morning_open_leave_open",
            4,
            |b, _| entering(b) && here(b) == Location::Away && !door_open(b),
            pass_and_leave_open(),
        ),
        Rule::new(
            "enter_keep_closed",
            3,
            |b, _| entering(b) && !door_open(b),
            pass_and_close(),
        ),
        Rule::new(
            "enter_open_door",
            2,
            |b, _| entering(b),
            vec![Action::LeaveDoor, Action::FollowPlan],
        ),
        relocate_rule(),
    ]
}

fn stephane_rules(cfg: &ScenarioConfig) -> Vec<Rule> {
    let asked = |b: &Beliefs| {
        here(b) == Location::Office
            && b.message("coffee") == Some("?")
            && b.message("coffee_replied").is_none()
    };
    vec![
        Rule::new(
            "coffee_busy",
            10,
            move |b, _| asked(b),
            vec![
                Action::send(KHADIJA, "coffee_reply", "bring"),
                Action::send(STEPHANE, "coffee_replied", "yes"),
            ],
        )
        .with_probability(cfg.p_stephane_busy),
        Rule::new(
            "coffee_accept",
            9,
            move |b, _| asked(b),
            vec![
                Action::send(KHADIJA, "coffee_reply", "accept"),
                Action::send(STEPHANE, "coffee_replied", "yes"),
                Action::send(STEPHANE, "coffee_join", "yes"),
            ],
        )
        .with_probability(cfg.p_stephane_accepts_coffee),
        Rule::new(
            "coffee_decline",
            8,
            move |b, _| asked(b),
            vec![
                Action::send(KHADIJA, "coffee_reply", "decline"),
                Action::send(STEPHANE, "coffee_replied", "yes"),
            ],
        ),
        Rule::new(
            "lunch_close",
            7,
            |b, _| leaving(b) && activity_is(b, Activity::Lunch),
            vec![Action::CloseDoor, Action::FollowPlan],
        ),
        Rule::new(
            "home_last_close",
            6,
            |b, _| leaving(b) && going_home(b) && !others_present(b),
            vec![Action::CloseDoor, Action::FollowPlan],
        ),
        Rule::new(
            "leave_close_for_audrey",
            5,
            |b, _| leaving(b) && present(b, AUDREY),
            vec![Action::CloseDoor, Action::FollowPlan],
        ),
        Rule::new("leave_open", 4, |b, _| leaving(b), pass_and_leave_open()),
        Rule::new(
            "enter_close_for_audrey",
            3,
            |b, _| entering(b) && present(b, AUDREY),
            pass_and_close(),
        ),
        Rule::new(
            "enter_leave_open",
            2,
            |b, _| entering(b),
            pass_and_leave_open(),
        ),
        relocate_rule(),
    ]
}

fn audrey_rules() -> Vec<Rule> {
    vec![
        Rule::new(
            "leave_close",
            5,
            |b, _| leaving(b),
            vec![Action::CloseDoor, Action::FollowPlan],
        ),
        Rule::new(
            "close_open_door",
            4,
            |b, _| {
                here(b) == Location::Office
                    && planned(b) == Location::Office
                    && door_open(b)
                    && !present(b, VISITORS)
            },
            vec![Action::CloseDoor],
        ),
        Rule::new("enter_close", 3, |b, _| entering(b), pass_and_close()),
        relocate_rule(),
    ]
}

fn visitor_rules(cfg: &ScenarioConfig) -> Vec<Rule> {
    vec![
        Rule::new(
            "enter_leave_open",
            4,
            |b, _| entering(b) && present(b, STEPHANE),
            pass_and_leave_open(),
        )
        .with_probability(cfg.p_visitor_leaves_open),
        Rule::new(
            "enter_close",
            3,
            |b, _| entering(b) && present(b, STEPHANE),
            pass_and_close(),
        ),
        Rule::new("leave_open", 2, |b, _| leaving(b), pass_and_leave_open())
            .with_probability(cfg.p_visitor_leaves_open),
        Rule::new("leave_close", 1, |b, _| leaving(b), pass_and_close()),
    ]
}

/// Scenario world for `days` days starting at midnight of `first_day`,
/// agents in the order Khadija, Stephane, Audrey, Visitors, door closed.
pub fn build_scenario(
    cfg: &ScenarioConfig,
    seed: u64,
    first_day: NaiveDate,
    days: u32,
) -> Result<World> {
    cfg.validate()?;
    let calendar = PresenceCalendar::realize(cfg, seed, first_day, days);
    let start = first_day.and_hms_opt(0, 0, 0).expect("midnight");
    let mut world = World::new(start, seed, false)?;
    let roster = [
        (KHADIJA, khadija_rules(cfg)),
        (STEPHANE, stephane_rules(cfg)),
        (AUDREY, audrey_rules()),
        (VISITORS, visitor_rules(cfg)),
    ];
    for (name, rules) in roster {
        let agent =
            AgentState::new(name, Location::Away, rules)?.with_agenda(agenda(&calendar, name))?;
        world.add_agent(agent)?;
    }
    Ok(world)
}
