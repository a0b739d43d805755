//! Comparison of door-state series: hour-of-day profiles, hourly agreement,
//! profile distance and empirical transition-matrix deviation.

use chrono::{NaiveDateTime, Timelike};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::empirical_tm;
use crate::schedule::TimeSlotSchedule;
use crate::series::StateSeries;
use crate::time::format_timestamp;

/// Mean open-fraction per hour of day (open 1, move 0.5, closed 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HourlyProfile(pub [f64; 24]);

impl HourlyProfile {
    pub fn zeros() -> Self {
        HourlyProfile([0.0; 24])
    }

    pub fn values(&self) -> &[f64; 24] {
        &self.0
    }

    /// Entrywise mean of several profiles.
    pub fn mean_of(profiles: &[HourlyProfile]) -> Option<HourlyProfile> {
        if profiles.is_empty() {
            return None;
        }
        let mut out = [0.0; 24];
        for p in profiles {
            for (o, v) in out.iter_mut().zip(p.0) {
                *o += v;
            }
        }
        let n = profiles.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        Some(HourlyProfile(out))
    }
}

/// Hours of day absent from the series get 0.
pub fn hourly_profile(series: &StateSeries) -> HourlyProfile {
    let mut sum = [0.0; 24];
    let mut n = [0u32; 24];
    for (t, s) in series.iter() {
        let h = t.hour() as usize;
        sum[h] += s.open_fraction();
        n[h] += 1;
    }
    let mut out = [0.0; 24];
    for h in 0..24 {
        if n[h] > 0 {
            out[h] = sum[h] / f64::from(n[h]);
        }
    }
    HourlyProfile(out)
}

fn check_aligned(a: &StateSeries, b: &StateSeries) -> Result<()> {
    if a.start() != b.start() || a.len() != b.len() {
        return Err(Error::RangeMismatch(format!(
            "{} (+{}h) vs {} (+{}h)",
            format_timestamp(a.start()),
            a.len(),
            format_timestamp(b.start()),
            b.len()
        )));
    }
    Ok(())
}

/// Fraction of hours with identical states.
pub fn state_match_rate(a: &StateSeries, b: &StateSeries) -> Result<f64> {
    check_aligned(a, b)?;
    let same = a
        .states()
        .iter()
        .zip(b.states())
        .filter(|(x, y)| x == y)
        .count();
    Ok(same as f64 / a.len() as f64)
}

/// Halved mean absolute deviation: `(1/24) * sum_h |p_h - q_h| / 2`.
pub fn profile_tvd(p: &HourlyProfile, q: &HourlyProfile) -> f64 {
    p.0.iter()
        .zip(&q.0)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 24.0
        / 2.0
}

/// Per-slot max absolute entry difference between the empirical matrices
/// of two series.
pub fn tm_max_dev(
    a: &StateSeries,
    b: &StateSeries,
    schedule: &TimeSlotSchedule,
) -> Result<SlotDeviation> {
    let (aw, al) = empirical_tm(a, schedule)?;
    let (bw, bl) = empirical_tm(b, schedule)?;
    Ok(SlotDeviation {
        working: aw.max_abs_diff(&bw),
        lunch: al.max_abs_diff(&bl),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotDeviation {
    pub working: f64,
    pub lunch: f64,
}

/// One simulated series with the seed that produced it, if known.
#[derive(Debug, Clone)]
pub struct LabeledRun {
    pub seed: Option<u64>,
    pub series: StateSeries,
}

impl LabeledRun {
    pub fn new(seed: Option<u64>, series: StateSeries) -> Self {
        Self { seed, series }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub source: String,
    pub index: usize,
    pub seed: Option<u64>,
    pub state_match_rate: f64,
    pub profile_tvd: f64,
    pub tm_max_dev: SlotDeviation,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceSummary {
    pub runs: usize,
    pub seeds: Vec<Option<u64>>,
    /// Averaged over the runs of this source.
    pub profile: HourlyProfile,
    pub state_match_rate: f64,
    pub profile_tvd: f64,
    pub tm_max_dev: SlotDeviation,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    /// Runs compared index by index.
    pub pairs: usize,
    pub state_match_rate: f64,
    pub profile_tvd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeInfo {
    #[serde(serialize_with = "ser_time")]
    pub first_hour: NaiveDateTime,
    #[serde(serialize_with = "ser_time")]
    pub last_hour: NaiveDateTime,
    pub hours: usize,
}

fn ser_time<S: serde::Serializer>(t: &NaiveDateTime, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_timestamp(*t))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub range: RangeInfo,
    /// `profile_tvd` is `(1/24) * sum_h |p_h - q_h| / 2` over hour-of-day
    /// open-fraction profiles.
    pub metric_definitions: MetricDefinitions,
    pub recorded_profile: HourlyProfile,
    pub markov: Option<SourceSummary>,
    pub agent: Option<SourceSummary>,
    pub markov_vs_agent: Option<PairSummary>,
    pub runs: Vec<RunMetrics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricDefinitions {
    pub state_match_rate: &'static str,
    pub profile_tvd: &'static str,
    pub tm_max_dev: &'static str,
    pub profile: &'static str,
}

const DEFINITIONS: MetricDefinitions = MetricDefinitions {
    state_match_rate: "fraction of hours with identical door states",
    profile_tvd: "(1/24) * sum over hour-of-day h of |p_h - q_h|, halved",
    tm_max_dev: "max absolute entry difference between empirical per-slot transition matrices",
    profile: "mean open-fraction per hour of day; open=1, move=0.5, closed=0",
};

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// CSV `hour,recorded,markov,agent`; missing sources are left empty.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("hour,recorded,markov,agent\n");
        for h in 0..24 {
            let cell = |s: &Option<SourceSummary>| {
                s.as_ref()
                    .map(|s| format!("{}", s.profile.0[h]))
                    .unwrap_or_default()
            };
            out.push_str(&format!(
                "{h},{},{},{}\n",
                self.recorded_profile.0[h],
                cell(&self.markov),
                cell(&self.agent)
            ));
        }
        out
    }
}

fn summarize(
    source: &str,
    recorded: &StateSeries,
    recorded_profile: &HourlyProfile,
    runs: &[LabeledRun],
    schedule: &TimeSlotSchedule,
    all: &mut Vec<RunMetrics>,
) -> Result<Option<SourceSummary>> {
    if runs.is_empty() {
        return Ok(None);
    }
    let mut metrics = Vec::with_capacity(runs.len());
    let mut profiles = Vec::with_capacity(runs.len());
    for (index, run) in runs.iter().enumerate() {
        let profile = hourly_profile(&run.series);
        metrics.push(RunMetrics {
            source: source.to_owned(),
            index,
            seed: run.seed,
            state_match_rate: state_match_rate(&run.series, recorded)?,
            profile_tvd: profile_tvd(&profile, recorded_profile),
            tm_max_dev: tm_max_dev(&run.series, recorded, schedule)?,
        });
        profiles.push(profile);
    }
    let n = metrics.len() as f64;
    let mean = |f: &dyn Fn(&RunMetrics) -> f64| metrics.iter().map(f).sum::<f64>() / n;
    let summary = SourceSummary {
        runs: runs.len(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        profile: HourlyProfile::mean_of(&profiles).expect("non-empty"),
        state_match_rate: mean(&|m| m.state_match_rate),
        profile_tvd: mean(&|m| m.profile_tvd),
        tm_max_dev: SlotDeviation {
            working: mean(&|m| m.tm_max_dev.working),
            lunch: mean(&|m| m.tm_max_dev.lunch),
        },
    };
    all.extend(metrics);
    Ok(Some(summary))
}

/// Compares recorded data with Markov and agent runs. Every series must
/// cover the same hours.
pub fn build_report(
    recorded: &StateSeries,
    markov_runs: &[LabeledRun],
    agent_runs: &[LabeledRun],
    schedule: &TimeSlotSchedule,
) -> Result<ComparisonReport> {
    for run in markov_runs.iter().chain(agent_runs) {
        check_aligned(recorded, &run.series)?;
    }
    let recorded_profile = hourly_profile(recorded);
    let mut runs = Vec::new();
    let markov = summarize(
        "markov",
        recorded,
        &recorded_profile,
        markov_runs,
        schedule,
        &mut runs,
    )?;
    let agent = summarize(
        "agent",
        recorded,
        &recorded_profile,
        agent_runs,
        schedule,
        &mut runs,
    )?;
    let pairs = markov_runs.len().min(agent_runs.len());
    let markov_vs_agent = if pairs == 0 {
        None
    } else {
        let mut matches = 0.0;
        let mut tvd = 0.0;
        for (m, a) in markov_runs.iter().zip(agent_runs) {
            matches += state_match_rate(&m.series, &a.series)?;
            tvd += profile_tvd(&hourly_profile(&m.series), &hourly_profile(&a.series));
        }
        Some(PairSummary {
            pairs,
            state_match_rate: matches / pairs as f64,
            profile_tvd: tvd / pairs as f64,
        })
    };
    let range = recorded.range();
    Ok(ComparisonReport {
        range: RangeInfo {
            first_hour: range.first(),
            last_hour: range.last(),
            hours: range.len(),
        },
        metric_definitions: DEFINITIONS,
        recorded_profile,
        markov,
        agent,
        markov_vs_agent,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::DoorState::{self, *};
    use crate::time::parse_timestamp;

    fn days_with(f: impl Fn(usize, u32) -> DoorState, days: usize) -> StateSeries {
        let start = parse_timestamp("2013-10-07T00:00:00").unwrap();
        let states = (0..days * 24).map(|i| f(i / 24, (i % 24) as u32)).collect();
        StateSeries::new(start, states).unwrap()
    }

    #[test]
    fn profile_examples() {
        let closed = days_with(|_, _| Closed, 3);
        assert_eq!(hourly_profile(&closed), HourlyProfile::zeros());

        let ten = days_with(|_, h| if h == 10 { Open } else { Closed }, 3);
        let p = hourly_profile(&ten);
        assert_eq!(p.0[10], 1.0);
        assert_eq!(p.0.iter().sum::<f64>(), 1.0);

        let alt = days_with(|d, h| if h == 10 && d % 2 == 0 { Open } else { Closed }, 4);
        assert_eq!(hourly_profile(&alt).0[10], 0.5);
    }

    #[test]
    fn match_rate_examples() {
        let a = days_with(|_, h| if h % 2 == 0 { Open } else { Closed }, 1);
        let comp = days_with(|_, h| if h % 2 == 0 { Closed } else { Open }, 1);
        let half = days_with(
            |_, h| {
                if h < 12 {
                    a.states()[h as usize]
                } else {
                    comp.states()[h as usize]
                }
            },
            1,
        );
        assert_eq!(state_match_rate(&a, &a).unwrap(), 1.0);
        assert_eq!(state_match_rate(&a, &comp).unwrap(), 0.0);
        assert_eq!(state_match_rate(&a, &half).unwrap(), 0.5);
        let shorter = days_with(|_, _| Closed, 2);
        assert!(matches!(
            state_match_rate(&a, &shorter),
            Err(Error::RangeMismatch(_))
        ));
    }

    #[test]
    fn tvd_examples() {
        let zeros = HourlyProfile::zeros();
        let ones = HourlyProfile([1.0; 24]);
        let mut ten = [0.0; 24];
        ten[10] = 1.0;
        assert_eq!(profile_tvd(&ones, &ones), 0.0);
        assert_eq!(profile_tvd(&ones, &zeros), 0.5);
        assert_eq!(profile_tvd(&HourlyProfile(ten), &zeros), 1.0 / 48.0);
    }

    #[test]
    fn recorded_against_itself() {
        let rec = days_with(
            |d, h| {
                if (8..18).contains(&h) && d % 3 != 0 {
                    Open
                } else {
                    Closed
                }
            },
            10,
        );
        let runs = [LabeledRun::new(Some(1), rec.clone())];
        let r = build_report(&rec, &runs, &runs, &TimeSlotSchedule::default()).unwrap();
        let m = r.markov.as_ref().unwrap();
        assert_eq!(m.state_match_rate, 1.0);
        assert_eq!(m.profile_tvd, 0.0);
        assert_eq!(
            m.tm_max_dev,
            SlotDeviation {
                working: 0.0,
                lunch: 0.0
            }
        );
        assert_eq!(r.markov_vs_agent.as_ref().unwrap().state_match_rate, 1.0);
        assert_eq!(r.profile_csv().lines().count(), 25);
    }

    #[test]
    fn misaligned_report_is_an_error() {
        let rec = days_with(|_, _| Closed, 2);
        let other = days_with(|_, _| Closed, 3);
        let runs = [LabeledRun::new(None, other)];
        assert!(build_report(&rec, &runs, &[], &TimeSlotSchedule::default()).is_err());
    }
}
