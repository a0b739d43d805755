use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};
use occusim::ingest::EVENT_CSV_HEADER;
use occusim::time::format_timestamp;
use occusim::*;
use proptest::prelude::*;

fn base() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2013, 10, 7)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

// Brute-force classifier: walks the three closed/half-open intervals.
fn oracle(r: f64) -> DoorState {
    let bands = [
        (0.0, 0.2, true, DoorState::Closed),
        (0.2, 0.8, false, DoorState::Move),
        (0.8, 1.0, true, DoorState::Open),
    ];
    for (lo, hi, closed_hi, s) in bands {
        let lo_ok = if s == DoorState::Move {
            r > lo
        } else {
            r >= lo
        };
        let hi_ok = if closed_hi { r <= hi } else { r < hi };
        if lo_ok && hi_ok {
            return s;
        }
    }
    unreachable!("{r} not covered")
}

fn ratio_series(ratios: &[f64]) -> HourlyRatioSeries {
    HourlyRatioSeries::new(
        base(),
        ratios
            .iter()
            .map(|&ratio| HourlyRatio {
                ratio,
                source: RatioSource::Measured,
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn discretize_matches_brute_force_on_random_and_boundary_ratios() {
    let mut rng = RandomStream::new(11);
    let mut ratios: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
    ratios.extend([0.0, 1.0, 0.2, 0.8, 0.5]);
    ratios.extend(
        [0.2f64, 0.8]
            .iter()
            .flat_map(|b| [b.next_down(), b.next_up()]),
    );
    let states = discretize(&ratio_series(&ratios), Thresholds::default());
    for (r, s) in ratios.iter().zip(states.states()) {
        assert_eq!(*s, oracle(*r), "ratio {r}");
    }
}

#[test]
fn documented_examples() {
    let th = Thresholds::default();
    assert_eq!(th.classify(0.0), DoorState::Closed);
    assert_eq!(th.classify(0.2), DoorState::Closed);
    assert_eq!(th.classify(0.5), DoorState::Move);
    assert_eq!(th.classify(0.8), DoorState::Open);
    assert_eq!(th.classify(1.0), DoorState::Open);
}

#[test]
fn event_log_examples() {
    let log =
        parse_event_log("timestamp,value\n2013-10-07T09:00:00,1\n2013-10-07T09:30:00,0\n").unwrap();
    let range = HourRange::new(base() + Duration::hours(8), base() + Duration::hours(10)).unwrap();
    let ratios = hourly_open_ratio(&log, range);
    let r: Vec<(f64, RatioSource)> = ratios
        .ratios()
        .iter()
        .map(|h| (h.ratio, h.source))
        .collect();
    assert_eq!(
        r,
        vec![
            (0.0, RatioSource::Assumed),
            (0.5, RatioSource::Measured),
            (0.0, RatioSource::Measured)
        ]
    );
}

#[test]
fn corrupt_line_is_named() {
    let text = "timestamp,value\n2013-10-07T09:00:00,1\n2013-10-07T09:30:00,x\n";
    match parse_event_log(text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(parse_event_log("2013-10-07T09:00:00,1,2\n").is_err());
    assert!(parse_event_log("2013-10-07T09:00:00,1\ntimestamp,value\n").is_err());
}

fn arb_log() -> impl Strategy<Value = Vec<(i64, bool)>> {
    prop::collection::vec((0i64..72 * 3600, any::<bool>()), 0..60)
}

fn to_log(events: &[(i64, bool)]) -> EventLog {
    EventLog::new(
        events
            .iter()
            .map(|&(s, open)| SensorEvent {
                timestamp: base() + Duration::seconds(s),
                open,
            })
            .collect(),
    )
}

proptest! {
    #[test]
    fn ratios_stay_in_unit_interval(events in arb_log()) {
        let log = to_log(&events);
        let range = HourRange::days(base().date(), 3).unwrap();
        let ratios = hourly_open_ratio(&log, range);
        prop_assert_eq!(ratios.ratios().len(), 72);
        let first = log.entries().first().map(|e| e.timestamp);
        for (i, h) in ratios.ratios().iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&h.ratio));
            let hour_end = base() + Duration::hours(i as i64 + 1);
            let measured = first.is_some_and(|f| f < hour_end);
            prop_assert_eq!(h.source == RatioSource::Measured, measured);
            if !measured {
                prop_assert_eq!(h.ratio, 0.0);
            }
        }
    }

    #[test]
    fn csv_round_trip(events in arb_log()) {
        let log = to_log(&events);
        let text = log.to_csv();
        prop_assert!(text.starts_with(EVENT_CSV_HEADER));
        prop_assert_eq!(parse_event_log(&text).unwrap(), log);
    }

    #[test]
    fn discretize_is_idempotent(codes in prop::collection::vec(0usize..3, 1..100)) {
        let states: Vec<DoorState> = codes.iter().map(|&i| DoorState::from_index(i).unwrap()).collect();
        let fractions: Vec<f64> = states.iter().map(|s| s.open_fraction()).collect();
        let again = discretize(&ratio_series(&fractions), Thresholds::default());
        prop_assert_eq!(again.states(), &states[..]);
    }

    #[test]
    fn closure_closes_every_forced_hour(events in arb_log()) {
        let schedule = TimeSlotSchedule::default();
        let range = HourRange::days(NaiveDate::from_ymd_opt(2013, 10, 11).unwrap(), 3).unwrap();
        let states = ingest_states(&to_log(&events), range, Thresholds::default(), &schedule);
        for (t, s) in states.iter() {
            if schedule.is_forced_closed(t) {
                prop_assert_eq!(s, DoorState::Closed, "{}", format_timestamp(t));
            }
        }
        let profile = hourly_profile(&states);
        for h in 0..24u32 {
            if schedule.is_forced_closed(base().with_hour(h).unwrap()) {
                prop_assert_eq!(profile.values()[h as usize], 0.0);
            }
        }
    }

    #[test]
    fn state_csv_round_trip(codes in prop::collection::vec(0usize..3, 1..200)) {
        let states: Vec<DoorState> = codes.iter().map(|&i| DoorState::from_index(i).unwrap()).collect();
        let series = StateSeries::new(base(), states).unwrap();
        prop_assert_eq!(StateSeries::from_csv(&series.to_csv()).unwrap(), series.clone());
        let crlf = series.to_csv().replace('\n', "\r\n");
        prop_assert_eq!(StateSeries::from_csv(&crlf).unwrap(), series);
    }
}
