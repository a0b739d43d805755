use chrono::{NaiveDate, NaiveDateTime};
use occusim::markov::select_state;
use occusim::*;
use proptest::prelude::*;

fn day(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn midnight(d: NaiveDate) -> NaiveDateTime {
    d.and_hms_opt(0, 0, 0).unwrap()
}

fn model(w: [[f64; 3]; 3], l: [[f64; 3]; 3]) -> MarkovModel {
    MarkovModel::new(
        TransitionMatrix::new(w).unwrap(),
        TransitionMatrix::new(l).unwrap(),
    )
}

// Reference cumulative-sum search, written independently of the library.
fn cumsum_oracle(row: [f64; 3], r: f64) -> DoorState {
    let cum = [row[0], row[0] + row[1], row[0] + row[1] + row[2]];
    let mut pick = None;
    for i in (0..3).rev() {
        let lower = if i == 0 { 0.0 } else { cum[i - 1] };
        if row[i] > 0.0 && r >= lower {
            pick = Some(i);
            break;
        }
    }
    DoorState::from_index(pick.expect("row has mass")).unwrap()
}

#[test]
fn selection_matches_cumsum_on_grid() {
    let rows = [
        [0.6, 0.25, 0.15],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [0.5, 0.5, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.1, 0.05, 0.85],
    ];
    for row in rows {
        for k in 0..10_000 {
            let r = k as f64 / 10_000.0;
            assert_eq!(
                select_state(row, r),
                cumsum_oracle(row, r),
                "row {row:?} r {r}"
            );
        }
    }
}

#[test]
fn zero_probability_states_never_drawn() {
    let tm = TransitionMatrix::new([[0.0, 0.3, 0.7], [0.5, 0.0, 0.5], [0.4, 0.6, 0.0]]).unwrap();
    let mut rng = RandomStream::new(9);
    for from in DoorState::ALL {
        for _ in 0..10_000 {
            let to = step(from, &tm, &mut rng);
            assert!(tm.get(from, to) > 0.0);
        }
    }
    assert_eq!(select_state([0.0, 1.0, 0.0], 0.999_999), DoorState::Move);
}

#[test]
fn simulate_examples() {
    let m = model(
        [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
    );
    let range = HourRange::days(day(2013, 10, 7), 7).unwrap();
    let s = simulate(&m, range, &mut RandomStream::new(0));
    let sched = TimeSlotSchedule::default();
    for (t, state) in s.iter() {
        let expected = match sched.slot_of(t) {
            Slot::Working => DoorState::Open,
            _ => DoorState::Closed,
        };
        assert_eq!(state, expected, "{t}");
    }
}

#[test]
fn fit_round_trip_at_ten_to_the_five_steps() {
    let schedule = TimeSlotSchedule::new(0..12, 12..24).unwrap();
    let mut m = model(
        [[0.60, 0.25, 0.15], [0.30, 0.40, 0.30], [0.20, 0.20, 0.60]],
        [[0.30, 0.20, 0.50], [0.20, 0.30, 0.50], [0.10, 0.10, 0.80]],
    );
    m.schedule = schedule.clone();
    let range = HourRange::days(day(2000, 1, 3), 5840).unwrap();
    let series = simulate(&m, range, &mut RandomStream::new(0));
    let (cw, cl) = count_transitions(&series, &schedule).unwrap();
    assert!(cw.total() + cl.total() >= 100_000);
    let fit = MarkovModel::fit(&series, schedule).unwrap();
    assert!(fit.tm_working.max_abs_diff(&m.tm_working) <= 0.02);
    assert!(fit.tm_lunch.max_abs_diff(&m.tm_lunch) <= 0.02);
}

#[test]
fn same_seed_same_output() {
    let m = occusim::fixture::reference_model();
    let range = HourRange::days(day(2013, 10, 1), 60).unwrap();
    let a = simulate(&m, range, &mut RandomStream::new(5));
    let b = simulate(&m, range, &mut RandomStream::new(5));
    let c = simulate(&m, range, &mut RandomStream::new(6));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn model_json_round_trip_and_rejections() {
    let m = occusim::fixture::reference_model();
    let back = MarkovModel::from_json(&m.to_json()).unwrap();
    assert_eq!(back, m);
    let bad = m.to_json().replace("0.6", "0.7");
    assert!(matches!(
        MarkovModel::from_json(&bad),
        Err(Error::InvalidModel(_))
    ));
    assert!(MarkovModel::from_json("{}").is_err());
}

#[test]
fn one_hour_is_insufficient() {
    let s = StateSeries::new(midnight(day(2013, 10, 7)), vec![DoorState::Closed]).unwrap();
    assert!(matches!(
        MarkovModel::fit(&s, TimeSlotSchedule::default()),
        Err(Error::InsufficientData(_))
    ));
}

fn arb_series() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..3, 48..24 * 14)
}

proptest! {
    #[test]
    fn fitted_rows_are_stochastic(codes in arb_series(), offset in 0u64..7) {
        let start = midnight(day(2013, 10, 7) + chrono::Days::new(offset));
        let states = codes.iter().map(|&i| DoorState::from_index(i).unwrap()).collect();
        let series = StateSeries::new(start, states).unwrap();
        if let Ok(m) = MarkovModel::fit(&series, TimeSlotSchedule::default()) {
            for tm in [&m.tm_working, &m.tm_lunch] {
                for row in tm.probs() {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                    prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
                }
            }
        }
    }

    #[test]
    fn counts_cover_only_in_slot_transitions(codes in arb_series()) {
        let start = midnight(day(2013, 10, 7));
        let states: Vec<DoorState> = codes.iter().map(|&i| DoorState::from_index(i).unwrap()).collect();
        let series = StateSeries::new(start, states).unwrap();
        let sched = TimeSlotSchedule::default();
        let (w, l) = count_transitions(&series, &sched).unwrap();
        let expect = |slot| (1..series.len()).filter(|&i| sched.slot_of(series.hour_at(i)) == slot).count() as u64;
        prop_assert_eq!(w.total(), expect(Slot::Working));
        prop_assert_eq!(l.total(), expect(Slot::Lunch));
    }
}
