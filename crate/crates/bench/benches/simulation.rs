use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use occusim::fixture::reference_model;
use occusim::*;
use occusim_bench::{fixture, sixty_days, SEED};

fn pipeline(c: &mut Criterion) {
    let range = sixty_days();
    let schedule = TimeSlotSchedule::default();
    let fx = fixture();
    let csv = fx.events.to_csv();

    c.bench_function("ingest/parse_and_resample_60d", |b| {
        b.iter(|| {
            let log = parse_event_log(black_box(&csv)).unwrap();
            ingest_states(&log, range, Thresholds::default(), &schedule)
        })
    });

    let recorded = ingest_states(&fx.events, range, Thresholds::default(), &schedule);
    c.bench_function("markov/fit_60d", |b| {
        b.iter(|| MarkovModel::fit(black_box(&recorded), schedule.clone()).unwrap())
    });

    let model = reference_model();
    c.bench_function("markov/simulate_60d", |b| {
        b.iter(|| simulate(&model, range, &mut RandomStream::new(black_box(SEED))))
    });

    let runs: Vec<LabeledRun> = (0..20)
        .map(|s| LabeledRun::new(Some(s), simulate(&model, range, &mut RandomStream::new(s))))
        .collect();
    c.bench_function("analysis/report_20_runs", |b| {
        b.iter(|| build_report(&recorded, black_box(&runs), &[], &schedule).unwrap())
    });
}

fn engines(c: &mut Criterion) {
    let range = sixty_days();
    let model = reference_model();
    let cfg = ScenarioConfig::default();
    let mut group = c.benchmark_group("agents");
    group.sample_size(10);
    group.bench_function("group_agent_60d", |b| {
        b.iter_batched(
            || group_world(&model, range.first(), SEED).unwrap(),
            |world| run(world, range.end()).unwrap().1,
            BatchSize::LargeInput,
        )
    });
    group.bench_function("scenario_60d", |b| {
        b.iter_batched(
            || build_scenario(&cfg, SEED, range.first().date(), 60).unwrap(),
            |world| run(world, range.end()).unwrap().1,
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, pipeline, engines);
criterion_main!(benches);
