//! Shared inputs for the benchmarks.

use occusim::fixture::{generate, reference_model, Fixture, FixtureNoise};
use occusim::HourRange;

pub const SEED: u64 = 0;

/// Sixty days from 2013-10-01, the calendar every benchmark runs over.
pub fn sixty_days() -> HourRange {
    let start = "2013-10-01".parse().expect("valid date");
    HourRange::days(start, 60).expect("valid range")
}

pub fn fixture() -> Fixture {
    generate(
        &reference_model(),
        sixty_days(),
        SEED,
        FixtureNoise::default(),
    )
}
