use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use occusim::agents::trace_to_jsonl;
use occusim::fixture::{self, FixtureNoise};
use occusim::*;

use crate::error::{read_text, write_text, CliError, CliResult};
use crate::manifest::{digest_file, FileDigest, RunManifest};

pub const DEFAULT_START: &str = "2013-10-01";

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sensor event CSV -> hourly door-state CSV.
    Ingest(IngestArgs),
    /// Door-state CSV -> per-slot Markov model JSON.
    Fit(FitArgs),
    /// Simulate door states with one of the engines.
    Simulate(SimulateArgs),
    /// Compare simulated runs against a recorded series.
    Compare(CompareArgs),
    /// Generate a synthetic sensor log from a known model.
    Fixture(FixtureArgs),
    /// Re-run a manifest and verify its outputs byte for byte.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Event CSV (`timestamp,value`).
    #[arg(long)]
    pub input: PathBuf,
    /// Output states CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// First day of the range; defaults to the day of the first event.
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Number of days; defaults to through the day of the last event.
    #[arg(long)]
    pub days: Option<u32>,
    #[arg(long, default_value_t = 0.2)]
    pub closed_max: f64,
    #[arg(long, default_value_t = 0.8)]
    pub open_min: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// States CSV (`hour,state`).
    #[arg(long)]
    pub input: PathBuf,
    /// Output model JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Markov,
    GroupAgent,
    Scenario,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Engine::Markov)]
    pub engine: Engine,
    /// Model JSON; required by the markov and group-agent engines.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Scenario config JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub days: u32,
    #[arg(long, default_value = DEFAULT_START)]
    pub start: NaiveDate,
    /// Output states CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Trace JSON-lines for agent engines; defaults to `<out stem>.trace.jsonl`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Recorded states CSV.
    #[arg(long)]
    pub recorded: PathBuf,
    /// Markov-simulated states CSVs.
    #[arg(long, num_args = 1..)]
    pub markov: Vec<PathBuf>,
    /// Agent-simulated states CSVs.
    #[arg(long, num_args = 1..)]
    pub agent: Vec<PathBuf>,
    /// Output report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Profile CSV; defaults to `<out stem>.profile.csv`.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FixtureArgs {
    /// Output event CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the noiseless hourly states the events were drawn from.
    #[arg(long)]
    pub states_out: Option<PathBuf>,
    /// Also write the generating model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub days: u32,
    #[arg(long, default_value = DEFAULT_START)]
    pub start: NaiveDate,
    #[arg(long, default_value_t = 0.02)]
    pub drop_probability: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

/// What a command read and wrote; becomes the manifest.
pub struct Outcome {
    pub inputs: Vec<(String, PathBuf)>,
    /// The first output is primary: the manifest sits next to it.
    pub outputs: Vec<(String, PathBuf)>,
    pub seed: Option<u64>,
    pub config_sha256: Option<String>,
    pub summary: String,
}

fn resolve(cwd: &Path, p: &Path) -> PathBuf {
    cwd.join(p)
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    p.with_extension(suffix)
}

impl SimulateArgs {
    fn trace_path(&self) -> PathBuf {
        self.trace
            .clone()
            .unwrap_or_else(|| with_suffix(&self.out, "trace.jsonl"))
    }
}

impl CompareArgs {
    fn profile_path(&self) -> PathBuf {
        self.profile_csv
            .clone()
            .unwrap_or_else(|| with_suffix(&self.out, "profile.csv"))
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Fit(_) => "fit",
            Command::Simulate(_) => "simulate",
            Command::Compare(_) => "compare",
            Command::Fixture(_) => "fixture",
            Command::Rerun(_) => "rerun",
        }
    }

    /// Points every output into `dir`, keeping file names.
    pub fn redirect_outputs(&mut self, dir: &Path) {
        let into = |p: &mut PathBuf| {
            let name = p
                .file_name()
                .map(PathBuf::from)
                .unwrap_or_else(|| "out".into());
            *p = dir.join(name);
        };
        match self {
            Command::Ingest(a) => into(&mut a.out),
            Command::Fit(a) => into(&mut a.out),
            Command::Simulate(a) => {
                let trace = a.trace_path();
                into(&mut a.out);
                let mut t = trace;
                into(&mut t);
                a.trace = Some(t);
            }
            Command::Compare(a) => {
                let profile = a.profile_path();
                into(&mut a.out);
                let mut p = profile;
                into(&mut p);
                a.profile_csv = Some(p);
            }
            Command::Fixture(a) => {
                into(&mut a.out);
                a.states_out.iter_mut().for_each(into);
                a.model_out.iter_mut().for_each(into);
            }
            Command::Rerun(_) => {}
        }
    }

    /// Runs the command with relative paths resolved against `cwd`.
    pub fn execute(&self, cwd: &Path) -> CliResult<Outcome> {
        match self {
            Command::Ingest(a) => ingest(a, cwd),
            Command::Fit(a) => fit(a, cwd),
            Command::Simulate(a) => simulate_cmd(a, cwd),
            Command::Compare(a) => compare(a, cwd),
            Command::Fixture(a) => fixture_cmd(a, cwd),
            Command::Rerun(_) => Err(CliError::input("a manifest cannot record a rerun")),
        }
    }
}

fn ingest(a: &IngestArgs, cwd: &Path) -> CliResult<Outcome> {
    let input = resolve(cwd, &a.input);
    let log = parse_event_log(&read_text(&input)?).map_err(|e| CliError::in_file(&a.input, e))?;
    let first_day = a
        .start
        .or_else(|| log.entries().first().map(|e| e.timestamp.date()))
        .ok_or_else(|| CliError::input("event log is empty; pass --start and --days"))?;
    let days = match a.days {
        Some(d) => d,
        None => {
            let last = log
                .entries()
                .last()
                .map(|e| e.timestamp.date())
                .ok_or_else(|| CliError::input("event log is empty; pass --days"))?;
            let span = (last - first_day).num_days() + 1;
            u32::try_from(span)
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| CliError::input("--start is after the last event"))?
        }
    };
    let range = HourRange::days(first_day, days)?;
    let th = Thresholds::new(a.closed_max, a.open_min)?;
    let states = ingest_states(&log, range, th, &TimeSlotSchedule::default());
    write_text(&resolve(cwd, &a.out), &states.to_csv())?;
    Ok(Outcome {
        inputs: vec![("events".into(), a.input.clone())],
        outputs: vec![("states".into(), a.out.clone())],
        seed: None,
        config_sha256: None,
        summary: format!("{} events -> {} hours", log.len(), states.len()),
    })
}

fn read_states(cwd: &Path, path: &Path) -> CliResult<StateSeries> {
    StateSeries::from_csv(&read_text(&resolve(cwd, path))?).map_err(|e| CliError::in_file(path, e))
}

fn fit(a: &FitArgs, cwd: &Path) -> CliResult<Outcome> {
    let series = read_states(cwd, &a.input)?;
    let model = MarkovModel::fit(&series, TimeSlotSchedule::default())?;
    write_text(&resolve(cwd, &a.out), &model.to_json())?;
    Ok(Outcome {
        inputs: vec![("states".into(), a.input.clone())],
        outputs: vec![("model".into(), a.out.clone())],
        seed: None,
        config_sha256: None,
        summary: format!("fitted {} hours", series.len()),
    })
}

fn simulate_cmd(a: &SimulateArgs, cwd: &Path) -> CliResult<Outcome> {
    let range = HourRange::days(a.start, a.days)?;
    let mut inputs = Vec::new();
    let mut config_sha256 = None;
    let load_model = |inputs: &mut Vec<(String, PathBuf)>| -> CliResult<MarkovModel> {
        let path = a
            .model
            .as_ref()
            .ok_or_else(|| CliError::input("--model is required for this engine"))?;
        inputs.push(("model".into(), path.clone()));
        MarkovModel::from_json(&read_text(&resolve(cwd, path))?)
            .map_err(|e| CliError::in_file(path, e))
    };
    let (series, trace) = match a.engine {
        Engine::Markov => {
            let model = load_model(&mut inputs)?;
            (
                simulate(&model, range, &mut RandomStream::new(a.seed)),
                None,
            )
        }
        Engine::GroupAgent => {
            let model = load_model(&mut inputs)?;
            let world = group_world(&model, range.first(), a.seed)?;
            let (world, series) = run(world, range.end())?;
            (series, Some(trace_to_jsonl(world.trace())))
        }
        Engine::Scenario => {
            let cfg = match &a.config {
                Some(path) => {
                    inputs.push(("config".into(), path.clone()));
                    ScenarioConfig::from_json(&read_text(&resolve(cwd, path))?)
                        .map_err(|e| CliError::in_file(path, e))?
                }
                None => ScenarioConfig::default(),
            };
            config_sha256 = Some(crate::manifest::sha256_hex(cfg.to_json().as_bytes()));
            let world = build_scenario(&cfg, a.seed, a.start, a.days)?;
            let (world, series) = run(world, range.end())?;
            (series, Some(trace_to_jsonl(world.trace())))
        }
    };
    write_text(&resolve(cwd, &a.out), &series.to_csv())?;
    let mut outputs = vec![("states".into(), a.out.clone())];
    if let Some(trace) = trace {
        let path = a.trace_path();
        write_text(&resolve(cwd, &path), &trace)?;
        outputs.push(("trace".into(), path));
    }
    Ok(Outcome {
        inputs,
        outputs,
        seed: Some(a.seed),
        config_sha256,
        summary: format!("{} hours", series.len()),
    })
}

fn compare(a: &CompareArgs, cwd: &Path) -> CliResult<Outcome> {
    if a.markov.is_empty() && a.agent.is_empty() {
        return Err(CliError::input(
            "nothing to compare: pass --markov and/or --agent",
        ));
    }
    let recorded = read_states(cwd, &a.recorded)?;
    let load = |paths: &[PathBuf]| -> CliResult<Vec<LabeledRun>> {
        paths
            .iter()
            .map(|p| {
                let series = read_states(cwd, p)?;
                let seed = RunManifest::sibling_seed(&resolve(cwd, p));
                Ok(LabeledRun::new(seed, series))
            })
            .collect()
    };
    let markov = load(&a.markov)?;
    let agent = load(&a.agent)?;
    let report = build_report(&recorded, &markov, &agent, &TimeSlotSchedule::default())?;
    write_text(&resolve(cwd, &a.out), &report.to_json())?;
    let profile = a.profile_path();
    write_text(&resolve(cwd, &profile), &report.profile_csv())?;
    let mut inputs = vec![("recorded".to_string(), a.recorded.clone())];
    inputs.extend(a.markov.iter().map(|p| ("markov".to_string(), p.clone())));
    inputs.extend(a.agent.iter().map(|p| ("agent".to_string(), p.clone())));
    Ok(Outcome {
        inputs,
        outputs: vec![
            ("report".into(), a.out.clone()),
            ("profile".into(), profile),
        ],
        seed: None,
        config_sha256: None,
        summary: format!("{} runs compared", report.runs.len()),
    })
}

fn fixture_cmd(a: &FixtureArgs, cwd: &Path) -> CliResult<Outcome> {
    if !(0.0..=1.0).contains(&a.drop_probability) {
        return Err(CliError::input("--drop-probability must lie in [0, 1]"));
    }
    let range = HourRange::days(a.start, a.days)?;
    let model = fixture::reference_model();
    let noise = FixtureNoise {
        drop_probability: a.drop_probability,
        ..FixtureNoise::default()
    };
    let fx = fixture::generate(&model, range, a.seed, noise);
    write_text(&resolve(cwd, &a.out), &fx.events.to_csv())?;
    let mut outputs = vec![("events".to_string(), a.out.clone())];
    if let Some(p) = &a.states_out {
        write_text(&resolve(cwd, p), &fx.states.to_csv())?;
        outputs.push(("states".into(), p.clone()));
    }
    if let Some(p) = &a.model_out {
        write_text(&resolve(cwd, p), &model.to_json())?;
        outputs.push(("model".into(), p.clone()));
    }
    Ok(Outcome {
        inputs: Vec::new(),
        outputs,
        seed: Some(a.seed),
        config_sha256: None,
        summary: format!("{} events over {} hours", fx.events.len(), range.len()),
    })
}

pub fn digests(cwd: &Path, files: &[(String, PathBuf)]) -> CliResult<Vec<FileDigest>> {
    files
        .iter()
        .map(|(role, p)| {
            let mut d = digest_file(role, &resolve(cwd, p))?;
            d.path = p.clone();
            Ok(d)
        })
        .collect()
}
