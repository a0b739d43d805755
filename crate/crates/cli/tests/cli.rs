use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn occusim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_occusim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn ok(dir: &Path, args: &[&str]) {
    let out = occusim(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn shipped_fixture_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "fixture",
            "--out",
            "events.csv",
            "--model-out",
            "model.json",
        ],
    );
    assert_eq!(
        read(dir.path(), "events.csv"),
        std::fs::read_to_string(shipped("recorded_events.csv")).unwrap()
    );
    assert_eq!(
        read(dir.path(), "model.json"),
        std::fs::read_to_string(shipped("reference_model.json")).unwrap()
    );
}

#[test]
fn ingest_writes_states_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = shipped("recorded_events.csv");
    ok(
        dir.path(),
        &[
            "ingest",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "rec.csv",
        ],
    );
    let states = read(dir.path(), "rec.csv");
    assert!(states.starts_with("hour,state\n2013-10-01T00:00:00,"));
    assert_eq!(states.lines().count(), 60 * 24 + 1);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "rec.csv.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "ingest");
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["inputs"][0]["role"], "events");
}

#[test]
fn ingest_errors_have_stable_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = occusim(
        dir.path(),
        &["ingest", "--input", "nope.csv", "--out", "x.csv"],
    );
    assert_eq!(code(&missing), 3);

    let mut text = String::from("timestamp,value\n");
    for h in 0..5 {
        text.push_str(&format!("2013-10-01T0{h}:00:00,{}\n", h % 2));
    }
    text.push_str("2013-10-01T05:00:00,open\n");
    std::fs::write(dir.path().join("bad.csv"), text).unwrap();
    let bad = occusim(
        dir.path(),
        &["ingest", "--input", "bad.csv", "--out", "x.csv"],
    );
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("line 7"), "{}", stderr(&bad));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn fit_accepts_sixty_days_and_rejects_one_hour() {
    let dir = tempfile::tempdir().unwrap();
    let model = shipped("reference_model.json");
    ok(
        dir.path(),
        &[
            "simulate",
            "--model",
            model.to_str().unwrap(),
            "--out",
            "sim.csv",
        ],
    );
    ok(
        dir.path(),
        &["fit", "--input", "sim.csv", "--out", "fit.json"],
    );
    let fit: serde_json::Value = serde_json::from_str(&read(dir.path(), "fit.json")).unwrap();
    for slot in ["tm_working", "tm_lunch"] {
        for row in fit[slot].as_array().unwrap() {
            let sum: f64 = row
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .sum();
            assert!((sum - 1.0).abs() <= 1e-9);
        }
    }
    std::fs::write(
        dir.path().join("one.csv"),
        "hour,state\n2013-10-01T09:00:00,open\n",
    )
    .unwrap();
    let out = occusim(
        dir.path(),
        &["fit", "--input", "one.csv", "--out", "o.json"],
    );
    assert_eq!(code(&out), 2);
}

// Reference seed 0, 60 days: the bound was derived for this seed (see the
// fixture model's lunch matrix).
#[test]
fn refit_of_sixty_simulated_days_is_within_a_tenth() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = shipped("reference_model.json");
    ok(
        dir.path(),
        &[
            "simulate",
            "--model",
            model_path.to_str().unwrap(),
            "--seed",
            "0",
            "--days",
            "60",
            "--out",
            "sim.csv",
        ],
    );
    ok(
        dir.path(),
        &["fit", "--input", "sim.csv", "--out", "fit.json"],
    );
    let truth =
        occusim::MarkovModel::from_json(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    let fit = occusim::MarkovModel::from_json(&read(dir.path(), "fit.json")).unwrap();
    assert!(fit.tm_working.max_abs_diff(&truth.tm_working) <= 0.1);
    assert!(fit.tm_lunch.max_abs_diff(&truth.tm_lunch) <= 0.1);
}

#[test]
fn simulate_is_deterministic_and_engines_agree() {
    let dir = tempfile::tempdir().unwrap();
    let model = shipped("reference_model.json");
    let m = model.to_str().unwrap();
    ok(
        dir.path(),
        &["simulate", "--model", m, "--seed", "1", "--out", "a.csv"],
    );
    ok(
        dir.path(),
        &["simulate", "--model", m, "--seed", "1", "--out", "b.csv"],
    );
    ok(
        dir.path(),
        &[
            "simulate",
            "--engine",
            "group-agent",
            "--model",
            m,
            "--seed",
            "1",
            "--out",
            "g.csv",
        ],
    );
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "g.csv"));
    assert!(dir.path().join("g.trace.jsonl").exists());
}

#[test]
fn simulate_rejects_bad_models() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"tm_working": [[1,0,0]]}"#).unwrap();
    let out = occusim(
        dir.path(),
        &["simulate", "--model", "bad.json", "--out", "x.csv"],
    );
    assert_eq!(code(&out), 2);
    let out = occusim(dir.path(), &["simulate", "--out", "x.csv"]);
    assert_eq!(code(&out), 2);
    let out = occusim(
        dir.path(),
        &[
            "simulate",
            "--engine",
            "scenario",
            "--config",
            "missing.json",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn scenario_defaults_close_every_night() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simulate", "--engine", "scenario", "--out", "sc.csv"],
    );
    let series = occusim::StateSeries::from_csv(&read(dir.path(), "sc.csv")).unwrap();
    assert_eq!(series.len(), 60 * 24);
    let sched = occusim::TimeSlotSchedule::default();
    for (t, s) in series.iter() {
        if sched.is_forced_closed(t) {
            assert_eq!(s, occusim::DoorState::Closed, "{t}");
        }
    }
    assert!(!read(dir.path(), "sc.trace.jsonl").is_empty());
}

#[test]
fn compare_reports_and_rejects_misalignment() {
    let dir = tempfile::tempdir().unwrap();
    let model = shipped("reference_model.json");
    let m = model.to_str().unwrap();
    ok(
        dir.path(),
        &["simulate", "--model", m, "--seed", "7", "--out", "mk.csv"],
    );
    ok(
        dir.path(),
        &[
            "simulate", "--engine", "scenario", "--seed", "7", "--out", "sc.csv",
        ],
    );
    ok(
        dir.path(),
        &[
            "compare",
            "--recorded",
            "mk.csv",
            "--markov",
            "mk.csv",
            "--agent",
            "sc.csv",
            "--out",
            "r.json",
        ],
    );
    let r: serde_json::Value = serde_json::from_str(&read(dir.path(), "r.json")).unwrap();
    assert_eq!(r["markov"]["state_match_rate"], 1.0);
    assert_eq!(r["markov"]["seeds"][0], 7);
    for run in r["runs"].as_array().unwrap() {
        for key in ["state_match_rate", "profile_tvd"] {
            assert!(run[key].as_f64().unwrap().is_finite());
        }
        assert!(run["tm_max_dev"]["working"].as_f64().unwrap().is_finite());
    }
    assert!(read(dir.path(), "r.profile.csv").starts_with("hour,recorded,markov,agent\n"));

    ok(
        dir.path(),
        &[
            "simulate",
            "--model",
            m,
            "--days",
            "30",
            "--out",
            "short.csv",
        ],
    );
    let out = occusim(
        dir.path(),
        &[
            "compare",
            "--recorded",
            "mk.csv",
            "--markov",
            "short.csv",
            "--out",
            "r2.json",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn rerun_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(shipped("reference_model.json"), dir.path().join("m.json")).unwrap();
    ok(
        dir.path(),
        &["simulate", "--model", "m.json", "--out", "a.csv"],
    );
    ok(dir.path(), &["rerun", "a.csv.manifest.json"]);

    let mut manifest: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "a.csv.manifest.json")).unwrap();
    manifest["outputs"][0]["sha256"] = "00".repeat(32).into();
    std::fs::write(dir.path().join("t.manifest.json"), manifest.to_string()).unwrap();
    let out = occusim(dir.path(), &["rerun", "t.manifest.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("differs"), "{}", stderr(&out));

    let model = read(dir.path(), "m.json")
        .replacen("0.6", "0.5", 1)
        .replacen("0.25", "0.35", 1);
    std::fs::write(dir.path().join("m.json"), model).unwrap();
    let out = occusim(dir.path(), &["rerun", "a.csv.manifest.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("changed"), "{}", stderr(&out));
}

#[test]
fn shipped_scenario_config_matches_defaults() {
    let text = std::fs::read_to_string(shipped("scenario_defaults.json")).unwrap();
    assert_eq!(
        occusim::ScenarioConfig::from_json(&text).unwrap(),
        occusim::ScenarioConfig::default()
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped("scenario_defaults.json");
    ok(
        dir.path(),
        &[
            "simulate", "--engine", "scenario", "--seed", "4", "--days", "7", "--out", "a.csv",
        ],
    );
    ok(
        dir.path(),
        &[
            "simulate",
            "--engine",
            "scenario",
            "--seed",
            "4",
            "--days",
            "7",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "b.csv",
        ],
    );
    assert_eq!(read(dir.path(), "a.csv"), read(dir.path(), "b.csv"));

    std::fs::write(dir.path().join("bad.json"), r#"{"p_stephane_busy": 2.0}"#).unwrap();
    let out = occusim(
        dir.path(),
        &[
            "simulate", "--engine", "scenario", "--config", "bad.json", "--out", "c.csv",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("p_stephane_busy"), "{}", stderr(&out));
}
