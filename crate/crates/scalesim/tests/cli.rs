use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use scalesim::io::{parse_demand, write_demand};
use scalesim_core::DemandSeries;
use tempfile::TempDir;

const START: i64 = 1_643_673_600;

fn scalesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scalesim")).args(args).output().expect("spawn scalesim")
}

fn ok(args: &[&str]) -> String {
    let out = scalesim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn generate(dir: &Path, seed: &str) {
    ok(&["generate", "--days", "1", "--spikes", "2", "--seed", seed, "--out", dir.to_str().unwrap()]);
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

/// Short windows keep the forecasting runs fast.
fn run_args<'a>(cmd: &'a str, trace: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        cmd, "--trace", trace, "--assume-vcpus", "4", "--fleet-size", "10", "--window", "240", "--refit-interval", "60",
        "--out", out,
    ]
}

#[test]
fn generate_is_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    generate(a.path(), "9");
    generate(b.path(), "9");
    let read = |d: &TempDir| fs::read(d.path().join("trace.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(csv_rows(&a.path().join("trace.csv")).len(), 1440);

    let c = TempDir::new().unwrap();
    generate(c.path(), "10");
    assert_ne!(read(&a), read(&c));
}

#[test]
fn missing_trace_fails() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = scalesim(&["simulate", "--strategy", "reactive", "--trace", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn constant_trace_forecasts_exactly() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("flat.csv");
    let mut text = String::from("timestamp,instance_type,utilization\n");
    for i in 0..400 {
        text.push_str(&format!("{},m5.large,40\n", START + 60 * i));
    }
    fs::write(&trace, text).unwrap();
    let out = dir.path().join("out");
    let args = run_args("forecast", trace.to_str().unwrap(), out.to_str().unwrap());
    let stdout = ok(&args);
    assert!(stdout.contains("MAPE 0.0000%"), "{stdout}");
    for row in csv_rows(&out.join("forecast.csv")) {
        assert_eq!(row[2].parse::<f64>().unwrap(), 16.0);
    }
}

#[test]
fn forecasts_target_the_horizon() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "3");
    let trace = dir.path().join("trace.csv");
    let out = dir.path().join("fc");
    ok(&run_args("forecast", trace.to_str().unwrap(), out.to_str().unwrap()));
    let rows = csv_rows(&out.join("forecast.csv"));
    assert_eq!(rows.len(), 1440 - 240 - 12 + 1);
    for (k, row) in rows.iter().enumerate() {
        let index: i64 = row[0].parse().unwrap();
        let ts: i64 = row[1].parse().unwrap();
        assert_eq!(index, 240 + 12 - 1 + k as i64);
        let window_end = START + 60 * (index - 12);
        assert_eq!(ts - window_end, 720);
    }
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert!(model["aicc"].is_number());
}

#[test]
fn reactive_decisions_respect_cooldown() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "5");
    let trace = dir.path().join("trace.csv");
    let out = dir.path().join("sim");
    let mut args = run_args("simulate", trace.to_str().unwrap(), out.to_str().unwrap());
    args.extend(["--strategy", "reactive"]);
    ok(&args);
    let rows = csv_rows(&out.join("records.csv"));
    let decisions: Vec<i64> =
        rows.iter().filter(|r| r[4] != "0").map(|r| r[0].parse::<i64>().unwrap()).collect();
    assert!(!decisions.is_empty());
    for w in decisions.windows(2) {
        assert!(w[1] - w[0] >= 360, "decisions at {} and {}", w[0], w[1]);
    }
    assert!(rows.iter().all(|r| r[5].is_empty()));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics.as_object().unwrap().len(), 6);
    assert!(metrics["mape"].is_null());
}

#[test]
fn compare_writes_both_policies() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "6");
    let trace = dir.path().join("trace.csv");
    let out = dir.path().join("cmp");
    ok(&run_args("compare", trace.to_str().unwrap(), out.to_str().unwrap()));
    for f in ["compare.csv", "series.csv", "forecast.csv", "model.json", "proactive/records.csv", "reactive/records.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let proactive = csv_rows(&out.join("proactive/records.csv"));
    let n = proactive.len();
    assert!(proactive[240..n - 12].iter().all(|r| !r[5].is_empty()));
    assert!(proactive[n - 12..].iter().all(|r| r[5].is_empty()));
    let compare = csv_rows(&out.join("compare.csv"));
    assert_eq!(compare.first().unwrap()[0], "adi");
    assert_eq!(compare.last().unwrap()[0], "adi_ratio");
}

#[test]
fn feedback_modes_differ_deterministically() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "8");
    let trace = dir.path().join("trace.csv");
    let run = |name: &str, feedback: &str| {
        let out = dir.path().join(name);
        let mut args = run_args("simulate", trace.to_str().unwrap(), out.to_str().unwrap());
        args[6] = "3";
        args.extend(["--strategy", "reactive", "--feedback", feedback]);
        ok(&args);
        fs::read(out.join("records.csv")).unwrap()
    };
    let sim = run("a", "simulated");
    assert_eq!(sim, run("b", "simulated"));
    let tr = run("c", "trace");
    assert_eq!(tr, run("d", "trace"));
    assert_ne!(sim, tr);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn demand_csv_round_trips(values in prop::collection::vec(0.0f64..1e6, 1..200), start in 0i64..2_000_000_000) {
        let series = DemandSeries::new(start, 60, values).unwrap();
        let mut buf = Vec::new();
        write_demand(&series, &mut buf).unwrap();
        let back = parse_demand(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            series.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(back.timestamp(0), start);
    }
}
