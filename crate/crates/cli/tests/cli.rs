use std::collections::BTreeSet;
use std::process::Command;

use serde_json::Value;

use depbound::bounds::{hoeffding_bound, mcdiarmid_refined_bound};
use depbound::oracle::{exact_tail, generate};
use depbound_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["depbound"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Vec<Value>) {
    let mut full = vec!["--format", "json-lines"];
    full.extend_from_slice(args);
    let (code, out, err) = cli(&full);
    assert!(code == EXIT_OK || code == EXIT_INVALID || code == 3, "{args:?}: {code} {err}");
    (code, out.lines().map(|l| serde_json::from_str(l).unwrap()).collect())
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.to_string().parse().unwrap(),
        Value::String(s) => s.parse().unwrap(),
        other => panic!("not a number: {other}"),
    }
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn hoeffding_record_matches_library_bit_for_bit() {
    let (code, recs) = json(&["bound", "hoeffding", "--n", "100", "--p", "0.3", "--t", "40"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    let want = hoeffding_bound(100, 0.3, 40.0);
    assert_eq!(num(&r["log_bound"]).to_bits(), want.ln().unwrap().to_bits());
    assert_eq!(r["validity"], "valid");
    assert_eq!(r["provenance"], "closed-form");
    assert_eq!(r["parameters"]["n"], 100);
    assert!(r["runtime_ms"].is_number());
}

#[test]
fn threshold_below_mean_is_invalid_with_exit_2() {
    let (code, recs) = json(&["bound", "hoeffding", "--n", "100", "--p", "0.3", "--t", "20"]);
    assert_eq!(code, EXIT_INVALID);
    assert_eq!(recs[0]["validity"], "invalid");
    assert_eq!(recs[0]["reason"], "t <= np");
    assert!(recs[0]["bound"].is_null());
}

#[test]
fn sweep_gives_one_record_per_point_in_sorted_order() {
    let (code, recs) = json(&["bound", "mcdiarmid-refined", "--n", "20", "--p", "0.3", "--t", "0.4,0.25"]);
    assert_eq!(recs.len(), 2);
    let ts: Vec<f64> = recs.iter().map(|r| num(&r["parameters"]["t"])).collect();
    assert_eq!(ts, vec![0.25, 0.4]);
    for (r, t) in recs.iter().zip(ts) {
        let want = mcdiarmid_refined_bound(20, 0.3, t);
        assert_eq!(r["validity"] == "valid", want.is_valid());
        if let Some(ln) = want.ln() {
            assert_eq!(num(&r["log_bound"]).to_bits(), ln.to_bits());
        }
    }
    let any_invalid = recs.iter().any(|r| r["validity"] == "invalid");
    assert_eq!(code, if any_invalid { EXIT_INVALID } else { EXIT_OK });

    let (_, grid) = json(&["bound", "hoeffding", "--n", "10,20", "--p", "0.1,0.2", "--t", "8"]);
    let pts: Vec<(u64, f64)> =
        grid.iter().map(|r| (r["parameters"]["n"].as_u64().unwrap(), num(&r["parameters"]["p"]))).collect();
    assert_eq!(pts, vec![(10, 0.1), (10, 0.2), (20, 0.1), (20, 0.2)]);
}

#[test]
fn eps_and_t_describe_the_same_threshold() {
    let (_, a) = json(&["bound", "ik", "--n", "50", "--gamma", "0.2", "--t", "15"]);
    let (_, b) = json(&["bound", "ik", "--n", "50", "--gamma", "0.2", "--eps", "0.5"]);
    assert!((num(&a[0]["log_bound"]) - num(&b[0]["log_bound"])).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_64() {
    let cases: &[&[&str]] = &[
        &["bound", "chernoff", "--n", "10"],
        &["bound", "hoeffding", "--n", "10", "--p", "0.2"],
        &["bound", "hoeffding", "--n", "10", "--p", "0.2", "--t", "5", "--eps", "0.5"],
        &["bound", "hoeffding", "--n", "10", "--p", "0.2", "--t", "5", "--d", "2"],
        &["bound", "gnm-isolated", "--n", "10", "--m", "15", "--t", "2.5"],
        &["bound", "dependency-graph", "--n", "10", "--alpha", "0", "--t", "8"],
        &["verify", "fuzz"],
        &["verify", "lemmas", "--n-max", "9"],
        &["simulate", "gnp-isolated", "--n", "10", "--t", "1"],
        &["--format", "yaml", "verify", "identities"],
    ];
    for args in cases {
        let (code, out, err) = cli(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {out}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("simulate"));
}

#[test]
fn records_are_schema_stable_and_round_trip() {
    let (_, recs) = json(&["bound", "coupling", "--n", "30", "--p", "0.2", "--t", "5,12,20"]);
    assert_eq!(recs.len(), 3);
    let first = keys(&recs[0]);
    assert!(recs.iter().all(|r| keys(r) == first));
    assert_eq!(
        first,
        ["bound", "derived", "log_bound", "method", "notes", "parameters", "provenance", "reason", "runtime_ms", "validity"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    );
    for r in &recs {
        let again: Value = serde_json::from_str(&r.to_string()).unwrap();
        assert_eq!(&again, r);
        if let Some(ln) = r["log_bound"].as_number() {
            let text = ln.to_string();
            let x: f64 = text.parse().unwrap();
            // 17 significant digits identify the double
            assert_eq!(format!("{x:.16e}").parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}

#[test]
fn csv_is_rectangular_with_a_header() {
    let (code, out, _) = cli(&["--format", "csv", "bound", "hoeffding", "--n", "30", "--p", "0.2,0.5", "--t", "20"]);
    assert_eq!(code, EXIT_OK);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "method");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn linial_lower_and_symmetric_moments() {
    let dist = generate::product_bernoulli(&[0.3; 8]).unwrap();
    let s = depbound::oracle::symmetric_moments(&dist).unwrap();
    let exact = exact_tail(&dist, 5.0);
    let s5 = format!("{}", s[5]);
    let (_, lo) = json(&["bound", "linial-lower", "--n", "8", "--t", "5", "--s-value", &s5]);
    assert!(num(&lo[0]["bound"]) <= exact + 1e-12);
    let moments = (1..8).map(|k| format!("{k}:{}", s[k])).collect::<Vec<_>>().join(",");
    let (_, up) = json(&["bound", "linial-luria", "--n", "8", "--t", "5", "--moments", &moments]);
    assert_eq!(up[0]["provenance"], "grid-minimized");
    assert!(num(&up[0]["bound"]) >= exact - 1e-12);
}

#[test]
fn convex_function_reads_a_joint_law_file() {
    let dist = generate::block_parity(6, 3).unwrap();
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("block_parity.txt");
    std::fs::write(&path, dist.to_text()).unwrap();
    let p = path.to_str().unwrap();
    for family in ["exponential", "hinge"] {
        let (code, recs) = json(&["bound", "convex-function", "--dist", p, "--t", "5", "--family", family]);
        assert_eq!(code, EXIT_OK, "{family}");
        assert!(num(&recs[0]["bound"]) >= exact_tail(&dist, 5.0) - 1e-12);
    }
    let (code, _, _) = cli(&["bound", "convex-function", "--dist", "/nonexistent", "--t", "5"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn verify_examples_pass() {
    for args in [
        &["verify", "lemmas", "--n-max", "6"][..],
        &["verify", "soundness", "--n-max", "8", "--trials", "500", "--seed", "7"][..],
        &["verify", "identities"][..],
    ] {
        let (code, recs) = json(args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        assert!(!recs.is_empty());
        assert!(recs.iter().all(|r| r["status"] == "pass" && r["checks"].as_u64().unwrap() > 0), "{args:?}");
    }
}

#[test]
fn simulate_example_is_dominated() {
    let (code, recs) = json(&[
        "simulate", "gnp-isolated", "--n", "30", "--p", "0.1", "--t", "10", "--reps", "100000", "--seed", "1", "--bound",
        "auto",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(recs[0]["verdict"], "DOMINATED");
    assert_eq!(recs[0]["bound_method"], "gnp-isolated");
    assert!(num(&recs[0]["ci_high"]) <= num(&recs[0]["bound"]));

    let (_, recs) = json(&["simulate", "ustat-triangles", "--m", "6", "--p", "0.5", "--t", "5", "--reps", "10000"]);
    assert_eq!(recs[0]["replications"], 10000);
    assert!(recs[0]["verdict"].is_null());
    // E[triangles] = C(6,3)/8
    assert!((num(&recs[0]["sum_mean"]) - 2.5).abs() < 0.05);

    let (code, _, err) = cli(&["simulate", "gnm-isolated", "--n", "10", "--m", "15", "--t", "2", "--reps", "0"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("reps"));
}

#[test]
fn compare_flags_the_smallest_bound() {
    let (code, recs) = json(&[
        "compare", "--methods", "hoeffding,mcdiarmid-refined", "--n", "20", "--p", "0.3", "--t", "11,12,13,14,16,18",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(recs.len(), 6);
    for r in &recs {
        if let (Some(_), Some(_)) = (r["hoeffding"].as_number(), r["mcdiarmid-refined"].as_number()) {
            assert!(num(&r["mcdiarmid-refined"]) <= num(&r["hoeffding"]));
            assert_eq!(r["best"], "mcdiarmid-refined");
        }
    }
    let (_, recs) = json(&["compare", "--methods", "ik,linial-luria", "--n", "40", "--gamma", "0.25", "--t", "15,20,25"]);
    for r in &recs {
        assert!(num(&r["linial-luria"]) <= num(&r["ik"]));
    }
    let (code, _, _) = cli(&["compare", "--methods", "hoeffding", "--n", "20", "--p", "0.3", "--t", "12"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_depbound");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["bound", "hoeffding", "--n", "100", "--p", "0.3", "--t", "40"]), Some(0));
    assert_eq!(status(&["bound", "hoeffding", "--n", "100", "--p", "0.3", "--t", "20"]), Some(2));
    assert_eq!(status(&["bound", "nope"]), Some(64));
    let out = Command::new(bin).args(["--format", "json-lines", "verify", "sandwich", "--trials", "20"]).output().unwrap();
    let line: Value = serde_json::from_slice(out.stdout.split(|b| *b == b'\n').next().unwrap()).unwrap();
    assert_eq!(line["status"], "pass");
}
