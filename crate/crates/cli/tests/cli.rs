use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn exindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn dax() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/dax_1991_1998.csv")
        .display()
        .to_string()
}

#[test]
fn mm_check_reports_witness() {
    let out = exindex(&["mm-check", "--signature", "2/6,1/6,3/6", "--k", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("2,false,1,0,"), "{row}");
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate", "--model", "MAR", "--param", "phi=0.5", "-n", "50", "--seed", "9",
    ];
    let a = stdout(&exindex(&args));
    let b = stdout(&exindex(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 51);
    assert_eq!(a.lines().next(), Some("x"));
}

#[test]
fn simulate_estimate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("x.csv");
    let s = series.to_str().unwrap();
    let sim = exindex(&[
        "simulate",
        "--model",
        "MM",
        "--signature",
        "2/6,1/6,3/6",
        "-n",
        "5000",
        "--seed",
        "3",
        "--out",
        s,
    ]);
    assert!(sim.status.success());
    let out = exindex(&[
        "estimate",
        "--input",
        s,
        "--estimator",
        "FDIR,FIND_UPCROSS",
        "--k",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let values: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(values.len(), 2);
    assert_eq!(values[0], values[1]);

    let cycles = stdout(&exindex(&["cycles", "--input", s, "--k", "3"]));
    assert_eq!(cycles.lines().count(), 1 + 2500);
}

#[test]
fn ingest_and_report() {
    let out = exindex(&["ingest", "--input", &dax()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1 + 1786);

    let out = exindex(&["report", "--input", &dax(), "--prices", "--format", "table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for id in ["RUNS", "FDIR", "FIND_INTERVALS", "FINDTDC", "FFSTAR"] {
        assert!(text.contains(id), "{id} missing");
    }
}

#[test]
fn diagnose_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("x.csv");
    let s = series.to_str().unwrap();
    exindex(&[
        "simulate", "--model", "MAR", "--param", "phi=0.5", "-n", "4000", "--out", s,
    ]);
    let traj = stdout(&exindex(&[
        "diagnose", "--input", s, "--k", "3", "--points", "4",
    ]));
    assert!(traj.starts_with("m,k,tau,s,r,statistic,value\n"));
    assert!(traj.lines().count() >= 2);
    let sel = stdout(&exindex(&["diagnose", "--input", s, "--select", "4"]));
    assert!(sel.starts_with("k,d_k,p_k,backward_gap,forward_gap,recommended\n"));
    assert_eq!(sel.lines().count(), 5);
}

#[test]
fn study_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    fs::write(
        &cfg,
        r#"{
            "model": {"model": "MM", "signature": [
                {"l": 1, "j": 0, "alpha": "2/6"},
                {"l": 1, "j": 1, "alpha": "1/6"},
                {"l": 1, "j": 2, "alpha": "3/6"}
            ]},
            "n": 500, "replicates": 8, "k": 3,
            "quantiles": [0.95],
            "estimators": ["FDIR", "RUNS"],
            "master_seed": 4
        }"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let seq = exindex(&["study", "--config", c, "--sequential"]);
    let par = exindex(&["study", "--config", c]);
    assert!(
        seq.status.success(),
        "{}",
        String::from_utf8_lossy(&seq.stderr)
    );
    assert_eq!(seq.stdout, par.stdout);
    assert_eq!(stdout(&seq).lines().count(), 3);

    let out_file = dir.path().join("t.md");
    let table = exindex(&[
        "study",
        "--config",
        c,
        "--format",
        "table",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(table.status.success());
    assert!(fs::read_to_string(&out_file)
        .unwrap()
        .contains("rmse q0.95"));
}

#[test]
fn exit_codes() {
    let cfg_err = exindex(&[
        "simulate", "--model", "MAR", "--param", "phi=1.5", "-n", "5",
    ]);
    assert_eq!(cfg_err.status.code(), Some(2));
    let study_no_cfg = exindex(&["study"]);
    assert_eq!(study_no_cfg.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "price\n100\n-1\n").unwrap();
    let data_err = exindex(&["ingest", "--input", bad.to_str().unwrap()]);
    assert_eq!(data_err.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&data_err.stderr).contains("row 3"));

    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "1\n1\n1\n1\n").unwrap();
    let degenerate = exindex(&[
        "estimate",
        "--input",
        flat.to_str().unwrap(),
        "--estimator",
        "FDIR",
    ]);
    assert_eq!(degenerate.status.code(), Some(4));
    let partial = exindex(&[
        "estimate",
        "--input",
        flat.to_str().unwrap(),
        "--estimator",
        "FDIR,FFSTAR",
    ]);
    assert_eq!(partial.status.code(), Some(4));

    let bad_format = exindex(&["mm-check", "--signature", "1", "--format", "xml"]);
    assert_eq!(bad_format.status.code(), Some(2));
}
