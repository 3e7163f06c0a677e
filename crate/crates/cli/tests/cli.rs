use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ksd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksd"))
        .args(args)
        .output()
        .expect("failed to launch ksd")
}

fn ok_json(args: &[&str]) -> Value {
    let out = ksd(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["generate", "--out", &path];
    args.extend_from_slice(extra);
    let out = ksd(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--kind", "packing", "--n", "500", "--dim", "5", "--seed", "1"];
    let a = generate(dir.path(), "a.csv", &args);
    let b = generate(dir.path(), "b.csv", &args);
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 501);
}

#[test]
fn ksd_report_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &["--kind", "iid_gaussian", "--n", "300", "--dim", "2", "--seed", "4"],
    );
    let report = ok_json(&[
        "ksd",
        "--target",
        "gaussian:d=2",
        "--kernel",
        "imq:c=1,beta=-0.5",
        "--sample",
        &s,
        "--norm",
        "l2",
    ]);
    assert_eq!(report["schema"], "ksd-report/1");
    assert_eq!(report["n"], 300);
    assert_eq!(report["d"], 2);
    let w: Vec<f64> = serde_json::from_value(report["w"].clone()).unwrap();
    let value = report["value"].as_f64().unwrap();
    assert!((value - w.iter().map(|x| x * x).sum::<f64>().sqrt()).abs() < 1e-15);

    // Same value from the library on the parsed file.
    let sample = ksd::io::read_sample(fs::File::open(&s).unwrap(), false).unwrap();
    let lib = ksd::ksd_value(
        &ksd::GaussianTarget::standard(2).unwrap(),
        &ksd::RadialKernel::imq_default(),
        &sample,
    )
    .unwrap();
    assert_eq!(value, lib);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &["--kind", "mixture_iid", "--n", "400", "--dim", "3", "--seed", "2"],
    );
    let run = |threads: &str| {
        let mut v = ok_json(&[
            "--threads",
            threads,
            "ksd",
            "--target",
            "mixture:d=3,delta=1.5",
            "--sample",
            &s,
            "--norm",
            "l1",
        ]);
        v.as_object_mut().unwrap().remove("seconds");
        v
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn weighted_samples_and_reweighting() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &["--kind", "iid_gaussian", "--n", "40", "--dim", "1", "--seed", "5"],
    );
    let weighted = dir.path().join("w.csv").to_string_lossy().into_owned();
    let result = ok_json(&[
        "reweight",
        "--target",
        "gaussian:d=1",
        "--sample",
        &s,
        "--weights-out",
        &weighted,
    ]);
    assert_eq!(result["schema"], "ksd-reweight/1");
    let objective = result["objective"].as_f64().unwrap();
    assert!(objective <= result["initial_objective"].as_f64().unwrap());

    let report = ok_json(&["ksd", "--target", "gaussian:d=1", "--sample", &weighted, "--weighted"]);
    let v = report["value"].as_f64().unwrap();
    assert!((v * v - objective).abs() <= 1e-10 * objective, "{v} vs {objective}");
}

#[test]
fn test_and_wass_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &["--kind", "single_component", "--n", "300", "--dim", "1", "--seed", "6"],
    );
    let t = ok_json(&[
        "test",
        "--target",
        "mixture:d=1,delta=1.5",
        "--sample",
        &s,
        "--B",
        "199",
        "--seed",
        "1",
    ]);
    assert_eq!(t["schema"], "ksd-test/1");
    assert_eq!(t["reject"], true);
    assert!((t["p_value"].as_f64().unwrap() - 0.005).abs() < 1e-12);

    let w = ok_json(&["wass", "--target", "mixture:d=1,delta=1.5", "--sample", &s]);
    assert!(w["value"].as_f64().unwrap() > 0.5);
    let out = ksd(&["wass", "--target", "gaussian:d=2", "--sample", &s]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gram_is_square_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &["--kind", "iid_gaussian", "--n", "7", "--dim", "2"],
    );
    let out = ksd(&[
        "gram",
        "--target",
        "gaussian:d=2",
        "--kernel",
        "matern32",
        "--sample",
        &s,
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 7);
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, rows[j][i]);
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(ksd(&["ksd", "--nope"]).status.code(), Some(1));
    assert_eq!(ksd(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ksd(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &["--kind", "iid_gaussian", "--n", "10", "--dim", "1"],
    );
    // dimension mismatch, bad spec, missing file: argument errors
    assert_eq!(
        ksd(&["ksd", "--target", "gaussian:d=3", "--sample", &s]).status.code(),
        Some(1)
    );
    assert_eq!(
        ksd(&["ksd", "--target", "cauchy:d=1", "--sample", &s]).status.code(),
        Some(1)
    );
    assert_eq!(
        ksd(&["ksd", "--target", "gaussian:d=1", "--sample", "/no/such.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ksd(&["test", "--target", "gaussian:d=1", "--sample", &s, "--B", "10"])
            .status
            .code(),
        Some(1)
    );

    // packing capacity and a diverging chain: resource / numerical failures
    let cap = ksd(&[
        "generate",
        "--kind",
        "packing",
        "--n",
        "5000",
        "--dim",
        "3",
        "--max-rejections",
        "5",
    ]);
    assert_eq!(cap.status.code(), Some(2));
    let div = ksd(&[
        "generate",
        "--kind",
        "ula_chain",
        "--n",
        "200",
        "--dim",
        "1",
        "--step",
        "5",
    ]);
    assert_eq!(div.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&div.stderr).contains("step size 5"));
}

#[test]
fn packing_warns_in_low_dimension() {
    let out = ksd(&["generate", "--kind", "packing", "--n", "20", "--dim", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn experiments_are_reproducible_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = ksd(&[
            "experiment",
            "fig2",
            "--dims",
            "3",
            "--ns",
            "30,60",
            "--seed",
            "9",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["ksd.csv", "manifest.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let manifest: Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "fig2");
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["outputs"][0], "ksd.csv");
    let csv = fs::read_to_string(a.join("ksd.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 2);
}

#[test]
fn json_spec_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("kernel.json");
    fs::write(&spec, r#"{"kind":"gaussian","h":"median"}"#).unwrap();
    let s = generate(
        dir.path(),
        "s.csv",
        &[
            "--spec",
            r#"{"kind":"mixture_iid","n":50,"dim":2,"delta":1.0,"seed":3}"#,
        ],
    );
    let report = ok_json(&[
        "ksd",
        "--target",
        r#"{"kind":"mixture","dim":2,"delta":1.0}"#,
        "--kernel",
        spec.to_str().unwrap(),
        "--sample",
        &s,
    ]);
    assert!(report["kernel"].as_str().unwrap().starts_with("gaussian"));
}
