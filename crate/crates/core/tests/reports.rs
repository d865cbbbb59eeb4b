//! Configuration files, artifacts, manifests and the command-line tool.

use std::process::Command;

use kan3::config::{parse_config, ExperimentConfig};
use kan3::ergodic::Label;
use kan3::ppm::{write_ppm, Palette};
use kan3::report::{run, Experiment};
use kan3::Error;

const SMALL_BASIN: &str = "t = 0.1\nseed = 5\n[basin]\nnx = 6\nny = 6\nntheta = 5\nn = 300\ntail = 100\ncoarse = [2, 2, 1]\n";

fn small(text: &str, dir: &std::path::Path, threads: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::parse_str(text).unwrap();
    c.out = dir.to_path_buf();
    c.threads = Some(threads);
    c
}

#[test]
fn config_file_errors_carry_positions_and_names() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "t = 0.1\n\n[gibbs]\nn = 10\nn = 11\n").unwrap();
    match parse_config(&path) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (5, 1)),
        other => panic!("{other:?}"),
    }
    std::fs::write(&path, "[mixing]\nn_max = 0\n").unwrap();
    assert!(matches!(parse_config(&path), Err(Error::Range(f)) if f == "mixing counts"));
    std::fs::write(&path, "[perturb]\ntorus = \"one\"\n").unwrap();
    assert_eq!(
        parse_config(&path).unwrap().perturb.torus,
        kan3::perturb::Torus::One
    );
    assert!(matches!(
        parse_config(&dir.path().join("missing.toml")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn ppm_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.ppm");
    write_ppm(
        &path,
        2,
        2,
        &[
            Label::Torus1,
            Label::Undecided,
            Label::Torus0,
            Label::Torus1,
        ],
        &Palette::default(),
    )
    .unwrap();
    let b = std::fs::read(&path).unwrap();
    assert_eq!(&b[..11], b"P6\n2 2\n255\n");
    assert_eq!(
        &b[11..],
        &[200, 60, 30, 128, 128, 128, 30, 90, 200, 200, 60, 30]
    );
}

#[test]
fn verify_report_contents() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("t = 0.1\n[verify]\nquadrature_n = 128\n", dir.path(), 1);
    let m = run(&cfg, Experiment::Verify).unwrap();
    assert!(m.passed);
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    for key in [
        "tori_invariant",
        "fixed_point_structure",
        "within_base_rates",
        "exponents_negative",
    ] {
        assert_eq!(v[key], serde_json::Value::Bool(true), "{key}");
    }
    let exps = v["torus_exponents"].as_array().unwrap();
    assert!(exps.iter().all(|x| x.as_f64().unwrap() < 0.0));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["payload_hash"].as_str().unwrap(), m.payload_hash);
}

#[test]
fn basin_run_is_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run(&small(SMALL_BASIN, a.path(), 1), Experiment::Basin).unwrap();
    let mb = run(&small(SMALL_BASIN, b.path(), 3), Experiment::Basin).unwrap();
    assert_eq!(ma.payload_hash, mb.payload_hash);
    assert_eq!(ma.config_hash, mb.config_hash);
    let names: Vec<&str> = ma.outputs.iter().map(|o| o.name.as_str()).collect();
    assert!(names.contains(&"basin_labels.csv"));
    assert!(names.contains(&"basin_intermingle.json"));
    assert_eq!(names.iter().filter(|n| n.ends_with(".ppm")).count(), 5);
    for o in &ma.outputs {
        assert_eq!(
            std::fs::read(a.path().join(&o.name)).unwrap(),
            std::fs::read(b.path().join(&o.name)).unwrap()
        );
    }
    let csv = std::fs::read_to_string(a.path().join("basin_labels.csv")).unwrap();
    assert!(csv.starts_with("ix,iy,itheta,sample,label\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 1 + 6 * 6 * 5);
}

fn kan3() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kan3"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kan3().arg("nonsense").status().unwrap();
    assert_eq!(out.code(), Some(2));
    let out = kan3().args(["verify", "--t", "-1"]).status().unwrap();
    assert_eq!(out.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "colour = 3\n").unwrap();
    let out = kan3()
        .args(["verify", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(out.code(), Some(2));

    let cfg = dir.path().join("ok.toml");
    std::fs::write(
        &cfg,
        "[blender]\ndichotomy_samples = 500\nconsistency_samples = 50\n",
    )
    .unwrap();
    let res = kan3()
        .args(["blender", "--seed", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("run"))
        .env("KAN3_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("PASS strip_dichotomy"));
    let manifest = std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap();
    assert!(manifest.contains("seed = 3"));
    assert!(manifest.contains("threads = 2"));
}

#[test]
fn failing_criterion_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    // a 1×1×1 grid cannot show both labels in one coarse cell
    std::fs::write(
        &cfg,
        "[basin]\nnx = 1\nny = 1\nntheta = 1\nn = 50\ntail = 10\ncoarse = [1, 1, 1]\n",
    )
    .unwrap();
    let out = kan3()
        .args(["basin", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(out.code(), Some(1));
}
