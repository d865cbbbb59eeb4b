//! The acceptance suite: every criterion runs at its stated size and
//! tolerance through the same report layer as the command-line tool, and
//! prints one line.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use kan3::config::ExperimentConfig;
use kan3::report::{run, CriterionResult, Experiment, RunManifest};

type Key = (Experiment, usize, u64);

struct Run {
    _dir: tempfile::TempDir,
    manifest: RunManifest,
}

/// Default-config runs, memoized so the determinism check reuses them.
fn manifest(experiment: Experiment, threads: usize, t: f64) -> Arc<Run> {
    static RUNS: OnceLock<Mutex<HashMap<Key, Arc<Run>>>> = OnceLock::new();
    let runs = RUNS.get_or_init(Default::default);
    let mut map = runs.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((experiment, threads, t.to_bits()))
        .or_insert_with(|| {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = ExperimentConfig::default();
            cfg.t = t;
            cfg.threads = Some(threads);
            cfg.out = dir.path().to_path_buf();
            let manifest = run(&cfg, experiment).unwrap();
            Arc::new(Run {
                _dir: dir,
                manifest,
            })
        })
        .clone()
}

fn find<'a>(m: &'a RunManifest, name: &str) -> &'a CriterionResult {
    m.criteria.iter().find(|c| c.name == name).unwrap()
}

fn report(n: usize, pass: bool, detail: &str) {
    println!(
        "criterion {n:2} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_01_kan_conditions() {
    let mut pass = true;
    let mut detail = Vec::new();
    for t in [0.05, 0.1] {
        let r = manifest(Experiment::Verify, 1, t);
        let c = find(&r.manifest, "kan_conditions");
        let secs = r.manifest.timings["conditions"];
        pass &= c.pass && secs < 60.0;
        detail.push(format!("t = {t}: {} ({secs:.1} s)", c.detail));
    }
    report(1, pass, &detail.join("; "));
}

#[test]
fn criterion_02_blender_geometry() {
    let r = manifest(Experiment::Blender, 1, 0.1);
    let c = find(&r.manifest, "blender_geometry");
    report(2, c.pass, &c.detail);
}

#[test]
fn criterion_03_strip_dichotomy() {
    let r = manifest(Experiment::Blender, 1, 0.1);
    let c = find(&r.manifest, "strip_dichotomy");
    let secs = r.manifest.timings["dichotomy"];
    report(
        3,
        c.pass && secs < 10.0,
        &format!("{} ({secs:.2} s)", c.detail),
    );
}

#[test]
fn criterion_04_chart_consistency() {
    let r = manifest(Experiment::Blender, 1, 0.1);
    let c = find(&r.manifest, "chart_consistency");
    report(4, c.pass, &c.detail);
}

#[test]
fn criterion_05_non_mixing() {
    let r = manifest(Experiment::Mixing, 1, 0.1);
    let c = find(&r.manifest, "non_mixing");
    report(5, c.pass, &c.detail);
}

#[test]
fn criterion_06_intermingled_basins() {
    let r = manifest(Experiment::Basin, 1, 0.1);
    let c = find(&r.manifest, "intermingled_basins");
    let secs = r.manifest.timings["classify"];
    report(
        6,
        c.pass && secs < 600.0,
        &format!("{} ({secs:.0} s)", c.detail),
    );
}

#[test]
fn criterion_07_torus_lyapunov() {
    let r = manifest(Experiment::Lyapunov, 1, 0.1);
    let c = find(&r.manifest, "torus_lyapunov");
    report(7, c.pass, &c.detail);
}

#[test]
fn criterion_08_gibbs_u_state() {
    let r = manifest(Experiment::Gibbs, 1, 0.1);
    let c = find(&r.manifest, "gibbs_u_state");
    report(8, c.pass, &c.detail);
}

#[test]
fn criterion_09_perturbation_dichotomy() {
    let r = manifest(Experiment::Perturb, 1, 0.1);
    let parts: Vec<&CriterionResult> = r.manifest.criteria.iter().collect();
    let pass = parts.iter().all(|c| c.pass);
    let detail: Vec<String> = parts
        .iter()
        .map(|c| {
            format!(
                "{} {} ({})",
                c.name,
                if c.pass { "ok" } else { "failed" },
                c.detail
            )
        })
        .collect();
    report(9, pass, &detail.join("; "));
}

#[test]
fn criterion_10_manifold_density() {
    let r = manifest(Experiment::Coverage, 1, 0.1);
    let c = find(&r.manifest, "manifold_density");
    report(10, c.pass, &c.detail);
}

#[test]
fn criterion_11_determinism_across_threads() {
    let mut pass = true;
    let mut detail = Vec::new();
    for e in [Experiment::Blender, Experiment::Basin, Experiment::Perturb] {
        let hashes: Vec<String> = [1, 4, 8]
            .into_iter()
            .map(|n| manifest(e, n, 0.1).manifest.payload_hash.clone())
            .collect();
        let same = hashes.iter().all(|h| *h == hashes[0]);
        pass &= same;
        detail.push(format!(
            "{} {}",
            e.name(),
            if same { &hashes[0][..12] } else { "differs" }
        ));
    }
    report(11, pass, &detail.join(", "));
}
