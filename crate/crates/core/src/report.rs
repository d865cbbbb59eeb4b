//! Experiment orchestration and artifact emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::blender::BlenderModel;
use crate::conditions::verify_kan_conditions;
use crate::config::ExperimentConfig;
use crate::construction::build;
use crate::ergodic::{
    center_lyapunov, classify_basins, flip_certificate, intermingled_test, manifold_coverage,
    mixing_diagnostic, push_u_disk, standard_region_pairs, BasinGrid, CoverageGrid, CoverageObject,
    IntermingleReport, Label, Region3,
};
use crate::error::{Error, Result};
use crate::kan::KanMap;
use crate::perturb::{break_torus, su_torus_status, Torus, TorusDiagnostic, TorusStatus};
use crate::ppm::{encode_ppm, Palette};
use crate::rng::CounterRng;
use crate::torus::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Verify,
    Blender,
    Basin,
    Lyapunov,
    Gibbs,
    Coverage,
    Mixing,
    Perturb,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Verify,
        Experiment::Blender,
        Experiment::Basin,
        Experiment::Lyapunov,
        Experiment::Gibbs,
        Experiment::Coverage,
        Experiment::Mixing,
        Experiment::Perturb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Blender => "blender",
            Experiment::Basin => "basin",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Gibbs => "gibbs",
            Experiment::Coverage => "coverage",
            Experiment::Mixing => "mixing",
            Experiment::Perturb => "perturb",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: Experiment,
    pub version: String,
    /// SHA-256 of the resolved configuration without thread count and output directory.
    pub config_hash: String,
    pub config: String,
    pub outputs: Vec<OutputFile>,
    /// SHA-256 over the output names and hashes; excludes timings.
    pub payload_hash: String,
    pub timings: BTreeMap<String, f64>,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

/// In-memory result of one experiment before it is written out.
#[derive(Debug, Default)]
struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
    criteria: Vec<CriterionResult>,
    timings: BTreeMap<String, f64>,
}

impl Artifacts {
    fn json(&mut self, name: &str, v: &Value) {
        let mut s = serde_json::to_string_pretty(v).expect("json value");
        s.push('\n');
        self.files.insert(name.to_string(), s.into_bytes());
    }

    fn csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) {
        let mut s = String::from(header);
        s.push('\n');
        for r in rows {
            s.push_str(&r);
            s.push('\n');
        }
        self.files.insert(name.to_string(), s.into_bytes());
    }

    fn criterion(&mut self, name: &str, pass: bool, detail: String) {
        self.criteria.push(CriterionResult {
            name: name.to_string(),
            pass,
            detail,
        });
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(name.to_string(), start.elapsed().as_secs_f64());
        out
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.threads = None;
    c.out = Default::default();
    hex_sha256(c.to_toml().as_bytes())
}

/// Runs `experiment` on a pool of `config.threads` workers (the rayon
/// default when unset), writes its artifacts and `manifest.json` into
/// `config.out` and returns the manifest.
pub fn run(config: &ExperimentConfig, experiment: Experiment) -> Result<RunManifest> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Range(format!("threads ({e})")))?;
    let start = Instant::now();
    let mut art = pool.install(|| execute(config, experiment))?;
    art.timings
        .insert("total".into(), start.elapsed().as_secs_f64());

    let dir = &config.out;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut outputs = Vec::new();
    let mut digest = String::new();
    for (name, bytes) in &art.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        let sha256 = hex_sha256(bytes);
        let _ = writeln!(digest, "{name} {sha256}");
        outputs.push(OutputFile {
            name: name.clone(),
            bytes: bytes.len(),
            sha256,
        });
    }
    let passed = art.criteria.iter().all(|c| c.pass);
    let manifest = RunManifest {
        experiment,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config),
        config: config.to_toml(),
        outputs,
        payload_hash: hex_sha256(digest.as_bytes()),
        timings: art.timings,
        criteria: art.criteria,
        passed,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let mut s = serde_json::to_string_pretty(m).expect("manifest");
    s.push('\n');
    std::fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

fn execute(config: &ExperimentConfig, experiment: Experiment) -> Result<Artifacts> {
    let mut art = Artifacts::default();
    let construction = art.time("build", || build(&config.construction()))?;
    let kan = &construction.kan;
    art.json(
        "construction.json",
        &json!({
            "t": config.t,
            "n0": config.n0,
            "mu": kan.params.mu,
            "nu": kan.params.nu,
            "placement": to_value(&construction.placement),
        }),
    );
    match experiment {
        Experiment::Verify => verify(config, kan, &mut art),
        Experiment::Blender => blender(config, kan, &mut art)?,
        Experiment::Basin => basin(config, kan, &mut art)?,
        Experiment::Lyapunov => lyapunov(config, kan, &mut art)?,
        Experiment::Gibbs => gibbs(config, kan, &mut art)?,
        Experiment::Coverage => coverage(config, kan, &mut art)?,
        Experiment::Mixing => mixing(config, kan, &mut art)?,
        Experiment::Perturb => perturb(config, kan, &mut art)?,
    }
    Ok(art)
}

fn verify(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) {
    let r = art.time("conditions", || {
        verify_kan_conditions(kan, config.verify.quadrature_n)
    });
    let pass = r.tori_invariant
        && r.fixed_point_structure
        && r.within_base_rates
        && r.within_flow_band
        && r.exponents_negative;
    art.criterion(
        "kan_conditions",
        pass,
        format!(
            "tori error {:.1e}, fixed points {}, derivative range [{:.5}, {:.5}], exponents [{:.5}, {:.5}] vs bound {:.5}",
            r.invariance_error, r.fixed_point_structure, r.derivative_range[0], r.derivative_range[1], r.torus_exponents[0], r.torus_exponents[1], r.exponent_bound
        ),
    );
    art.json("verify.json", &to_value(&r));
}

fn blender(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let realized = BlenderModel::from_kan(kan);
    // normalized center multiplier e^{2 n0 t}
    let model = BlenderModel::new(
        realized.lambda_pow,
        (2.0 * config.n0 as f64 * config.t).exp(),
    );
    let b = &config.blender;
    let geometry = model.certify_geometry();
    let cones = model.certify_cones(b.cone_size);
    art.criterion(
        "blender_geometry",
        geometry.all && cones,
        format!(
            "P err {:.1e}, O err {:.1e}, geometry {}, cones {}",
            geometry.saddle_p_error, geometry.saddle_o_error, geometry.all, cones
        ),
    );
    let dichotomy = art.time("dichotomy", || {
        model.verify_dichotomy(b.dichotomy_samples, b.dichotomy_max_iter, config.seed)
    });
    art.criterion(
        "strip_dichotomy",
        dichotomy.failures == 0 && dichotomy.bound_violations == 0,
        format!(
            "{} intervals, {} failures, {} over the step bound, min width ratio {:.7} (λ′ = {:.7})",
            dichotomy.samples,
            dichotomy.failures,
            dichotomy.bound_violations,
            dichotomy.min_growth_ratio,
            dichotomy.width_factor
        ),
    );
    let consistency = art.time("consistency", || {
        realized.consistency_with_kan(kan, b.consistency_samples, config.seed)
    })?;
    art.criterion(
        "chart_consistency",
        consistency <= 1e-6,
        format!(
            "sup error {consistency:.3e} over {} samples",
            b.consistency_samples
        ),
    );
    art.json(
        "blender.json",
        &json!({
            "model": to_value(&model),
            "realized": to_value(&realized),
            "branch_boxes": to_value(&model.branch_boxes()),
            "geometry": to_value(&geometry),
            "cones": cones,
            "dichotomy": to_value(&dichotomy),
            "consistency_error": consistency,
        }),
    );
    Ok(())
}

fn label_name(l: Label) -> &'static str {
    match l {
        Label::Torus0 => "torus0",
        Label::Torus1 => "torus1",
        Label::Undecided => "undecided",
    }
}

fn intermingle_pass(r: &IntermingleReport) -> bool {
    r.decided_rate >= 0.99 && r.torus0 > 0 && r.torus1 > 0 && r.fraction_with_both >= 0.95
}

fn intermingle_detail(r: &IntermingleReport) -> String {
    format!(
        "decided {:.4}, labels [{}, {}], coarse cells with both {}/{} ({:.3})",
        r.decided_rate, r.torus0, r.torus1, r.cells_with_both, r.cells, r.fraction_with_both
    )
}

/// Label table, one PPM per fiber level and the intermingle report.
fn emit_basins(
    prefix: &str,
    grid: &BasinGrid,
    report: &IntermingleReport,
    art: &mut Artifacts,
) -> Result<()> {
    let s = &grid.spec;
    let rows = (0..s.cells()).flat_map(|cell| {
        let (k, j, i) = (
            cell % s.ntheta,
            (cell / s.ntheta) % s.ny,
            cell / (s.ntheta * s.ny),
        );
        (0..s.samples_per_cell).map(move |m| {
            format!(
                "{i},{j},{k},{m},{}",
                label_name(grid.labels[cell * s.samples_per_cell + m])
            )
        })
    });
    let rows: Vec<String> = rows.collect();
    art.csv(
        &format!("{prefix}_labels.csv"),
        "ix,iy,itheta,sample,label",
        rows,
    );
    let palette = Palette::default();
    for k in 0..s.ntheta {
        let mut slice = Vec::with_capacity(s.nx * s.ny);
        for j in (0..s.ny).rev() {
            for i in 0..s.nx {
                slice.push(grid.cell_label((i * s.ny + j) * s.ntheta + k));
            }
        }
        let img = encode_ppm(s.nx, s.ny, &slice, &palette)?;
        art.files.insert(format!("{prefix}_theta{k:02}.ppm"), img);
    }
    art.json(&format!("{prefix}_intermingle.json"), &to_value(report));
    Ok(())
}

fn basin(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let spec = config.basin_spec();
    let grid = art.time("classify", || classify_basins(kan, &spec))?;
    let report = intermingled_test(&grid, config.basin.coarse, config.basin.min_fraction)?;
    art.criterion(
        "intermingled_basins",
        intermingle_pass(&report),
        intermingle_detail(&report),
    );
    emit_basins("basin", &grid, &report, art)
}

fn random_point(seed: u64, stream: u64, theta: f64) -> Point3 {
    let rng = CounterRng::new(seed).substream(stream);
    Point3::from_coords(rng.uniform_at(0), rng.uniform_at(1), theta)
}

fn lyapunov(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let q = art.time("quadrature", || {
        verify_kan_conditions(kan, config.lyapunov.quadrature_n)
    });
    let mut rows = Vec::new();
    let mut estimates = [0.0; 2];
    for (i, torus) in [Torus::Zero, Torus::One].into_iter().enumerate() {
        let x0 = random_point(config.seed, 0x17A + i as u64, torus.level());
        let est = art.time(&format!("orbit_{i}"), || {
            center_lyapunov(kan, &x0, config.lyapunov.n)
        })?;
        estimates[i] = est;
        let rel = (est - q.torus_exponents[i]).abs() / q.torus_exponents[i].abs();
        rows.push(format!(
            "{},{},{},{},{},{}",
            torus.level(),
            x0.base.x,
            x0.base.y,
            est,
            q.torus_exponents[i],
            rel
        ));
    }
    let rel0 = (estimates[0] - q.torus_exponents[0]).abs() / q.torus_exponents[0].abs();
    let pass = rel0 <= 0.05 && estimates.iter().all(|&e| e < 0.0);
    art.criterion(
        "torus_lyapunov",
        pass,
        format!(
            "orbit [{:.5}, {:.5}] vs quadrature [{:.5}, {:.5}], relative error on θ=0 {:.4}",
            estimates[0], estimates[1], q.torus_exponents[0], q.torus_exponents[1], rel0
        ),
    );
    art.csv(
        "lyapunov.csv",
        "theta,x,y,orbit_exponent,quadrature_exponent,relative_error",
        rows,
    );
    Ok(())
}

fn gibbs(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let g = &config.gibbs;
    let rng = CounterRng::new(config.seed).substream(0x61B);
    let seed = Point3::from_coords(
        rng.uniform_at(0),
        rng.uniform_at(1),
        rng.range_at(2, -1.0, 1.0),
    );
    let long = art.time("push_long", || {
        push_u_disk(kan, &seed, g.u_length, g.n, g.samples)
    })?;
    let short = art.time("push_short", || {
        push_u_disk(kan, &seed, g.u_length, g.n_short, g.samples)
    })?;
    let mass = long.mass_near_tori(g.tube);
    let mass_short = short.mass_near_tori(g.tube);
    let defect = long.invariance_defect(kan, g.bins)?;
    let defect_short = short.invariance_defect(kan, g.bins)?;
    let pass = mass >= 0.9 && defect <= 0.05 && defect < defect_short;
    art.criterion(
        "gibbs_u_state",
        pass,
        format!(
            "mass near tori {mass:.4} (n = {}), defect {defect:.4} vs {defect_short:.4} at n = {}",
            g.n, g.n_short
        ),
    );
    let bins = 64;
    let hist = long.histogram([1, 1, bins]);
    art.csv(
        "gibbs_theta.csv",
        "theta_lo,theta_hi,mass",
        hist.iter().enumerate().map(|(b, m)| {
            let lo = -1.0 + 2.0 * b as f64 / bins as f64;
            format!("{lo},{},{m}", lo + 2.0 / bins as f64)
        }),
    );
    art.json(
        "gibbs.json",
        &json!({
            "seed": [seed.base.x, seed.base.y, seed.theta],
            "n": g.n,
            "n_short": g.n_short,
            "mass_near_tori": mass,
            "mass_near_tori_short": mass_short,
            "invariance_defect": defect,
            "invariance_defect_short": defect_short,
            "total_weight": long.total_weight(),
        }),
    );
    Ok(())
}

fn coverage(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let c = &config.coverage;
    let grid = CoverageGrid { n: c.grid };
    let mut reports = Vec::new();
    for (name, object) in [
        ("fiber_p", CoverageObject::fiber_p(kan)),
        ("fiber_q", CoverageObject::fiber_q(kan)),
    ] {
        let r = art.time(name, || {
            manifold_coverage(kan, &object, c.depth, grid, c.budget)
        })?;
        reports.push((name, r));
    }
    let pass = reports.iter().all(|(_, r)| r.fraction >= 1.0);
    let detail = reports
        .iter()
        .map(|(n, r)| {
            format!(
                "{n} {:.4} at depth {} ({} points)",
                r.fraction,
                r.fraction_by_depth.len().saturating_sub(1),
                r.points_evaluated
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    art.criterion("manifold_density", pass, detail);
    let mut rows = Vec::new();
    for (name, r) in &reports {
        for (d, f) in r.fraction_by_depth.iter().enumerate() {
            rows.push(format!("{name},{d},{f}"));
        }
    }
    art.csv("coverage.csv", "object,depth,fraction", rows);
    let summary: BTreeMap<&str, Value> = reports.iter().map(|(n, r)| (*n, to_value(r))).collect();
    art.json("coverage.json", &to_value(&summary));
    Ok(())
}

fn hit_rows(table: &crate::ergodic::HitTable) -> Vec<String> {
    let mut rows = Vec::new();
    for (p, counts) in table.counts.iter().enumerate() {
        for (n, c) in counts.iter().enumerate() {
            rows.push(format!("{p},{},{c}", n + 1));
        }
    }
    rows
}

fn mixing(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let m = &config.mixing;
    let band = [0.05, 0.95];
    let flip = art.time("flip", || {
        flip_certificate(kan, band, m.flip_samples, config.seed)
    })?;
    let u = Region3::fiber_band(band[0], band[1]);
    let odd_max = if m.n_max % 2 == 0 {
        m.n_max - 1
    } else {
        m.n_max
    };
    let same = art.time("same_region", || {
        mixing_diagnostic(kan, &[(u, u)], odd_max, m.samples, config.seed)
    })?;
    let odd_hits: usize = (1..=odd_max)
        .step_by(2)
        .map(|n| same.counts[0][n - 1])
        .sum();
    art.criterion(
        "non_mixing",
        flip.all_flip && odd_hits == 0,
        format!(
            "{} of {} samples failed to flip, {odd_hits} odd-step returns up to n = {odd_max}",
            flip.escapes, flip.samples
        ),
    );
    let standard = art.time("standard_pairs", || {
        mixing_diagnostic(
            kan,
            &standard_region_pairs(),
            m.n_max,
            m.samples,
            config.seed,
        )
    })?;
    art.csv("mixing_same_region.csv", "pair,n,hits", hit_rows(&same));
    art.csv("mixing_standard.csv", "pair,n,hits", hit_rows(&standard));
    art.json(
        "mixing.json",
        &json!({
            "flip": to_value(&flip),
            "same_region_odd_hits": odd_hits,
            "standard_pairs": to_value(&standard.pairs),
        }),
    );
    Ok(())
}

fn status_name(s: &Result<TorusDiagnostic>) -> &'static str {
    match s {
        Ok(d) if d.status == TorusStatus::Continuation => "continuation",
        Ok(_) => "broken",
        Err(_) => "inconclusive",
    }
}

fn status_value(s: &Result<TorusDiagnostic>) -> Value {
    match s {
        Ok(d) => to_value(d),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn perturb(config: &ExperimentConfig, kan: &KanMap, art: &mut Artifacts) -> Result<()> {
    let p = &config.perturb;
    let which = p.torus;
    let kept = which.other();
    let g = break_torus(kan, p.eta, which)?;
    let zero = break_torus(kan, 0.0, which)?;
    let status = |m: &dyn Fn(Torus) -> Result<TorusDiagnostic>| [m(Torus::Zero), m(Torus::One)];
    let perturbed = art.time("status", || {
        status(&|t| su_torus_status(&g, t, p.depth, p.tol))
    });
    let unperturbed = art.time("status_zero", || {
        status(&|t| su_torus_status(&zero, t, p.depth, p.tol))
    });
    let idx = |t: Torus| if t == Torus::Zero { 0 } else { 1 };
    let broken_ok = status_name(&perturbed[idx(which)]) == "broken"
        && status_name(&perturbed[idx(kept)]) == "continuation";
    let zero_ok = unperturbed.iter().all(|s| status_name(s) == "continuation");
    art.criterion(
        "perturbation_status",
        broken_ok && zero_ok,
        format!(
            "η = {}: [{}, {}]; η = 0: [{}, {}]",
            p.eta,
            status_name(&perturbed[0]),
            status_name(&perturbed[1]),
            status_name(&unperturbed[0]),
            status_name(&unperturbed[1])
        ),
    );

    let spec = config.basin_spec();
    let grid = art.time("classify", || classify_basins(&g, &spec))?;
    let [c0, c1, _] = grid.counts();
    let decided = c0 + c1;
    let kept_count = if kept == Torus::Zero { c0 } else { c1 };
    let kept_fraction = if decided == 0 {
        0.0
    } else {
        kept_count as f64 / decided as f64
    };
    art.criterion(
        "perturbation_basins",
        kept_fraction >= 0.99,
        format!("{kept_fraction:.4} of {decided} decided samples go to the surviving torus"),
    );
    let report = intermingled_test(&grid, config.basin.coarse, config.basin.min_fraction)?;
    emit_basins("perturbed", &grid, &report, art)?;

    let m = &config.mixing;
    let table = art.time("mixing", || {
        mixing_diagnostic(
            &g,
            &standard_region_pairs(),
            m.n_max,
            m.samples,
            config.seed,
        )
    })?;
    let lo = 16.min(m.n_max);
    let missing: Vec<String> = (0..table.pairs.len())
        .filter_map(|pair| {
            let miss: Vec<usize> = (lo..=m.n_max).filter(|&n| !table.hit(pair, n)).collect();
            (!miss.is_empty()).then(|| format!("pair {pair} misses {} steps", miss.len()))
        })
        .collect();
    art.criterion(
        "perturbation_mixing",
        missing.is_empty() && m.n_max >= 64,
        if missing.is_empty() {
            format!("all pairs hit for {lo} ≤ n ≤ {}", m.n_max)
        } else {
            missing.join("; ")
        },
    );
    art.csv("perturbed_mixing.csv", "pair,n,hits", hit_rows(&table));

    let zero_grid = art.time("classify_zero", || classify_basins(&zero, &spec))?;
    let zero_report =
        intermingled_test(&zero_grid, config.basin.coarse, config.basin.min_fraction)?;
    art.criterion(
        "zero_perturbation_basins",
        intermingle_pass(&zero_report),
        intermingle_detail(&zero_report),
    );
    art.json("zero_intermingle.json", &to_value(&zero_report));

    art.json(
        "perturb.json",
        &json!({
            "eta": p.eta,
            "torus": to_value(&which),
            "ball_center": [g.ball_center.x, g.ball_center.y],
            "ball_radius": g.ball_radius,
            "status": [status_value(&perturbed[0]), status_value(&perturbed[1])],
            "status_zero": [status_value(&unperturbed[0]), status_value(&unperturbed[1])],
            "basin_counts": [c0, c1, grid.counts()[2]],
            "zero_basin_counts": zero_grid.counts(),
        }),
    );
    Ok(())
}
