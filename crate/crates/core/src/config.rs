//! Experiment configuration: a TOML file with documented defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::construction::ConstructionParams;
use crate::ergodic::BasinSpec;
use crate::error::{Error, Result};
use crate::layout::LayoutParams;
use crate::perturb::Torus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_margin: Option<f64>,
    pub chart_box_half: f64,
    pub tube_half_height: f64,
    pub quadrature: usize,
}

impl Default for LayoutOverrides {
    fn default() -> Self {
        let p = LayoutParams::new(0.05);
        Self {
            ball_radius: None,
            inner_margin: None,
            outer_margin: None,
            chart_box_half: p.chart_box_half,
            tube_half_height: p.tube_half_height,
            quadrature: p.quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub quadrature_n: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { quadrature_n: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlenderConfig {
    pub cone_size: f64,
    pub dichotomy_samples: usize,
    pub dichotomy_max_iter: usize,
    pub consistency_samples: usize,
}

impl Default for BlenderConfig {
    fn default() -> Self {
        Self {
            cone_size: 0.1,
            dichotomy_samples: 10_000,
            dichotomy_max_iter: 200,
            consistency_samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasinConfig {
    pub nx: usize,
    pub ny: usize,
    pub ntheta: usize,
    pub samples_per_cell: usize,
    pub n: usize,
    pub tail: usize,
    pub delta: f64,
    pub coarse: [usize; 3],
    pub min_fraction: f64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        let s = BasinSpec::default();
        Self {
            nx: s.nx,
            ny: s.ny,
            ntheta: s.ntheta,
            samples_per_cell: s.samples_per_cell,
            n: s.n,
            tail: s.tail,
            delta: s.delta,
            coarse: [8, 8, 4],
            min_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovConfig {
    pub n: usize,
    pub quadrature_n: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            n: 1_000_000,
            quadrature_n: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsConfig {
    pub n: usize,
    pub n_short: usize,
    pub samples: usize,
    pub u_length: f64,
    pub tube: f64,
    pub bins: [usize; 3],
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            n_short: 200,
            samples: 500,
            u_length: 0.05,
            tube: 0.05,
            bins: [8, 8, 16],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageConfig {
    pub depth: usize,
    pub budget: u64,
    pub grid: [usize; 3],
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            depth: 12,
            budget: 10_000_000,
            grid: [16, 16, 8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixingConfig {
    pub n_max: usize,
    pub samples: usize,
    pub flip_samples: usize,
}

impl Default for MixingConfig {
    fn default() -> Self {
        Self {
            n_max: 64,
            samples: 2000,
            flip_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbConfig {
    pub eta: f64,
    pub torus: Torus,
    pub depth: usize,
    pub tol: f64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            eta: 0.02,
            torus: Torus::Zero,
            depth: 20,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    pub matrix: [[i64; 2]; 2],
    pub t: f64,
    pub n0: u32,
    pub n_max: u32,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub layout: LayoutOverrides,
    pub verify: VerifyConfig,
    pub blender: BlenderConfig,
    pub basin: BasinConfig,
    pub lyapunov: LyapunovConfig,
    pub gibbs: GibbsConfig,
    pub coverage: CoverageConfig,
    pub mixing: MixingConfig,
    pub perturb: PerturbConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let c = ConstructionParams::default();
        Self {
            experiment: None,
            matrix: c.matrix,
            t: c.t,
            n0: c.n0,
            n_max: c.n_max,
            epsilon: c.layout.epsilon,
            theta0: None,
            seed: 0,
            threads: None,
            out: PathBuf::from("kan3-out"),
            layout: LayoutOverrides::default(),
            verify: VerifyConfig::default(),
            blender: BlenderConfig::default(),
            basin: BasinConfig::default(),
            lyapunov: LyapunovConfig::default(),
            gibbs: GibbsConfig::default(),
            coverage: CoverageConfig::default(),
            mixing: MixingConfig::default(),
            perturb: PerturbConfig::default(),
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn check(ok: bool, name: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Range(name.into()))
    }
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            if let Some(rest) = msg.strip_prefix("unknown field `") {
                return Error::UnknownKey(rest.split('`').next().unwrap_or_default().to_string());
            }
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            Error::Parse {
                line,
                column,
                message: msg,
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        // TOML integers are signed 64-bit
        check(self.seed <= i64::MAX as u64, "seed")?;
        check(self.t.is_finite() && self.t >= 0.0 && self.t <= 1.0, "t")?;
        check(self.epsilon > 0.0 && self.epsilon < 0.1, "epsilon")?;
        check(self.n0 >= 1 && self.n0 <= 12, "n0")?;
        check(self.n_max >= self.n0 && self.n_max <= 12, "n_max")?;
        check(self.theta0.map_or(true, |v| v > 0.0 && v < 1.0), "theta0")?;
        check(self.threads.map_or(true, |n| n >= 1), "threads")?;
        check(self.layout.quadrature >= 16, "layout.quadrature")?;
        check(self.layout.chart_box_half > 2.0, "layout.chart_box_half")?;
        check(
            self.layout.tube_half_height > 2.0,
            "layout.tube_half_height",
        )?;
        for (v, name) in [
            (self.layout.ball_radius, "layout.ball_radius"),
            (self.layout.inner_margin, "layout.inner_margin"),
            (self.layout.outer_margin, "layout.outer_margin"),
        ] {
            check(v.map_or(true, |x| x > 0.0 && x < 0.5), name)?;
        }
        check(self.verify.quadrature_n >= 64, "verify.quadrature_n")?;
        check(self.blender.cone_size > 0.0, "blender.cone_size")?;
        check(
            self.blender.dichotomy_samples > 0,
            "blender.dichotomy_samples",
        )?;
        check(
            self.blender.dichotomy_max_iter > 0,
            "blender.dichotomy_max_iter",
        )?;
        let b = &self.basin;
        check(b.nx > 0 && b.ny > 0 && b.ntheta > 0, "basin grid")?;
        check(b.tail > 0 && b.tail <= b.n, "basin.tail")?;
        check(b.delta > 0.0 && b.delta < 0.25, "basin.delta")?;
        check(
            b.coarse.iter().all(|&c| c > 0)
                && b.coarse[0] <= b.nx
                && b.coarse[1] <= b.ny
                && b.coarse[2] <= b.ntheta,
            "basin.coarse",
        )?;
        check(self.lyapunov.n > 0, "lyapunov.n")?;
        check(
            self.gibbs.n > 0 && self.gibbs.n_short > 0 && self.gibbs.samples > 0,
            "gibbs counts",
        )?;
        check(self.gibbs.u_length > 0.0, "gibbs.u_length")?;
        check(self.coverage.grid.iter().all(|&c| c > 0), "coverage.grid")?;
        check(
            self.mixing.n_max > 0 && self.mixing.samples > 0,
            "mixing counts",
        )?;
        check(
            self.perturb.eta >= 0.0 && self.perturb.eta < 0.5 * self.epsilon,
            "perturb.eta",
        )?;
        check(self.perturb.depth > 0, "perturb.depth")?;
        check(self.perturb.tol > 0.0, "perturb.tol")?;
        Ok(())
    }

    pub fn construction(&self) -> ConstructionParams {
        ConstructionParams {
            matrix: self.matrix,
            t: self.t,
            n0: self.n0,
            n_max: self.n_max,
            layout: LayoutParams {
                epsilon: self.epsilon,
                ball_radius: self.layout.ball_radius,
                inner_margin: self.layout.inner_margin,
                outer_margin: self.layout.outer_margin,
                chart_box_half: self.layout.chart_box_half,
                tube_half_height: self.layout.tube_half_height,
                quadrature: self.layout.quadrature,
            },
            theta0: self.theta0,
        }
    }

    pub fn basin_spec(&self) -> BasinSpec {
        let b = &self.basin;
        BasinSpec {
            nx: b.nx,
            ny: b.ny,
            ntheta: b.ntheta,
            samples_per_cell: b.samples_per_cell,
            n: b.n,
            tail: b.tail,
            delta: b.delta,
            seed: self.seed,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::parse_str(&text)
}
