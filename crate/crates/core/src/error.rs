use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i64),
    #[error("matrix is not hyperbolic (|trace| = {0} <= 2)")]
    NotHyperbolic(i64),
    #[error("unstable eigenvalue {0} is not larger than 3")]
    EigenvalueTooSmall(f64),
    #[error("automorphism has {0} fixed points, expected 4")]
    WrongFixedPointCount(u64),
    #[error("homoclinic search vector must be nonzero")]
    DegenerateVector,
    #[error("no admissible n0 <= {0} makes the chart boxes disjoint")]
    NoValidN0(u32),
    #[error("domain layout infeasible: {0}")]
    InfeasibleLayout(String),
    #[error("integrator failed to converge within the substep floor")]
    IntegratorDivergence,
    #[error("correction window escapes the chart: {0}")]
    WindowMismatch(String),
    #[error("fiber bisection did not converge")]
    BisectionFailure,
    #[error("no admissible base ball for the torus-breaking perturbation")]
    SupportCollision,
    #[error("torus status inconclusive (escape {escape:.3e} within 2x tol {tol:.3e})")]
    Inconclusive { escape: f64, tol: f64 },
    #[error("point is outside both blender branches")]
    OutsideBranches,
    #[error("invalid center interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("segment needs at least two samples")]
    TooFewSamples,
    #[error("sample point lies outside the chart window")]
    OutOfWindow,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("value out of range for `{0}`")]
    Range(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("empty image slice")]
    EmptySlice,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
