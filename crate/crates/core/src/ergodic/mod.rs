//! Measure-theoretic and topological diagnostics of skew products on 𝕋³.

pub mod basins;
pub mod birkhoff;
pub mod coverage;
pub mod gibbs;
pub mod mixing;

pub use basins::{
    classify_basins, intermingled_test, BasinGrid, BasinSpec, IntermingleReport, Label,
};
pub use birkhoff::{birkhoff, center_lyapunov, torus_distance};
pub use coverage::{manifold_coverage, CoverageGrid, CoverageObject, CoverageReport};
pub use gibbs::{push_u_disk, strong_unstable_slope, EmpiricalMeasure};
pub use mixing::{
    flip_certificate, mixing_diagnostic, standard_region_pairs, FlipCertificate, HitTable, Region3,
};

/// Sum by recursive halving, independent of how the slice was produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}
