//! Basin labels of the two torus measures on a jittered grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kan::SkewMap;
use crate::perturb::Torus;
use crate::rng::CounterRng;
use crate::torus::{theta_distance, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum Label {
    Undecided = 0,
    Torus0 = 1,
    Torus1 = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasinSpec {
    pub nx: usize,
    pub ny: usize,
    /// Levels over the whole fiber `[-1, 1)`.
    pub ntheta: usize,
    pub samples_per_cell: usize,
    pub n: usize,
    pub tail: usize,
    pub delta: f64,
    pub seed: u64,
}

impl Default for BasinSpec {
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            ntheta: 17,
            samples_per_cell: 1,
            n: 5000,
            tail: 1000,
            delta: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BasinGrid {
    pub spec: BasinSpec,
    /// Cell-major (`x`, then `y`, then `θ`), then sample.
    pub labels: Vec<Label>,
}

impl BasinSpec {
    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.ntheta
    }

    /// Jittered sample `s` of cell `(i, j, k)`.
    pub fn sample(&self, cell: usize, s: usize) -> Point3 {
        let k = cell % self.ntheta;
        let j = (cell / self.ntheta) % self.ny;
        let i = cell / (self.ntheta * self.ny);
        let rng = CounterRng::new(self.seed).substream(cell as u64);
        let o = 3 * s as u64;
        Point3::from_coords(
            (i as f64 + rng.uniform_at(o)) / self.nx as f64,
            (j as f64 + rng.uniform_at(o + 1)) / self.ny as f64,
            -1.0 + 2.0 * (k as f64 + rng.uniform_at(o + 2)) / self.ntheta as f64,
        )
    }
}

/// Tail averages of the fiber distance to each torus.
pub fn tail_distances<M: SkewMap + ?Sized>(
    map: &M,
    x0: &Point3,
    n: usize,
    tail: usize,
) -> Result<[f64; 2]> {
    let mut x = *x0;
    let mut acc = [0.0; 2];
    for i in 0..n {
        x = map.apply(&x)?;
        if i + tail >= n {
            acc[0] += theta_distance(x.theta, Torus::Zero.level());
            acc[1] += theta_distance(x.theta, Torus::One.level());
        }
    }
    Ok([acc[0] / tail as f64, acc[1] / tail as f64])
}

pub fn label_of(d: [f64; 2], delta: f64) -> Label {
    match (d[0] < delta, d[1] < delta) {
        (true, false) => Label::Torus0,
        (false, true) => Label::Torus1,
        _ => Label::Undecided,
    }
}

pub fn classify_basins<M: SkewMap + ?Sized>(map: &M, spec: &BasinSpec) -> Result<BasinGrid> {
    if !(spec.delta < 0.25) || spec.tail == 0 || spec.tail > spec.n {
        return Err(Error::Range("basin parameters".into()));
    }
    let per = spec.samples_per_cell.max(1);
    let labels: Result<Vec<Label>> = (0..spec.cells() * per)
        .into_par_iter()
        .map(|idx| {
            let x = spec.sample(idx / per, idx % per);
            Ok(label_of(
                tail_distances(map, &x, spec.n, spec.tail)?,
                spec.delta,
            ))
        })
        .collect();
    Ok(BasinGrid {
        spec: *spec,
        labels: labels?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntermingleReport {
    pub coarse: [usize; 3],
    pub min_fraction: f64,
    pub cells: usize,
    pub cells_with_both: usize,
    pub fraction_with_both: f64,
    pub torus0: usize,
    pub torus1: usize,
    pub undecided: usize,
    pub decided_rate: f64,
    /// `(torus0, torus1, undecided)` per coarse cell.
    pub per_cell: Vec<[usize; 3]>,
}

impl BasinGrid {
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for l in &self.labels {
            c[*l as usize] += 1;
        }
        [c[1], c[2], c[0]]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.labels.iter().map(|l| *l as u8).collect()
    }

    /// Label of the first sample of every fine cell.
    pub fn cell_label(&self, cell: usize) -> Label {
        self.labels[cell * self.spec.samples_per_cell.max(1)]
    }
}

/// Coarse cells (fine cells grouped proportionally per axis) that contain
/// both labels, each with at least `min_fraction` of the cell's samples.
pub fn intermingled_test(
    b: &BasinGrid,
    coarse: [usize; 3],
    min_fraction: f64,
) -> Result<IntermingleReport> {
    let s = &b.spec;
    if coarse.iter().any(|&c| c == 0)
        || coarse[0] > s.nx
        || coarse[1] > s.ny
        || coarse[2] > s.ntheta
    {
        return Err(Error::Range("coarse grid".into()));
    }
    let per = s.samples_per_cell.max(1);
    let mut cells = vec![[0usize; 3]; coarse[0] * coarse[1] * coarse[2]];
    for (idx, l) in b.labels.iter().enumerate() {
        let cell = idx / per;
        let k = cell % s.ntheta;
        let j = (cell / s.ntheta) % s.ny;
        let i = cell / (s.ntheta * s.ny);
        let c = ((i * coarse[0] / s.nx) * coarse[1] + j * coarse[1] / s.ny) * coarse[2]
            + k * coarse[2] / s.ntheta;
        let slot = match l {
            Label::Torus0 => 0,
            Label::Torus1 => 1,
            Label::Undecided => 2,
        };
        cells[c][slot] += 1;
    }
    let both = cells
        .iter()
        .filter(|c| {
            let tot = (c[0] + c[1] + c[2]) as f64;
            tot > 0.0
                && c[0] as f64 >= min_fraction * tot
                && c[1] as f64 >= min_fraction * tot
                && c[0] > 0
                && c[1] > 0
        })
        .count();
    let [t0, t1, u] = b.counts();
    Ok(IntermingleReport {
        coarse,
        min_fraction,
        cells: cells.len(),
        cells_with_both: both,
        fraction_with_both: both as f64 / cells.len() as f64,
        torus0: t0,
        torus1: t1,
        undecided: u,
        decided_rate: (t0 + t1) as f64 / b.labels.len() as f64,
        per_cell: cells,
    })
}
