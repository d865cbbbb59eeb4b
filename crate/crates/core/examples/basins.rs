//! Basins of the two boundary tori on a coarse grid, with one PPM slice.

use kan3::construction::default_map;
use kan3::ergodic::{classify_basins, intermingled_test, BasinSpec};
use kan3::ppm::{write_ppm, Palette};

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    let spec = BasinSpec {
        nx: 24,
        ny: 24,
        ntheta: 8,
        n: 2000,
        tail: 500,
        ..BasinSpec::default()
    };
    let grid = classify_basins(&k, &spec)?;
    println!("labels [torus0, torus1, undecided] = {:?}", grid.counts());
    let r = intermingled_test(&grid, [4, 4, 4], 0.01)?;
    println!(
        "coarse cells with both labels: {}/{}",
        r.cells_with_both, r.cells
    );

    let level = 3;
    let slice: Vec<_> = (0..spec.ny)
        .rev()
        .flat_map(|j| (0..spec.nx).map(move |i| (i * spec.ny + j) * spec.ntheta + level))
        .map(|c| grid.cell_label(c))
        .collect();
    let path = std::env::temp_dir().join("kan3_basin_slice.ppm");
    write_ppm(&path, spec.nx, spec.ny, &slice, &Palette::default())?;
    println!("slice written to {}", path.display());
    Ok(())
}
