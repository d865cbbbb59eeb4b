//! Push-forward averages of a strong-unstable segment.

use kan3::construction::default_map;
use kan3::ergodic::push_u_disk;
use kan3::torus::Point3;

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    let seed = Point3::from_coords(0.37, 0.61, 0.4);
    for n in [50, 200, 1000] {
        let m = push_u_disk(&k, &seed, 0.05, n, 300)?;
        println!(
            "n = {n:4}: mass within 0.05 of the tori {:.4}, invariance defect {:.4}",
            m.mass_near_tori(0.05),
            m.invariance_defect(&k, [8, 8, 16])?
        );
    }
    Ok(())
}
