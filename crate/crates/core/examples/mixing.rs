//! Why the map is not topologically mixing, and the hit table of the standard region pairs.

use kan3::construction::default_map;
use kan3::ergodic::{flip_certificate, mixing_diagnostic, standard_region_pairs};

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    let flip = flip_certificate(&k, [0.05, 0.95], 20_000, 0)?;
    println!(
        "upper half to lower half in one step: {} ({} escapes)",
        flip.all_flip, flip.escapes
    );
    let table = mixing_diagnostic(&k, &standard_region_pairs(), 16, 500, 0)?;
    for (p, (u, v)) in table.pairs.iter().enumerate() {
        let row: String = (1..=16)
            .map(|n| if table.hit(p, n) { '#' } else { '.' })
            .collect();
        println!("θ {:?} x {:?} -> x {:?}: {row}", u.theta, u.x, v.x);
    }
    Ok(())
}
