//! Density of the unstable set of the fiber over `p` and the stable set of the fiber over `q`.

use kan3::construction::default_map;
use kan3::ergodic::{manifold_coverage, CoverageGrid, CoverageObject};

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    let grid = CoverageGrid { n: [16, 16, 8] };
    for (name, obj) in [
        ("forward from fiber p", CoverageObject::fiber_p(&k)),
        ("backward from fiber q", CoverageObject::fiber_q(&k)),
        ("unstable disk at P", CoverageObject::u_disk_at_p(&k)),
    ] {
        let r = manifold_coverage(&k, &obj, 12, grid, 10_000_000)?;
        let by_depth: Vec<String> = r
            .fraction_by_depth
            .iter()
            .map(|f| format!("{f:.3}"))
            .collect();
        println!(
            "{name}: {} ({} points)",
            by_depth.join(" "),
            r.points_evaluated
        );
    }
    Ok(())
}
