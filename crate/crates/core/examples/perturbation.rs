//! Breaking the `θ = 0` torus with a small fiber translation.

use kan3::construction::default_map;
use kan3::perturb::{break_torus, su_torus_status, Torus};

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    for eta in [0.0, 0.02] {
        let g = break_torus(&k, eta, Torus::Zero)?;
        println!(
            "η = {eta}: bump at ({:.4}, {:.4}) radius {:.4}",
            g.ball_center.x, g.ball_center.y, g.ball_radius
        );
        for t in [Torus::Zero, Torus::One] {
            match su_torus_status(&g, t, 20, 1e-6) {
                Ok(d) => println!("  {t:?}: {:?} (gap {:.2e})", d.status, d.max_gap),
                Err(e) => println!("  {t:?}: {e}"),
            }
        }
    }
    Ok(())
}
