//! The affine blender model: geometry, cones and the strip dichotomy.

use kan3::blender::{BlenderModel, CenterInterval, StripStep};
use kan3::construction::default_map;

fn main() -> kan3::Result<()> {
    let m = BlenderModel::reference();
    println!(
        "λ^6 = {:.3}, μ = {:.7}, λ′ = {:.7}",
        m.lambda_pow,
        m.mu,
        m.width_factor()
    );
    println!("{:#?}", m.certify_geometry());
    println!(
        "cones at 0.1: {}, at 10: {}",
        m.certify_cones(0.1),
        m.certify_cones(10.0)
    );

    let mut i = CenterInterval { a: 0.1, b: 0.1001 };
    let mut step = 0;
    loop {
        step += 1;
        match m.strip_step(&i)? {
            StripStep::Grown(next) => {
                println!("step {step}: [{:.6}, {:.6}]", next.a, next.b);
                i = next;
            }
            StripStep::HitsP => {
                println!(
                    "step {step}: crosses the stable manifold of P (bound {})",
                    m.hit_bound(1e-4)
                );
                break;
            }
        }
    }
    let d = m.verify_dichotomy(10_000, 200, 0);
    println!("{d:?}");

    let k = default_map(0.1)?;
    let realized = BlenderModel::from_kan(&k);
    println!(
        "realized μ = {:.4}, chart error {:.2e}",
        realized.mu,
        realized.consistency_with_kan(&k, 200, 1)?
    );
    Ok(())
}
