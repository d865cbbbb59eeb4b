//! Center exponents on the two invariant tori: orbit averages against quadrature.

use kan3::conditions::verify_kan_conditions;
use kan3::construction::default_map;
use kan3::ergodic::center_lyapunov;
use kan3::torus::Point3;

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    let q = verify_kan_conditions(&k, 256).torus_exponents;
    for (i, theta) in [0.0, 1.0].into_iter().enumerate() {
        let x0 = Point3::from_coords(0.2718, 0.3141, theta);
        let est = center_lyapunov(&k, &x0, 200_000)?;
        println!("θ = {theta}: orbit {est:.5}, quadrature {:.5}", q[i]);
    }
    let mid = Point3::from_coords(0.2718, 0.3141, 0.5);
    println!("generic point: {:.5}", center_lyapunov(&k, &mid, 200_000)?);
    Ok(())
}
