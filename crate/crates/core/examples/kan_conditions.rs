//! Numerical check of the four structural conditions on the fiber maps.

use kan3::conditions::verify_kan_conditions;
use kan3::construction::default_map;

fn main() -> kan3::Result<()> {
    for t in [0.05, 0.1] {
        let k = default_map(t)?;
        let r = verify_kan_conditions(&k, 256);
        println!("t = {t}");
        println!(
            "  endpoint tori invariant: {} (max error {:.1e})",
            r.tori_invariant, r.invariance_error
        );
        println!(
            "  r-fiber multipliers {:?}, s-fiber multipliers {:?}",
            r.r_fiber.multipliers, r.s_fiber.multipliers
        );
        println!(
            "  derivative range [{:.4}, {:.4}] within {:?}: {}",
            r.derivative_range[0], r.derivative_range[1], r.base_rates, r.within_base_rates
        );
        println!(
            "  torus exponents {:?} below {:.4}: {}",
            r.torus_exponents, r.exponent_bound, r.exponents_negative
        );
    }
    Ok(())
}
