//! Vertical fields and their fiber flows over the four fixed points.

use kan3::construction::default_map;
use kan3::fields::FiberField;
use kan3::kan::SkewMap;

fn main() -> kan3::Result<()> {
    let k = default_map(0.1)?;
    let f = k.fields();
    let a = k.anosov();
    for (name, x) in [("p", a.p), ("q", a.q), ("r", a.r), ("s", a.s)] {
        let region = f.classify(&x);
        println!(
            "{name}: {:?}, X(0.5) = {:+.4}, Y(0.5) = {:+.4}",
            region,
            f.eval_x(&x, 0.5),
            f.eval_y(&x, 0.5)
        );
    }
    let sine = FiberField::Sin1 { b: 1.0 };
    let (th, d) = f.flow_with_derivative(&sine, 0.1, 0.5)?;
    println!("sin(πθ) flow from 0.5 for time 0.1: {th:.8} (derivative {d:.6})");
    let back = f.flow_inverse(&sine, 0.1, th)?;
    println!("inverse flow returns {back:.12}");
    let sink = FiberField::Sin1 { b: -1.0 };
    let (_, m) = f.flow_with_derivative(&sink, 0.1, 0.0)?;
    println!(
        "sink multiplier at θ = 0: {m:.8} (e^(-0.1π) = {:.8})",
        (-0.1 * std::f64::consts::PI).exp()
    );
    Ok(())
}
