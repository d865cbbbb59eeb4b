//! The cat map `[[5,2],[2,1]]`, its labelled fixed points and the adapted
//! chart around the homoclinic point of `p`.

use kan3::chart::search_homoclinic_chart;
use kan3::torus::AnosovMap;

fn main() -> kan3::Result<()> {
    let a = AnosovMap::from_matrix([[5, 2], [2, 1]])?;
    let (lu, ls) = a.eigenvalues();
    println!("eigenvalues {lu:.6} {ls:.6}");
    for (name, x) in [("p", a.p), ("q", a.q), ("r", a.r), ("s", a.s)] {
        println!("{name} = ({}, {})", x.x, x.y);
    }
    let chart = search_homoclinic_chart(&a, 3, 6)?;
    println!("n0 = {}, lattice vector {:?}", chart.n0, chart.m);
    println!(
        "homoclinic point ({:.6}, {:.6})",
        chart.homoclinic.x, chart.homoclinic.y
    );
    println!("return expansion {:.3}", chart.return_expansion());
    let rep = chart.return_report();
    for c in &rep.components {
        println!("return piece via {:?}: {:?}", c.lattice, c.chart_box);
    }
    println!("orbit boxes disjoint: {}", chart.orbit_boxes_disjoint());
    Ok(())
}
