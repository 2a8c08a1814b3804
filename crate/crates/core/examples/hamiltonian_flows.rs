//! Flows of a moment component on a Coulomb chart and of a coordinate on an
//! elliptic chart.

use num_complex::Complex64;
use zastava::charts::{
    flow_integrate, BracketFamily, ChartKind, ChartPoint, Hamiltonian, ReducedChartPoint, UnreducedChartPoint,
};
use zastava::elliptic::ModularParam;
use zastava::quiver::{Degree, Quiver};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() -> zastava::Result<()> {
    let q = Quiver::named("A2")?;
    let alpha = Degree::new(vec![2, 2])?;
    let w = vec![vec![c(0.1, 0.2), c(-0.3, 0.1)], vec![c(0.25, -0.15), c(0.4, 0.35)]];
    let z = vec![vec![c(1.0, 0.5), c(0.7, -0.2)], vec![c(1.3, 0.1), c(-0.6, 0.8)]];

    let start: ChartPoint = UnreducedChartPoint::new(q.clone(), alpha.clone(), ChartKind::Coulomb, w.clone(), z)?.into();
    let h = Hamiltonian::parse("moment:1", &start)?;
    let report = flow_integrate(&BracketFamily::Coulomb, &start, &h, 1.0, 200)?;
    let last = report.trajectory.last().expect("trajectory is never empty");
    let z_slot = report.labels.iter().position(|l| l == "z[1,1]").expect("z[1,1] is a coordinate");
    println!("moment flow for t = 1 on {:?}", report.labels);
    println!("  z[1,1](1) / z[1,1](0) = {:.12}  (e = {:.12})", last[z_slot] / report.trajectory[0][z_slot], std::f64::consts::E);
    println!("  H drift {:.1e}, moment drift {:.1e}", report.h_drift, report.moment_drift.iter().fold(0.0, |a: f64, b| a.max(*b)));

    let mp = ModularParam::new(c(0.0, 1.0))?;
    let ratio = vec![vec![c(1.2, -0.4)], vec![c(0.9, 0.3)]];
    let start: ChartPoint = ReducedChartPoint::from_full_w(q, alpha, ChartKind::Zastava, w, ratio)?.into();
    let h = Hamiltonian::parse("Y[1,1]", &start)?;
    let report = flow_integrate(&BracketFamily::EllipticFo { mp }, &start, &h, 0.2, 100)?;
    println!("flow of Y[1,1] on the elliptic chart: H drift {:.1e}", report.h_drift);
    Ok(())
}
