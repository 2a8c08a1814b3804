//! Bracket matrices of the four chart families on an A2 point, with their
//! Jacobi identity residuals.

use num_complex::Complex64;
use zastava::charts::{bracket_field, BracketFamily, ChartKind, ChartPoint, ReducedChartPoint, UnreducedChartPoint};
use zastava::elliptic::ModularParam;
use zastava::quiver::{Degree, Quiver};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn show(family: &BracketFamily, point: ChartPoint) -> zastava::Result<()> {
    let field = bracket_field(family, &point)?;
    let m = field.matrix();
    println!("{} ({} coordinates)", family.name(), m.dim());
    for (a, label) in m.labels().iter().enumerate() {
        let row: Vec<String> = m.row(a).iter().map(|z| format!("{:>9.4}", z.re)).collect();
        println!("  {label:>8} {}", row.join(" "));
    }
    let (jacobi, _) = field.max_jacobiator();
    println!("  antisymmetry {:.1e}, max Jacobiator {jacobi:.1e}", m.antisymmetry_residual());
    Ok(())
}

fn main() -> zastava::Result<()> {
    let q = Quiver::named("A2")?;
    let alpha = Degree::new(vec![2, 2])?;
    let w = vec![vec![c(0.1, 0.2), c(-0.3, 0.1)], vec![c(0.25, -0.15), c(-0.05, 0.4)]];
    let y = vec![vec![c(1.0, 0.5), c(0.7, -0.2)], vec![c(1.3, 0.1), c(-0.6, 0.8)]];

    let rational = UnreducedChartPoint::new(q.clone(), alpha.clone(), ChartKind::Zastava, w.clone(), y.clone())?;
    show(&BracketFamily::Rational, rational.into())?;
    let coulomb = UnreducedChartPoint::new(q.clone(), alpha.clone(), ChartKind::Coulomb, w.clone(), y)?;
    show(&BracketFamily::Coulomb, coulomb.into())?;

    let ratio = vec![vec![c(1.2, -0.4)], vec![c(0.9, 0.3)]];
    let mp = ModularParam::new(c(0.0, 1.0))?;
    let fo = ReducedChartPoint::from_full_w(q.clone(), alpha.clone(), ChartKind::Zastava, w.clone(), ratio.clone())?;
    show(&BracketFamily::EllipticFo { mp }, fo.into())?;
    let reduced = ReducedChartPoint::from_full_w(q, alpha, ChartKind::Coulomb, w, ratio)?;
    show(&BracketFamily::CoulombReduced, reduced.into())?;
    Ok(())
}
