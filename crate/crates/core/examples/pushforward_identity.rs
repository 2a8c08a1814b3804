//! Transports the reduced Coulomb bracket along the theta-product change of
//! coordinates and compares it with the elliptic bracket on the image.

use std::sync::Arc;

use num_complex::Complex64;
use zastava::charts::{fo_reduced_bracket_matrix, ChartKind, ReducedChartPoint};
use zastava::elliptic::ModularParam;
use zastava::quiver::{Degree, Quiver};
use zastava::transform::{
    coulomb_from_zastava, pushforward_bracket, zastava_from_coulomb, PhiGauge, QuadraticGauge, TransformSpec,
};

fn max_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn main() -> zastava::Result<()> {
    let mp = ModularParam::new(Complex64::new(0.5, 1.0))?;
    let quiver = Quiver::named("A3")?;
    let alpha = Degree::new(vec![2, 3, 2])?;
    let w = vec![
        vec![Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.1)],
        vec![Complex64::new(0.25, -0.15), Complex64::new(0.4, 0.35), Complex64::new(-0.1, -0.3)],
        vec![Complex64::new(-0.42, 0.27), Complex64::new(0.05, 0.44)],
    ];
    let z = vec![
        vec![Complex64::new(1.1, 0.3)],
        vec![Complex64::new(0.6, -0.5), Complex64::new(2.0, 0.1)],
        vec![Complex64::new(-0.8, 0.9)],
    ];
    let point = ReducedChartPoint::from_full_w(quiver.clone(), alpha.clone(), ChartKind::Coulomb, w, z)?;

    let gauges = [
        ("unit gauge", PhiGauge::Unit),
        ("quadratic gauge", PhiGauge::Custom(Arc::new(QuadraticGauge { kappa: Complex64::new(0.3, 0.1) }))),
    ];
    for (name, gauge) in gauges {
        let spec = TransformSpec::new(quiver.clone(), alpha.clone(), mp)?.with_gauge(gauge);
        let image = zastava_from_coulomb(&spec, &point)?;
        let back = coulomb_from_zastava(&spec, &image)?;
        let pushed = pushforward_bracket(&spec, &point)?;
        let fo = fo_reduced_bracket_matrix(&image, &mp)?;
        println!("{name}:");
        println!("  round trip error       {:.1e}", max_difference(&point.coords(), &back.coords()));
        println!("  largest bracket entry  {:.3e}", fo.max_abs());
        println!("  |J B J^T - B_FO|       {:.1e}", max_difference(pushed.entries(), fo.entries()));
    }
    Ok(())
}
