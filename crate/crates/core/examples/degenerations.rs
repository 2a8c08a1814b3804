//! Rational and trigonometric limits of the four-term zeta combination.

use num_complex::Complex64;
use zastava::elliptic::ModularParam;
use zastava::transform::{rational_limit_check, trigonometric_limit_check, FourPointConfig};

fn main() -> zastava::Result<()> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let four = FourPointConfig {
        a: c(0.31),
        a_ref: c(-0.12),
        b: c(0.05),
        b_ref: c(-0.38),
    };

    for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.5, 1.0), Complex64::new(0.0, 2.0)] {
        let mp = ModularParam::new(tau)?;
        let report = rational_limit_check(&mp, &four, &[0.1, 0.05, 0.025, 0.0125])?;
        println!("rational, tau = {tau}");
        for (eps, err) in report.ladder.iter().zip(&report.errors) {
            println!("  eps = {eps:<7} error = {err:.3e}");
        }
        println!("  observed orders {:.3?}", report.rates);
    }

    let report = trigonometric_limit_check(&four, 0.0, &[1.0, 1.5, 2.0, 3.0, 4.0])?;
    println!("trigonometric");
    for ((im, err), q) in report.ladder.iter().zip(&report.errors).zip(&report.nome_moduli) {
        println!("  Im tau = {im:<4} |q| = {q:.3e} error = {err:.3e}");
    }
    println!("  error ratio / nome ratio {:.4?}", report.rates);
    Ok(())
}
