//! Recovers the residues of a sum of shifted zeta functions by contour
//! integration around each pole.

use num_complex::Complex64;
use zastava::elliptic::ModularParam;
use zastava::transform::{sl2_residue_coordinates, zeta_divisor_function, ContourOptions};

fn main() -> zastava::Result<()> {
    let mp = ModularParam::new(Complex64::new(0.0, 1.0))?;
    let poles = [Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.1), Complex64::new(0.35, -0.3)];
    let residues = [Complex64::new(1.5, 0.5), Complex64::new(-0.5, 1.0), Complex64::new(-1.0, -1.5)];

    // With balanced residues the function is doubly periodic.
    let x = Complex64::new(0.02, -0.11);
    let t = zeta_divisor_function(&poles, &residues, x, &mp)?;
    let shifted = zeta_divisor_function(&poles, &residues, x + mp.tau(), &mp)?;
    println!("t(x) = {t:.9}, t(x + tau) - t(x) = {:.1e}", (shifted - t).norm());

    for nodes in [8, 16, 32, 64] {
        let options = ContourOptions { nodes, separation: 0.1 };
        let found = sl2_residue_coordinates(&poles, &residues, &mp, &options)?;
        let err = found.iter().zip(&residues).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("{nodes:>3} nodes, radius {:.3}: max residue error {err:.1e}", options.radius());
    }

    let unbalanced = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    if let Err(e) = sl2_residue_coordinates(&poles, &unbalanced, &mp, &ContourOptions::default()) {
        println!("unbalanced residues: {e}");
    }
    Ok(())
}
