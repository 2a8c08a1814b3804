//! Theta, zeta and Weierstrass p on the square lattice, compared with a
//! direct lattice sum.

use num_complex::Complex64;
use zastava::elliptic::{
    quasi_periods, theta, weierstrass_p, weierstrass_zeta, zeta_lattice_oracle_extrapolated, ModularParam,
};

fn main() -> zastava::Result<()> {
    let mp = ModularParam::new(Complex64::new(0.0, 1.0))?;
    let (eta1, eta2) = quasi_periods(&mp);
    println!("tau = {}, |q| = {:.3e}", mp.tau(), mp.q().norm());
    println!("eta1 = {eta1:.12}  (pi = {:.12})", std::f64::consts::PI);
    println!("eta1 tau - eta2 = {:.12}", eta1 * mp.tau() - eta2);

    for w in [Complex64::new(0.1, 0.05), Complex64::new(0.3, -0.2), Complex64::new(-0.25, 0.4)] {
        let z = weierstrass_zeta(w, &mp)?;
        let oracle = zeta_lattice_oracle_extrapolated(w, &mp, 400)?;
        println!(
            "w = {w:.3}: theta = {:.6}, zeta = {z:.9}, |zeta - lattice sum| = {:.1e}, p = {:.6}",
            theta(w, &mp),
            (z - oracle).norm(),
            weierstrass_p(w, &mp)?,
        );
    }

    // zeta(w + 1) = zeta(w) + eta1 and zeta(w + tau) = zeta(w) + eta2.
    let w = Complex64::new(0.17, 0.11);
    let z = weierstrass_zeta(w, &mp)?;
    println!("zeta(w+1) - zeta(w) - eta1 = {:.1e}", (weierstrass_zeta(w + 1.0, &mp)? - z - eta1).norm());
    println!(
        "zeta(w+tau) - zeta(w) - eta2 = {:.1e}",
        (weierstrass_zeta(w + mp.tau(), &mp)? - z - eta2).norm()
    );
    Ok(())
}
