//! Direct lattice sums for the Weierstrass zeta function.
//!
//! These never touch the q-series and serve as ground truth for it.

use num_complex::Complex64;

use super::{lattice_distance, ModularParam, POLE_THRESHOLD};
use crate::error::{Error, Result};

const MIN_CUTOFF: usize = 10;

/// `1/w + sum' [1/(w - l) + 1/l + w/l^2]` over `l = m + n tau` with
/// `0 < max(|m|, |n|) <= cutoff`.
///
/// Terms are accumulated in `+l/-l` pairs in a fixed order, so the sum is
/// exactly odd in `w`.
pub fn zeta_lattice_oracle(w: Complex64, mp: &ModularParam, cutoff: usize) -> Result<Complex64> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::InvalidArgument(format!(
            "lattice cutoff {cutoff} is below {MIN_CUTOFF}"
        )));
    }
    let dist = lattice_distance(w, mp);
    if dist < POLE_THRESHOLD {
        return Err(Error::PoleAtLatticePoint {
            re: w.re,
            im: w.im,
            modulus: dist,
        });
    }
    Ok(lattice_sum(w, mp.tau(), cutoff as i64))
}

fn lattice_sum(w: Complex64, tau: Complex64, cutoff: i64) -> Complex64 {
    let term = |lam: Complex64| {
        let inv = lam.inv();
        (w - lam).inv() + inv + w * (inv * inv)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=cutoff {
        let m_start = if n == 0 { 1 } else { -cutoff };
        let mut row = Complex64::new(0.0, 0.0);
        for m in m_start..=cutoff {
            let lam = Complex64::new(m as f64, 0.0) + n as f64 * tau;
            row += term(lam) + term(-lam);
        }
        acc += row;
    }
    w.inv() + acc
}

/// Richardson combination of the lattice sums at `cutoff` and `cutoff / 2`.
///
/// The square truncation leaves a tail of order `|w|^3 / cutoff^2`; this
/// cancels that leading term and is still a pure lattice sum.
pub fn zeta_lattice_oracle_extrapolated(
    w: Complex64,
    mp: &ModularParam,
    cutoff: usize,
) -> Result<Complex64> {
    let half = cutoff / 2;
    let fine = zeta_lattice_oracle(w, mp, cutoff)?;
    let coarse = zeta_lattice_oracle(w, mp, half)?;
    let (n2, h2) = ((cutoff * cutoff) as f64, (half * half) as f64);
    Ok((n2 * fine - h2 * coarse) / (n2 - h2))
}

/// Upper estimate of the leading truncation error of [`zeta_lattice_oracle`]:
/// `|w|^3 sum_{k > cutoff} 8k / (rho k)^4 <= 4 |w|^3 / (rho^4 cutoff^2)`, where
/// `rho` is the smallest modulus on the unit shell `max(|s|, |t|) = 1`.
pub fn zeta_lattice_truncation_bound(w: Complex64, mp: &ModularParam, cutoff: usize) -> f64 {
    let tau = mp.tau();
    let s_star = (-tau.re).clamp(-1.0, 1.0);
    let horizontal = (s_star + tau).norm();
    let t_star = (-tau.re / tau.norm_sqr()).clamp(-1.0, 1.0);
    let vertical = (1.0 + t_star * tau).norm();
    let rho = horizontal.min(vertical);
    let n = cutoff as f64;
    4.0 * w.norm().powi(3) / (rho.powi(4) * n * n)
}
