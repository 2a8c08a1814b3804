//! Elliptic special functions on the lattice `Z + Z tau`.
//!
//! The odd theta function of degree one is taken in triple-product form
//!
//! ```text
//! theta(w) = 2 q^{1/8} sin(pi w) prod_{n>=1} (1 - q^n)(1 - q^n e^{2 pi i w})(1 - q^n e^{-2 pi i w})
//! ```
//!
//! with `q = e^{2 pi i tau}`. Its overall scale never matters downstream: only
//! `theta'/theta` and ratios of theta products enter the bracket formulas.
//! With this normalization
//!
//! ```text
//! theta(w + 1)   = -theta(w)
//! theta(w + tau) = -e^{-pi i tau - 2 pi i w} theta(w)
//! ```
//!
//! and the Weierstrass functions follow as `zeta = theta'/theta + eta1 * w`,
//! `wp = -zeta'`. Every evaluation first reduces its argument into the
//! fundamental parallelogram and then applies the quasi-periodicity
//! corrections from the recorded lattice shift.

mod oracle;

pub use oracle::{zeta_lattice_oracle, zeta_lattice_oracle_extrapolated, zeta_lattice_truncation_bound};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced arguments closer than this to a lattice point are treated as poles.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Default truncation tolerance for the q-series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-17;

const MIN_SERIES_TERMS: usize = 20;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The modular parameter `tau` of the curve `E = C / (Z + Z tau)`.
///
/// Also caches `q = e^{2 pi i tau}`, the series truncation length and the
/// quasi-period `eta1`. The trivialization of the canonical bundle of `E` is
/// the coordinate differential `dw` throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModularParamDoc", into = "ModularParamDoc")]
pub struct ModularParam {
    tau: Complex64,
    q: Complex64,
    series_terms: usize,
    tol: f64,
    eta1: Complex64,
}

#[derive(Serialize, Deserialize)]
struct ModularParamDoc {
    tau: [f64; 2],
    tol: f64,
    series_terms: usize,
}

impl TryFrom<ModularParamDoc> for ModularParam {
    type Error = Error;

    fn try_from(doc: ModularParamDoc) -> Result<Self> {
        Ok(ModularParam::with_tolerance(Complex64::new(doc.tau[0], doc.tau[1]), doc.tol)?
            .with_series_terms(doc.series_terms))
    }
}

impl From<ModularParam> for ModularParamDoc {
    fn from(mp: ModularParam) -> Self {
        ModularParamDoc {
            tau: [mp.tau.re, mp.tau.im],
            tol: mp.tol,
            series_terms: mp.series_terms,
        }
    }
}

impl ModularParam {
    pub fn new(tau: Complex64) -> Result<Self> {
        Self::with_tolerance(tau, DEFAULT_SERIES_TOL)
    }

    /// Builds the parameter with the series truncated once `|q|^n < tol`.
    pub fn with_tolerance(tau: Complex64, tol: f64) -> Result<Self> {
        if !(tau.re.is_finite() && tau.im.is_finite()) || tau.im <= 0.0 {
            return Err(Error::InvalidModularParam {
                re: tau.re,
                im: tau.im,
                reason: "Im(tau) must be positive".into(),
            });
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidModularParam {
                re: tau.re,
                im: tau.im,
                reason: format!("series tolerance {tol} must lie in (0, 1)"),
            });
        }
        let q = (2.0 * PI * I * tau).exp();
        let log_q = q.norm().ln();
        let series_terms = ((tol.ln() / log_q).ceil() as usize + 5).max(MIN_SERIES_TERMS);
        let mut mp = ModularParam {
            tau,
            q,
            series_terms,
            tol,
            eta1: Complex64::new(0.0, 0.0),
        };
        mp.eta1 = mp.eta1_series();
        Ok(mp)
    }

    /// Overrides the number of q-series terms (at least one).
    pub fn with_series_terms(mut self, terms: usize) -> Self {
        self.series_terms = terms.max(1);
        self.eta1 = self.eta1_series();
        self
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn series_terms(&self) -> usize {
        self.series_terms
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `eta1 = -theta'''(0) / (3 theta'(0)) = pi^2/3 - 8 pi^2 sum n q^n / (1 - q^n)`.
    fn eta1_series(&self) -> Complex64 {
        let mut qn = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=self.series_terms {
            qn *= self.q;
            acc += n as f64 * qn / (1.0 - qn);
        }
        PI * PI / 3.0 - 8.0 * PI * PI * acc
    }
}

/// A point `w = w_reduced + m + n tau` with `w_reduced` in the fundamental
/// parallelogram `{s + t tau : s, t in [-1/2, 1/2)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeReducedPoint {
    pub w_reduced: Complex64,
    pub m: i64,
    pub n: i64,
}

pub fn reduce_modulo_lattice(w: Complex64, mp: &ModularParam) -> LatticeReducedPoint {
    let tau = mp.tau;
    let t = w.im / tau.im;
    let n = (t + 0.5).floor();
    let shifted = w - n * tau;
    let s = shifted.re - (shifted.im / tau.im) * tau.re;
    let m = (s + 0.5).floor();
    LatticeReducedPoint {
        w_reduced: shifted - m,
        m: m as i64,
        n: n as i64,
    }
}

/// Distance from `w` to the nearest lattice point, measured after reduction.
pub fn lattice_distance(w: Complex64, mp: &ModularParam) -> f64 {
    let r = reduce_modulo_lattice(w, mp).w_reduced;
    let tau = mp.tau;
    // The reduced point lies in the central cell; the nearest lattice point is
    // among the nine surrounding lattice vectors.
    let mut best = f64::INFINITY;
    for a in -1..=1 {
        for b in -1..=1 {
            let d = (r - (a as f64) - (b as f64) * tau).norm();
            best = best.min(d);
        }
    }
    best
}

fn pole_check(reduced: &LatticeReducedPoint, w: Complex64) -> Result<()> {
    let modulus = reduced.w_reduced.norm();
    if modulus < POLE_THRESHOLD {
        return Err(Error::PoleAtLatticePoint {
            re: w.re,
            im: w.im,
            modulus,
        });
    }
    Ok(())
}

/// The product factors `x_n = q^n e^{2 pi i w}` and `y_n = q^n e^{-2 pi i w}`.
struct Nome {
    q: Complex64,
    forward: Complex64,
    backward: Complex64,
}

impl Nome {
    fn new(w: Complex64, mp: &ModularParam) -> Self {
        Nome {
            q: mp.q,
            forward: (2.0 * PI * I * w).exp(),
            backward: (-2.0 * PI * I * w).exp(),
        }
    }

    fn terms(&self, count: usize) -> impl Iterator<Item = (Complex64, Complex64, Complex64)> + '_ {
        let mut qn = Complex64::new(1.0, 0.0);
        (0..count).map(move |_| {
            qn *= self.q;
            (qn, qn * self.forward, qn * self.backward)
        })
    }
}

fn theta_reduced(w: Complex64, mp: &ModularParam) -> Complex64 {
    let nome = Nome::new(w, mp);
    let mut prod = Complex64::new(1.0, 0.0);
    for (qn, x, y) in nome.terms(mp.series_terms) {
        prod *= (1.0 - qn) * ((1.0 - x) * (1.0 - y));
    }
    2.0 * (PI * I * mp.tau / 4.0).exp() * (PI * w).sin() * prod
}

/// `theta'/theta` on a reduced argument.
fn log_deriv_reduced(w: Complex64, mp: &ModularParam) -> Complex64 {
    let nome = Nome::new(w, mp);
    let mut acc = Complex64::new(0.0, 0.0);
    for (_, x, y) in nome.terms(mp.series_terms) {
        acc += y / (1.0 - y) - x / (1.0 - x);
    }
    PI * (PI * w).cos() / (PI * w).sin() + 2.0 * PI * I * acc
}

/// Derivative of `theta'/theta` on a reduced argument.
fn log_deriv_prime_reduced(w: Complex64, mp: &ModularParam) -> Complex64 {
    let nome = Nome::new(w, mp);
    let mut acc = Complex64::new(0.0, 0.0);
    for (_, x, y) in nome.terms(mp.series_terms) {
        acc += x / ((1.0 - x) * (1.0 - x)) + y / ((1.0 - y) * (1.0 - y));
    }
    let s = (PI * w).sin();
    -PI * PI / (s * s) + 4.0 * PI * PI * acc
}

/// The odd theta function of degree one, `theta(0) = 0`.
pub fn theta(w: Complex64, mp: &ModularParam) -> Complex64 {
    let red = reduce_modulo_lattice(w, mp);
    let base = theta_reduced(red.w_reduced, mp);
    if red.m == 0 && red.n == 0 {
        return base;
    }
    let n = red.n as f64;
    let sign = if (red.m + red.n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let multiplier = (-PI * I * n * n * mp.tau - 2.0 * PI * I * n * red.w_reduced).exp();
    sign * multiplier * base
}

/// `theta'(w) / theta(w)`; odd, with a simple pole of residue one at the lattice.
pub fn theta_log_deriv(w: Complex64, mp: &ModularParam) -> Result<Complex64> {
    let red = reduce_modulo_lattice(w, mp);
    pole_check(&red, w)?;
    Ok(log_deriv_reduced(red.w_reduced, mp) - 2.0 * PI * I * red.n as f64)
}

/// The Weierstrass zeta function of the lattice `Z + Z tau`.
pub fn weierstrass_zeta(w: Complex64, mp: &ModularParam) -> Result<Complex64> {
    let red = reduce_modulo_lattice(w, mp);
    pole_check(&red, w)?;
    let (eta1, eta2) = quasi_periods(mp);
    let base = log_deriv_reduced(red.w_reduced, mp) + eta1 * red.w_reduced;
    Ok(base + red.m as f64 * eta1 + red.n as f64 * eta2)
}

/// The Weierstrass `wp` function, `wp = -zeta'`.
pub fn weierstrass_p(w: Complex64, mp: &ModularParam) -> Result<Complex64> {
    let red = reduce_modulo_lattice(w, mp);
    pole_check(&red, w)?;
    Ok(-log_deriv_prime_reduced(red.w_reduced, mp) - mp.eta1)
}

/// Quasi-periods `(eta1, eta2)` of zeta along `1` and `tau`.
///
/// `eta2` follows from the theta multiplier along `tau`, giving the Legendre
/// relation `eta1 * tau - eta2 = 2 pi i`.
pub fn quasi_periods(mp: &ModularParam) -> (Complex64, Complex64) {
    let eta1 = mp.eta1;
    (eta1, eta1 * mp.tau - 2.0 * PI * I)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> ModularParam {
        ModularParam::new(c(0.0, 1.0)).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(
            ModularParam::new(c(0.3, -1.0)),
            Err(Error::InvalidModularParam { .. })
        ));
        assert!(ModularParam::new(c(0.3, 0.0)).is_err());
    }

    #[test]
    fn truncation_bound_holds() {
        for tau in [c(0.0, 0.5), c(0.5, 1.0), c(0.0, 3.0)] {
            let mp = ModularParam::new(tau).unwrap();
            assert!(mp.q().norm().powi(mp.series_terms() as i32) < mp.tol());
            assert!(mp.series_terms() >= 20);
        }
    }

    #[test]
    fn reduction_examples() {
        let mp = square();
        let r = reduce_modulo_lattice(c(0.0, 0.0), &mp);
        assert_eq!((r.w_reduced, r.m, r.n), (c(0.0, 0.0), 0, 0));
        let r = reduce_modulo_lattice(c(1.0, 1.0), &mp);
        assert_eq!((r.m, r.n), (1, 1));
        assert!(r.w_reduced.norm() < 1e-15);
        let r = reduce_modulo_lattice(c(0.7, 0.0), &mp);
        assert_eq!((r.m, r.n), (1, 0));
        assert!((r.w_reduced - c(-0.3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reduction_lands_in_parallelogram() {
        let mp = ModularParam::new(c(0.5, 1.3)).unwrap();
        for k in 0..200 {
            let w = c((k as f64 * 0.731).sin() * 7.0, (k as f64 * 1.37).cos() * 9.0);
            let r = reduce_modulo_lattice(w, &mp);
            let t = r.w_reduced.im / mp.tau().im;
            let s = r.w_reduced.re - t * mp.tau().re;
            assert!((-0.5..0.5).contains(&t), "t = {t}");
            assert!((-0.5..0.5).contains(&s), "s = {s}");
            let back = r.w_reduced + r.m as f64 + r.n as f64 * mp.tau();
            assert!((back - w).norm() < 1e-12);
        }
    }

    #[test]
    fn theta_vanishes_at_origin_and_is_odd() {
        let mp = square();
        assert_eq!(theta(c(0.0, 0.0), &mp), c(0.0, 0.0));
        let w = c(0.31, 0.12);
        assert!((theta(-w, &mp) + theta(w, &mp)).norm() < 1e-15);
    }

    #[test]
    fn theta_matches_doubled_truncation() {
        let mp = square();
        let doubled = mp.with_series_terms(2 * mp.series_terms());
        let a = theta(c(0.25, 0.0), &mp);
        let b = theta(c(0.25, 0.0), &doubled);
        assert!((a - b).norm() <= 1e-15 * b.norm());
    }

    #[test]
    fn theta_multipliers() {
        for tau in [c(0.0, 1.0), c(0.5, 1.0), c(0.2, 0.7)] {
            let mp = ModularParam::new(tau).unwrap();
            for w in [c(0.13, 0.05), c(-0.4, 0.3), c(0.27, -0.2)] {
                let t = theta(w, &mp);
                assert!((theta(w + 1.0, &mp) + t).norm() < 1e-12 * t.norm());
                let expected = -(-PI * I * tau - 2.0 * PI * I * w).exp() * t;
                assert!((theta(w + tau, &mp) - expected).norm() < 1e-12 * expected.norm());
            }
        }
    }

    #[test]
    fn log_deriv_odd_with_unit_residue() {
        let mp = ModularParam::new(c(0.0, 2.0)).unwrap();
        let w = c(0.2, 0.1);
        let a = theta_log_deriv(w, &mp).unwrap();
        let b = theta_log_deriv(-w, &mp).unwrap();
        assert!((a + b).norm() < 1e-13);
        for eps in [1e-2, 1e-3] {
            let r = eps * theta_log_deriv(c(eps, 0.0), &mp).unwrap();
            assert!((r - 1.0).norm() < 10.0 * eps * eps, "{r}");
        }
        assert!(matches!(
            theta_log_deriv(c(1.0, 0.0), &mp),
            Err(Error::PoleAtLatticePoint { .. })
        ));
    }

    #[test]
    fn log_deriv_matches_theta_finite_difference() {
        let mp = ModularParam::new(c(0.5, 1.0)).unwrap();
        let w = c(0.21, 0.33);
        let h = 1e-5;
        let fd = (theta(w + h, &mp) - theta(w - h, &mp)) / (2.0 * h) / theta(w, &mp);
        assert!((fd - theta_log_deriv(w, &mp).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn zeta_is_odd_and_quasi_periodic() {
        let mp = ModularParam::new(c(1.0, 2.0)).unwrap();
        let w = c(0.17, 0.4);
        let z = weierstrass_zeta(w, &mp).unwrap();
        assert!((weierstrass_zeta(-w, &mp).unwrap() + z).norm() < 1e-12);
        let (eta1, eta2) = quasi_periods(&mp);
        for w in [c(0.1, 0.2), c(-0.33, 0.9), c(0.41, -0.7)] {
            let z = weierstrass_zeta(w, &mp).unwrap();
            let z1 = weierstrass_zeta(w + 1.0, &mp).unwrap();
            let zt = weierstrass_zeta(w + mp.tau(), &mp).unwrap();
            assert!((z1 - z - eta1).norm() < 1e-11);
            assert!((zt - z - eta2).norm() < 1e-11);
        }
    }

    #[test]
    fn legendre_relation_and_square_lattice_symmetry() {
        let mp = square();
        let (eta1, eta2) = quasi_periods(&mp);
        assert!(((eta1 * mp.tau() - eta2).norm() - 2.0 * PI).abs() < 1e-10);
        assert!(eta1.im.abs() < 1e-14);
        // eta1 = pi for the square lattice.
        assert!((eta1.re - PI).abs() < 1e-12);
    }

    #[test]
    fn wp_even_with_double_pole() {
        let mp = square();
        let w = c(0.3, 0.2);
        let p = weierstrass_p(w, &mp).unwrap();
        assert!((weierstrass_p(-w, &mp).unwrap() - p).norm() < 1e-12 * p.norm());
        for eps in [1e-2, 1e-3] {
            let r = eps * eps * weierstrass_p(c(eps, 0.0), &mp).unwrap();
            assert!((r - 1.0).norm() < 10.0 * eps.powi(4), "{r}");
        }
    }

    #[test]
    fn zeta_derivative_is_minus_wp() {
        let mp = square();
        let w = c(0.4, 0.0);
        let h = 1e-4;
        let fd = (weierstrass_zeta(w + h, &mp).unwrap() - weierstrass_zeta(w - h, &mp).unwrap()) / (2.0 * h);
        let p = weierstrass_p(w, &mp).unwrap();
        assert!((fd + p).norm() < 1e-6 * p.norm());
    }

    #[test]
    fn lattice_distance_near_corner() {
        let mp = square();
        assert!((lattice_distance(c(0.999, 1.0), &mp) - 1e-3).abs() < 1e-12);
        assert!(lattice_distance(c(0.5, 0.5), &mp) > 0.7);
    }
}
