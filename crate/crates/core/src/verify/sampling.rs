use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::{lattice_distance, ModularParam};
use crate::error::{Error, Result};
use crate::quiver::Degree;
use crate::transform::FourPointConfig;

const MAX_ATTEMPTS: usize = 10_000;

/// The generator for sample `index` of a suite: a ChaCha8 stream keyed by the
/// run seed, with the suite and sample index selecting the stream. Samples
/// are therefore independent of evaluation order.
pub fn sample_rng(seed: u64, suite_code: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((suite_code << 40) ^ index);
    rng
}

/// A point of the fundamental parallelogram `{s + t tau : s, t in [-1/2, 1/2)}`.
pub fn sample_w(rng: &mut ChaCha8Rng, mp: &ModularParam) -> Complex64 {
    let s: f64 = rng.gen_range(-0.5..0.5);
    let t: f64 = rng.gen_range(-0.5..0.5);
    Complex64::new(s, 0.0) + t * mp.tau()
}

/// Modulus log-uniform on `[0.1, 10]`, phase uniform.
pub fn sample_ratio(rng: &mut ChaCha8Rng) -> Complex64 {
    let log_r: f64 = rng.gen_range(-(10f64.ln())..10f64.ln());
    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
    Complex64::from_polar(log_r.exp(), phase)
}

/// Positions for every `(i, r)` of `alpha`, drawn from the parallelogram and
/// rejected until all pairs are at least `delta` apart (modulo the lattice).
/// Each position is redrawn on its own, so the result depends only on the
/// generator state.
pub fn sample_positions(
    rng: &mut ChaCha8Rng,
    alpha: &Degree,
    mp: &ModularParam,
    delta: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let mut taken: Vec<Complex64> = Vec::new();
    let mut out = Vec::with_capacity(alpha.len());
    for &a in alpha.coefficients() {
        let mut ws = Vec::with_capacity(a as usize);
        for _ in 0..a {
            let w = (0..MAX_ATTEMPTS)
                .map(|_| sample_w(rng, mp))
                .find(|&w| taken.iter().all(|&u| lattice_distance(w - u, mp) >= delta))
                .ok_or_else(|| Error::InvalidArgument(format!("could not place {} points {delta} apart", alpha.total())))?;
            taken.push(w);
            ws.push(w);
        }
        out.push(ws);
    }
    Ok(out)
}

/// Four distinct real positions in `[-0.45, 0.45]`, pairwise at least `gap` apart.
pub fn sample_four_points(rng: &mut ChaCha8Rng, gap: f64) -> Result<FourPointConfig> {
    let mut xs: Vec<f64> = Vec::with_capacity(4);
    while xs.len() < 4 {
        let found = (0..MAX_ATTEMPTS)
            .map(|_| rng.gen_range(-0.45..0.45))
            .find(|x: &f64| xs.iter().all(|y| (x - y).abs() >= gap))
            .ok_or_else(|| Error::InvalidArgument(format!("could not place four points {gap} apart")))?;
        xs.push(found);
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(FourPointConfig {
        a: c(xs[0]),
        a_ref: c(xs[1]),
        b: c(xs[2]),
        b_ref: c(xs[3]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mp = ModularParam::new(Complex64::new(0.5, 1.0)).unwrap();
        let a = sample_w(&mut sample_rng(7, 2, 3), &mp);
        let b = sample_w(&mut sample_rng(7, 2, 3), &mp);
        let c = sample_w(&mut sample_rng(7, 2, 4), &mp);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn positions_are_separated_and_ratios_in_range() {
        let mp = ModularParam::new(Complex64::new(0.0, 1.0)).unwrap();
        let mut rng = sample_rng(1, 0, 0);
        let alpha = Degree::new(vec![3, 3, 2]).unwrap();
        let w: Vec<Complex64> = sample_positions(&mut rng, &alpha, &mp, 0.05).unwrap().concat();
        for (k, a) in w.iter().enumerate() {
            for b in &w[k + 1..] {
                assert!(lattice_distance(a - b, &mp) >= 0.05);
            }
        }
        for _ in 0..200 {
            let r = sample_ratio(&mut rng).norm();
            assert!((0.1 - 1e-12..=10.0 + 1e-12).contains(&r));
        }
    }
}
