//! Sampling of the initial phase-space density `f_I`.
//!
//! `f_I` is a product Gaussian in `(x, p)` with `p` the kinetic momentum.
//! Two schemes are offered: a Halton low-discrepancy sequence with a seeded
//! Cranley–Patterson rotation, and seeded ChaCha pseudo-random draws. Both are
//! deterministic given the seed; the quantum side uses a prefix of the same
//! sequence as its coherent-state centres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Product Gaussian density on `ℝ^d_x × ℝ^d_p`, normalised to unit mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPhaseDensity {
    pub dim: usize,
    pub x_mean: [f64; 3],
    pub x_sigma: [f64; 3],
    pub p_mean: [f64; 3],
    pub p_sigma: [f64; 3],
}

impl GaussianPhaseDensity {
    /// Isotropic density with the same width on every axis.
    pub fn isotropic(
        dim: usize,
        x_mean: [f64; 3],
        x_sigma: f64,
        p_mean: [f64; 3],
        p_sigma: f64,
    ) -> Self {
        let mut xs = [0.0; 3];
        let mut ps = [0.0; 3];
        for a in 0..dim {
            xs[a] = x_sigma;
            ps[a] = p_sigma;
        }
        GaussianPhaseDensity {
            dim,
            x_mean,
            x_sigma: xs,
            p_mean,
            p_sigma: ps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Kinetic(format!(
                "f_I dimension {} outside 1..3",
                self.dim
            )));
        }
        for a in 0..self.dim {
            if !(self.x_sigma[a] > 0.0 && self.p_sigma[a] > 0.0) {
                return Err(Error::Kinetic("f_I widths must be positive".into()));
            }
        }
        Ok(())
    }

    /// Density value at `(x, p)` on the whole space.
    pub fn value(&self, x: &[f64; 3], p: &[f64; 3]) -> f64 {
        let mut v = 1.0;
        for a in 0..self.dim {
            v *= gauss(x[a] - self.x_mean[a], self.x_sigma[a])
                * gauss(p[a] - self.p_mean[a], self.p_sigma[a]);
        }
        v
    }
}

fn gauss(t: f64, s: f64) -> f64 {
    (-(t * t) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    Halton,
    Random,
}

/// One phase-space point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: [f64; 3],
    pub p: [f64; 3],
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Draws `n` points from `f` (the first `n` of an infinite deterministic sequence).
pub fn sample_phase_points(
    f: &GaussianPhaseDensity,
    n: usize,
    scheme: SamplingScheme,
    seed: u64,
) -> Result<Vec<PhasePoint>> {
    f.validate()?;
    let d = f.dim;
    let normal = Normal::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    match scheme {
        SamplingScheme::Halton => {
            let shift: Vec<f64> = (0..2 * d).map(|_| rng.random::<f64>()).collect();
            for i in 0..n {
                let mut z = [0.0; 6];
                for (c, zc) in z.iter_mut().enumerate().take(2 * d) {
                    let u = (radical_inverse(i as u64 + 1, PRIMES[c]) + shift[c]).fract();
                    *zc = normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12));
                }
                out.push(point(f, &z));
            }
        }
        SamplingScheme::Random => {
            for _ in 0..n {
                let mut z = [0.0; 6];
                for zc in z.iter_mut().take(2 * d) {
                    *zc = rng.sample(StandardNormal);
                }
                out.push(point(f, &z));
            }
        }
    }
    Ok(out)
}

fn point(f: &GaussianPhaseDensity, z: &[f64; 6]) -> PhasePoint {
    let d = f.dim;
    let mut x = [0.0; 3];
    let mut p = [0.0; 3];
    for a in 0..d {
        x[a] = f.x_mean[a] + f.x_sigma[a] * z[a];
        p[a] = f.p_mean[a] + f.p_sigma[a] * z[d + a];
    }
    PhasePoint { x, p }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base2() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn moments_match() {
        let f = GaussianPhaseDensity::isotropic(2, [1.0, 2.0, 0.0], 0.3, [0.5, -0.2, 0.0], 0.7);
        for scheme in [SamplingScheme::Halton, SamplingScheme::Random] {
            let n = 20000;
            let pts = sample_phase_points(&f, n, scheme, 7).unwrap();
            let mx = pts.iter().map(|q| q.x[0]).sum::<f64>() / n as f64;
            let vp = pts.iter().map(|q| (q.p[1] + 0.2).powi(2)).sum::<f64>() / n as f64;
            assert!(
                (mx - 1.0).abs() < 3.0 * 0.3 / (n as f64).sqrt(),
                "{scheme:?} mean {mx}"
            );
            assert!((vp - 0.49).abs() < 0.03, "{scheme:?} var {vp}");
        }
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let f = GaussianPhaseDensity::isotropic(2, [0.0; 3], 1.0, [0.0; 3], 1.0);
        let a = sample_phase_points(&f, 50, SamplingScheme::Halton, 3).unwrap();
        let b = sample_phase_points(&f, 10, SamplingScheme::Halton, 3).unwrap();
        assert_eq!(&a[..10], &b[..]);
        let c = sample_phase_points(&f, 50, SamplingScheme::Random, 3).unwrap();
        let e = sample_phase_points(&f, 50, SamplingScheme::Random, 3).unwrap();
        assert_eq!(c, e);
    }
}
