//! Weighted particle ensembles on the torus.

use crate::error::{Error, Result};
use crate::spectral::Grid;

use super::sampling::PhasePoint;

/// Weighted characteristics `(x_i, p_i, w_i)`; positions live in `[0, L)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    grid: Grid,
    x: Vec<[f64; 3]>,
    p: Vec<[f64; 3]>,
    w: Vec<f64>,
}

impl ParticleEnsemble {
    /// Wraps positions into the box of `grid`; unused components are zeroed.
    pub fn new(grid: Grid, x: Vec<[f64; 3]>, p: Vec<[f64; 3]>, w: Vec<f64>) -> Result<Self> {
        if x.len() != p.len() || x.len() != w.len() {
            return Err(Error::Kinetic(format!(
                "{} positions, {} momenta, {} weights",
                x.len(),
                p.len(),
                w.len()
            )));
        }
        if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Kinetic(
                "weights must be finite and non-negative".into(),
            ));
        }
        if x.iter().chain(&p).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Kinetic("non-finite particle coordinate".into()));
        }
        let mut e = ParticleEnsemble { grid, x, p, w };
        let d = grid.dim();
        for (xi, pi) in e.x.iter_mut().zip(e.p.iter_mut()) {
            for a in d..3 {
                xi[a] = 0.0;
                pi[a] = 0.0;
            }
        }
        e.wrap();
        Ok(e)
    }

    /// Equal weights `mass / N`.
    pub fn from_points(grid: Grid, points: &[PhasePoint], mass: f64) -> Result<Self> {
        let n = points.len().max(1);
        ParticleEnsemble::new(
            grid,
            points.iter().map(|q| q.x).collect(),
            points.iter().map(|q| q.p).collect(),
            vec![mass / n as f64; points.len()],
        )
    }

    pub(crate) fn wrap(&mut self) {
        let d = self.grid.dim();
        for x in self.x.iter_mut() {
            for (a, xa) in x.iter_mut().enumerate().take(d) {
                *xa = self.grid.wrap(a, *xa);
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.x
    }

    pub fn momenta(&self) -> &[[f64; 3]] {
        &self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [[f64; 3]], &mut [[f64; 3]]) {
        (&mut self.x, &mut self.p)
    }

    /// `M = Σ w_i`.
    pub fn mass(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Multiplies every weight by `s ≥ 0`.
    pub fn scale_weights(&mut self, s: f64) {
        for w in self.w.iter_mut() {
            *w *= s;
        }
    }

    /// `½ Σ w_i |p_i|²`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self
            .w
            .iter()
            .zip(&self.p)
            .map(|(w, p)| w * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]))
            .sum::<f64>()
    }

    /// `Σ w_i p_i`.
    pub fn momentum(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for (w, p) in self.w.iter().zip(&self.p) {
            for a in 0..3 {
                m[a] += w * p[a];
            }
        }
        m
    }

    /// `Σ w_i φ(x_i, p_i)`.
    pub fn pair<F: Fn(&[f64; 3], &[f64; 3]) -> f64>(&self, phi: F) -> f64 {
        self.x
            .iter()
            .zip(&self.p)
            .zip(&self.w)
            .map(|((x, p), w)| w * phi(x, p))
            .sum()
    }

    /// Weighted mean and standard deviation of positions (minimal image about
    /// `reference`) and momenta, per axis.
    pub fn spread(&self, reference: &[f64; 3]) -> ([f64; 3], [f64; 3], [f64; 3], [f64; 3]) {
        let m = self.mass();
        let d = self.dim();
        let mut mx = [0.0; 3];
        let mut mp = [0.0; 3];
        let mut sx = [0.0; 3];
        let mut sp = [0.0; 3];
        if m == 0.0 {
            return (mx, sx, mp, sp);
        }
        for ((x, p), w) in self.x.iter().zip(&self.p).zip(&self.w) {
            let dx = self.grid.periodic_delta(x, reference);
            for a in 0..d {
                mx[a] += w * dx[a];
                mp[a] += w * p[a];
            }
        }
        for a in 0..d {
            mx[a] /= m;
            mp[a] /= m;
        }
        for ((x, p), w) in self.x.iter().zip(&self.p).zip(&self.w) {
            let dx = self.grid.periodic_delta(x, reference);
            for a in 0..d {
                sx[a] += w * (dx[a] - mx[a]).powi(2);
                sp[a] += w * (p[a] - mp[a]).powi(2);
            }
        }
        for a in 0..d {
            sx[a] = (sx[a] / m).sqrt();
            sp[a] = (sp[a] / m).sqrt();
            mx[a] = self.grid.wrap(a, reference[a] + mx[a]);
        }
        (mx, sx, mp, sp)
    }
}
