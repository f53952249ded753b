//! Discretised phase space: a position grid times a centred momentum grid.
//!
//! The momentum axis `a` carries `n_ξ` points `ξ_m = (m - n_ξ/2) Δξ` in the box
//! `[-Ξ, Ξ)`. Its conjugate variable `y` (the argument of the density-matrix
//! kernel) lives on `y_j = j Δy`, `j` in FFT order, with `Δy = π/Ξ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, Spectral};

/// Phase grids beyond this many points are refused (memory guard).
pub const MAX_PHASE_POINTS: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    x: Grid,
    /// Momentum axes; lengths are `2Ξ`, positions are ignored in favour of the
    /// centred values returned by [`PhaseGrid::xi`].
    xi: Grid,
    hbar: f64,
}

impl PhaseGrid {
    /// General constructor. Requires `Ξ_a ≥ ħ k_max,a` on every axis.
    pub fn new(x: Grid, hbar: f64, xi_box: &[f64], n_xi: &[usize]) -> Result<PhaseGrid> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::PhaseSpace(format!("hbar = {hbar} must be positive")));
        }
        let d = x.dim();
        if xi_box.len() != d || n_xi.len() != d {
            return Err(Error::PhaseSpace(format!("expected {d} momentum axes")));
        }
        for a in 0..d {
            let need = hbar * x.k_max(a);
            if xi_box[a] < need * (1.0 - 1e-12) {
                return Err(Error::PhaseSpace(format!(
                    "momentum box {} on axis {a} is below hbar*k_max = {need}",
                    xi_box[a]
                )));
            }
        }
        let lens: Vec<f64> = xi_box.iter().map(|b| 2.0 * b).collect();
        let xi = Grid::new(n_xi, &lens)?;
        let total = x.size().saturating_mul(xi.size());
        if total > MAX_PHASE_POINTS {
            return Err(Error::PhaseSpace(format!(
                "{total} phase-space points exceed the limit {MAX_PHASE_POINTS}"
            )));
        }
        let pg = PhaseGrid { x, xi, hbar };
        for a in 0..d {
            let reach = 0.5 * hbar * pg.y_max(a);
            if reach > 0.5 * x.length(a) * (1.0 + 1e-12) {
                return Err(Error::PhaseSpace(format!(
                    "shift aliasing on axis {a}: hbar*y_max/2 = {reach} exceeds half the box"
                )));
            }
        }
        Ok(pg)
    }

    /// `Ξ = 1.25 ħ k_max` with `n_ξ` points per axis.
    pub fn padded(x: Grid, hbar: f64, n_xi: usize) -> Result<PhaseGrid> {
        let d = x.dim();
        let b: Vec<f64> = (0..d).map(|a| 1.25 * hbar * x.k_max(a)).collect();
        PhaseGrid::new(x, hbar, &b, &vec![n_xi; d])
    }

    /// `Ξ = ħ k_max`: every shift `ħy/2` is a multiple of half a cell, so the
    /// transform reduces to index rolls of precomputed half-cell shifts.
    /// `n_ξ = 2 n_x` makes the `y` window exactly one period of the kernel.
    pub fn aligned(x: Grid, hbar: f64, n_xi: usize) -> Result<PhaseGrid> {
        let d = x.dim();
        let b: Vec<f64> = (0..d).map(|a| hbar * x.k_max(a)).collect();
        PhaseGrid::new(x, hbar, &b, &vec![n_xi; d])
    }

    /// Aligned grid whose `y` window holds a Gaussian kernel of packet width
    /// `sigma` down to `1e-10`, capped at one full period.
    pub fn aligned_for_width(x: Grid, hbar: f64, sigma: f64) -> Result<PhaseGrid> {
        let half = 9.6 * sigma;
        let mut n = 8;
        for a in 0..x.dim() {
            let h = x.spacing(a);
            let want = (2.0 * half / h).ceil() as usize;
            let na = want.min(2 * x.n(a)).max(8);
            n = n.max(na + na % 2);
        }
        PhaseGrid::aligned(x, hbar, n)
    }

    pub fn x_grid(&self) -> &Grid {
        &self.x
    }

    pub fn xi_grid(&self) -> &Grid {
        &self.xi
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn xi_box(&self, axis: usize) -> f64 {
        0.5 * self.xi.length(axis)
    }

    pub fn n_xi(&self, axis: usize) -> usize {
        self.xi.n(axis)
    }

    pub fn d_xi(&self, axis: usize) -> f64 {
        self.xi.spacing(axis)
    }

    pub fn d_y(&self, axis: usize) -> f64 {
        PI / self.xi_box(axis)
    }

    pub fn y_max(&self, axis: usize) -> f64 {
        0.5 * self.n_xi(axis) as f64 * self.d_y(axis)
    }

    /// Points per momentum slab (`n_ξ^d`).
    pub fn xi_size(&self) -> usize {
        self.xi.size()
    }

    pub fn size(&self) -> usize {
        self.x.size() * self.xi.size()
    }

    /// Phase-space cell volume `h^d Δξ^d`.
    pub fn cell_volume(&self) -> f64 {
        self.x.cell_volume() * self.xi.cell_volume()
    }

    /// Centred momentum value of index `m` on `axis`.
    pub fn xi(&self, axis: usize, m: usize) -> f64 {
        (m as f64 - 0.5 * self.n_xi(axis) as f64) * self.d_xi(axis)
    }

    /// Momentum vector of flat momentum index `m`.
    pub fn xi_at(&self, m: usize) -> [f64; 3] {
        let idx = self.xi.multi_index(m);
        let mut out = [0.0; 3];
        for a in 0..self.dim() {
            out[a] = self.xi(a, idx[a]);
        }
        out
    }

    /// Signed FFT-order index of `j` on `axis`.
    pub(crate) fn signed(&self, axis: usize, j: usize) -> i64 {
        let n = self.n_xi(axis);
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// `ħ y_j / 2` for flat `y` index `j` (FFT order).
    pub fn half_shift(&self, j: usize) -> [f64; 3] {
        let idx = self.xi.multi_index(j);
        let mut out = [0.0; 3];
        for a in 0..self.dim() {
            out[a] = 0.5 * self.hbar * self.signed(a, idx[a]) as f64 * self.d_y(a);
        }
        out
    }

    /// Whether any axis of `y_j` sits on the unpaired sample `-n_ξ/2`.
    pub(crate) fn is_nyquist(&self, j: usize) -> bool {
        let idx = self.xi.multi_index(j);
        (0..self.dim()).any(|a| idx[a] == self.n_xi(a) / 2)
    }

    /// Flat index of `-y_j`.
    pub(crate) fn negate(&self, j: usize) -> usize {
        let idx = self.xi.multi_index(j);
        let mut neg = [0usize; 3];
        for a in 0..self.dim() {
            let n = self.n_xi(a);
            neg[a] = (n - idx[a]) % n;
        }
        self.xi.flat_index(&neg[..self.dim()])
    }

    /// `(-1)^{Σ j_a}`: the modulation that centres the momentum grid.
    pub(crate) fn parity(&self, j: usize) -> f64 {
        let idx = self.xi.multi_index(j);
        let s: usize = idx[..self.dim()].iter().sum();
        if s.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Integer `r` with `ħΔy = r h` on every axis, if the grid is aligned.
    pub fn alignment(&self) -> Option<Vec<i64>> {
        (0..self.dim())
            .map(|a| {
                let r = self.hbar * self.d_y(a) / self.x.spacing(a);
                let ri = r.round();
                if ri >= 1.0 && (r - ri).abs() < 1e-9 {
                    Some(ri as i64)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Relative weight `e^{-min(L/2, Ξ)^2/ħ}` of a smoothing Gaussian at the box edge.
    pub fn smoothing_wrap_tail(&self) -> f64 {
        let mut r = f64::INFINITY;
        for a in 0..self.dim() {
            r = r.min(0.5 * self.x.length(a)).min(self.xi_box(a));
        }
        (-r * r / self.hbar).exp()
    }

    pub(crate) fn check_x(&self, grid: &Grid) -> Result<()> {
        if grid != &self.x {
            return Err(Error::ShapeMismatch(
                "field grid differs from the phase grid".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluates a grid field at `x ± ħy/2` for every `x` and `y`.
///
/// Aligned grids reuse `2^d` half-cell shifted copies and index rolls; other
/// grids fall back to one inverse FFT per requested column.
pub(crate) enum Shifter {
    Aligned {
        ratio: Vec<i64>,
        /// `variants[v]` is the field shifted by `h_a/2` on every axis `a`
        /// whose bit is set in `v` (bit `d-1-a`).
        variants: Vec<Vec<Complex64>>,
    },
    General {
        spectral: Spectral,
        hat: Vec<Complex64>,
    },
}

/// Index tables for one aligned column: variant number and rolled flat indices.
pub(crate) struct Gather {
    pub variant: usize,
    pub index: Vec<u32>,
}

/// Gather tables realising `x + sign ħ y_j / 2` on an aligned grid.
pub(crate) fn aligned_gather(pg: &PhaseGrid, ratio: &[i64], j: usize, sign: i64) -> Gather {
    let x = pg.x_grid();
    let d = x.dim();
    let jdx = pg.xi_grid().multi_index(j);
    let mut variant = 0usize;
    let mut rolls: Vec<Vec<usize>> = Vec::with_capacity(d);
    for a in 0..d {
        let s = sign * pg.signed(a, jdx[a]) * ratio[a];
        let q = s.div_euclid(2);
        let p = s.rem_euclid(2) as usize;
        variant |= p << (d - 1 - a);
        let n = x.n(a) as i64;
        rolls.push((0..n).map(|i| (i + q).rem_euclid(n) as usize).collect());
    }
    let size = x.size();
    let mut index = Vec::with_capacity(size);
    match d {
        1 => index.extend(rolls[0].iter().map(|&i| i as u32)),
        2 => {
            let n1 = x.n(1);
            for &i0 in &rolls[0] {
                for &i1 in &rolls[1] {
                    index.push((i0 * n1 + i1) as u32);
                }
            }
        }
        _ => {
            let (n1, n2) = (x.n(1), x.n(2));
            for &i0 in &rolls[0] {
                for &i1 in &rolls[1] {
                    for &i2 in &rolls[2] {
                        index.push(((i0 * n1 + i1) * n2 + i2) as u32);
                    }
                }
            }
        }
    }
    Gather { variant, index }
}

/// The `2^d` half-cell shifted copies of `values`.
pub(crate) fn half_cell_variants(spectral: &Spectral, values: &[Complex64]) -> Vec<Vec<Complex64>> {
    let grid = spectral.grid();
    let d = grid.dim();
    let hat = spectral.forward(values);
    (0..1usize << d)
        .map(|v| {
            if v == 0 {
                return values.to_vec();
            }
            let mut off = [0.0; 3];
            for (a, o) in off.iter_mut().enumerate().take(d) {
                if v >> (d - 1 - a) & 1 == 1 {
                    *o = 0.5 * grid.spacing(a);
                }
            }
            spectral.shift_from_hat(&hat, &off[..d])
        })
        .collect()
}

impl Shifter {
    pub fn new(pg: &PhaseGrid, spectral: &Spectral, values: &[Complex64]) -> Shifter {
        match pg.alignment() {
            Some(ratio) => Shifter::Aligned {
                ratio,
                variants: half_cell_variants(spectral, values),
            },
            None => Shifter::General {
                spectral: spectral.clone(),
                hat: spectral.forward(values),
            },
        }
    }

    /// Values at `x + sign ħy_j/2` for all grid points `x`.
    pub fn column(&self, pg: &PhaseGrid, j: usize, sign: f64) -> Vec<Complex64> {
        match self {
            Shifter::Aligned { ratio, variants } => {
                let g = aligned_gather(pg, ratio, j, sign as i64);
                let src = &variants[g.variant];
                g.index.iter().map(|&i| src[i as usize]).collect()
            }
            Shifter::General { spectral, hat } => {
                let s = pg.half_shift(j);
                let off: Vec<f64> = s[..pg.dim()].iter().map(|v| sign * v).collect();
                spectral.shift_from_hat(hat, &off)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_shifts_match_spectral_shifts() {
        let x = Grid::new(&[16, 8], &[3.0, 2.0]).unwrap();
        let pg = PhaseGrid::aligned(x, 0.3, 16).unwrap();
        assert_eq!(pg.alignment(), Some(vec![1, 1]));
        let sp = x.spectral();
        let vals: Vec<Complex64> = (0..x.size())
            .map(|i| {
                let p = x.position(i);
                Complex64::new(
                    (2.0 * PI * p[0] / 3.0).sin() + (2.0 * PI * p[1] / 2.0).cos(),
                    (4.0 * PI * p[0] / 3.0).cos(),
                )
            })
            .collect();
        let fast = Shifter::new(&pg, &sp, &vals);
        let slow = Shifter::General {
            spectral: sp.clone(),
            hat: sp.forward(&vals),
        };
        for j in [0, 1, 3, 8, 17, 40, 127, 200] {
            for sign in [1.0, -1.0] {
                let a = fast.column(&pg, j, sign);
                let b = slow.column(&pg, j, sign);
                let err = a
                    .iter()
                    .zip(&b)
                    .fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
                assert!(err < 1e-12, "column {j} sign {sign}: {err}");
            }
        }
    }

    #[test]
    fn rejects_small_box_and_aliasing() {
        let x = Grid::cubic(1, 32, 4.0).unwrap();
        let kmax = x.k_max(0);
        assert!(PhaseGrid::new(x, 0.5, &[0.4 * kmax], &[32]).is_err());
        // n_ξ = 2 n_x is exactly one kernel period; more would alias
        assert!(PhaseGrid::aligned(x, 0.5, 64).is_ok());
        assert!(PhaseGrid::aligned(x, 0.5, 80).is_err());
    }

    #[test]
    fn momentum_axis_is_centred() {
        let x = Grid::cubic(1, 16, 2.0).unwrap();
        let pg = PhaseGrid::aligned(x, 1.0, 16).unwrap();
        assert_eq!(pg.xi(0, 8), 0.0);
        assert!((pg.xi(0, 0) + pg.xi_box(0)).abs() < 1e-12);
        assert!((pg.d_xi(0) * pg.d_y(0) - 2.0 * PI / 16.0).abs() < 1e-14);
        assert_eq!(pg.negate(3), 13);
        assert_eq!(pg.negate(8), 8);
        assert!(pg.is_nyquist(8));
    }
}
