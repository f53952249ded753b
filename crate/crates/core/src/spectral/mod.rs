//! Periodic grids, field containers and Fourier-space calculus.
//!
//! All fields live on a periodic box `[0, L_0) x ... x [0, L_{d-1})` sampled at
//! `x_i = i * h`. Values are stored row-major with the last axis fastest.
//! Derivatives and shifts are applied as diagonal multipliers in Fourier
//! space, so they are exact for band-limited data.

pub mod fft;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 8;

/// A periodic tensor-product grid in one, two or three dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    len: [f64; 3],
}

/// Builds a grid, rejecting odd or too-small point counts and non-positive lengths.
pub fn make_grid(dim: usize, n: &[usize], len: &[f64]) -> Result<Grid> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dimension {dim} outside 1..3")));
    }
    if n.len() != dim || len.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "expected {dim} point counts and lengths, got {} and {}",
            n.len(),
            len.len()
        )));
    }
    let mut nn = [1usize; 3];
    let mut ll = [1.0f64; 3];
    for a in 0..dim {
        if !n[a].is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "odd grid size {} on axis {a}",
                n[a]
            )));
        }
        if n[a] < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "grid size {} on axis {a} is below {MIN_POINTS}",
                n[a]
            )));
        }
        if !(len[a] > 0.0 && len[a].is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box length {} on axis {a} must be positive",
                len[a]
            )));
        }
        nn[a] = n[a];
        ll[a] = len[a];
    }
    Ok(Grid {
        dim,
        n: nn,
        len: ll,
    })
}

impl Grid {
    /// Convenience constructor taking `n` and `L` slices of equal length.
    pub fn new(n: &[usize], len: &[f64]) -> Result<Grid> {
        make_grid(n.len(), n, len)
    }

    /// Same point count and box length on every axis.
    pub fn cubic(dim: usize, n: usize, len: f64) -> Result<Grid> {
        make_grid(dim, &vec![n; dim], &vec![len; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.len[..self.dim]
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.len[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    /// Total number of grid points.
    pub fn size(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Box centre.
    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for (a, ca) in c.iter_mut().enumerate().take(self.dim) {
            *ca = 0.5 * self.len[a];
        }
        c
    }

    /// Angular wavenumbers along `axis` in FFT order: `2π/L * (0, 1, .., n/2-1, -n/2, .., -1)`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.n[axis];
        let dk = 2.0 * PI / self.len[axis];
        (0..n)
            .map(|i| {
                let m = if i < n / 2 {
                    i as isize
                } else {
                    i as isize - n as isize
                };
                m as f64 * dk
            })
            .collect()
    }

    /// Largest resolved wavenumber magnitude `π/h` on `axis`.
    pub fn k_max(&self, axis: usize) -> f64 {
        PI / self.spacing(axis)
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (a, &i) in idx.iter().enumerate().take(self.dim) {
            f = f * self.n[a] + i;
        }
        f
    }

    /// Physical coordinates of the point with flat index `flat`.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * self.spacing(a);
        }
        x
    }

    /// Minimal-image displacement `x - y` on the torus.
    pub fn periodic_delta(&self, x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for a in 0..self.dim {
            let l = self.len[a];
            let mut v = (x[a] - y[a]) % l;
            if v >= 0.5 * l {
                v -= l;
            } else if v < -0.5 * l {
                v += l;
            }
            d[a] = v;
        }
        d
    }

    /// Wraps a coordinate into `[0, L)`.
    pub fn wrap(&self, axis: usize, x: f64) -> f64 {
        let l = self.len[axis];
        let w = x.rem_euclid(l);
        if w >= l {
            0.0
        } else {
            w
        }
    }

    /// Fourier-space tables for this grid.
    pub fn spectral(&self) -> Spectral {
        Spectral::new(self)
    }
}

/// Per-point wavenumber tables (flat, FFT ordering).
#[derive(Clone, Debug)]
pub struct Spectral {
    grid: Grid,
    /// `k_a` at every flat index, Nyquist mode included.
    k: Vec<Vec<f64>>,
    /// `k_a` with the Nyquist mode of axis `a` zeroed (first derivatives).
    k_deriv: Vec<Vec<f64>>,
    /// `|k|^2` with Nyquist modes included (Laplacian).
    k2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let size = grid.size();
        let d = grid.dim();
        let axis_k: Vec<Vec<f64>> = (0..d).map(|a| grid.wavenumbers(a)).collect();
        let mut k = vec![vec![0.0; size]; d];
        let mut k_deriv = vec![vec![0.0; size]; d];
        let mut k2 = vec![0.0; size];
        for f in 0..size {
            let idx = grid.multi_index(f);
            for a in 0..d {
                let ka = axis_k[a][idx[a]];
                k[a][f] = ka;
                k_deriv[a][f] = if idx[a] == grid.n(a) / 2 { 0.0 } else { ka };
                k2[f] += ka * ka;
            }
        }
        Spectral {
            grid: *grid,
            k,
            k_deriv,
            k2,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k(&self, axis: usize) -> &[f64] {
        &self.k[axis]
    }

    pub fn k_deriv(&self, axis: usize) -> &[f64] {
        &self.k_deriv[axis]
    }

    pub fn k_squared(&self) -> &[f64] {
        &self.k2
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        fft::forward(&mut buf, self.grid.shape());
        buf
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        fft::inverse(buf, self.grid.shape());
    }

    /// `∂_axis` of the field whose transform is `hat`.
    pub fn derivative_from_hat(&self, hat: &[Complex64], axis: usize) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = hat
            .iter()
            .zip(&self.k_deriv[axis])
            .map(|(v, &k)| v * Complex64::new(0.0, k))
            .collect();
        self.inverse_in_place(&mut buf);
        buf
    }

    /// Gradient of raw complex values (one forward and `d` inverse transforms).
    pub fn gradient(&self, values: &[Complex64]) -> Vec<Vec<Complex64>> {
        let hat = self.forward(values);
        (0..self.grid.dim())
            .map(|a| self.derivative_from_hat(&hat, a))
            .collect()
    }

    /// Laplacian of raw complex values.
    pub fn laplacian(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut hat = self.forward(values);
        for (v, &k2) in hat.iter_mut().zip(&self.k2) {
            *v *= -k2;
        }
        self.inverse_in_place(&mut hat);
        hat
    }

    /// Divergence of a complex vector field given componentwise.
    pub fn divergence(&self, comps: &[Vec<Complex64>]) -> Vec<Complex64> {
        let size = self.grid.size();
        let mut acc = vec![Complex64::default(); size];
        for (a, c) in comps.iter().enumerate() {
            let hat = self.forward(c);
            for i in 0..size {
                acc[i] += hat[i] * Complex64::new(0.0, self.k_deriv[a][i]);
            }
        }
        self.inverse_in_place(&mut acc);
        acc
    }

    /// Phase factors `e^{i k·s}` realising a shift by `s`; Nyquist modes use `cos(k s)`
    /// so real fields stay real.
    pub fn shift_multiplier(&self, offset: &[f64]) -> Vec<Complex64> {
        let d = self.grid.dim();
        let size = self.grid.size();
        let mut out = vec![Complex64::new(1.0, 0.0); size];
        for a in 0..d {
            let s = offset[a];
            if s == 0.0 {
                continue;
            }
            for (f, o) in out.iter_mut().enumerate() {
                let k = self.k[a][f];
                let nyquist = self.k_deriv[a][f] == 0.0 && k != 0.0;
                let phase = if nyquist {
                    Complex64::new((k * s).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, k * s)
                };
                *o *= phase;
            }
        }
        out
    }

    /// Values of the band-limited interpolant at `x + offset` for every grid point.
    pub fn shift_from_hat(&self, hat: &[Complex64], offset: &[f64]) -> Vec<Complex64> {
        let m = self.shift_multiplier(offset);
        let mut buf: Vec<Complex64> = hat.iter().zip(&m).map(|(a, b)| a * b).collect();
        self.inverse_in_place(&mut buf);
        buf
    }
}

/// Complex scalar field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.size()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![Complex64::default(); grid.size()],
        }
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F: Fn([f64; 3]) -> Complex64>(grid: Grid, f: F) -> Self {
        let values = (0..grid.size()).map(|i| f(grid.position(i))).collect();
        ScalarField { grid, values }
    }

    pub fn from_real_fn<F: Fn([f64; 3]) -> f64>(grid: Grid, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Fails unless every imaginary part is at most `tol` in magnitude.
    pub fn require_real(&self, what: &'static str, tol: f64) -> Result<()> {
        let max_imag = self.max_imag();
        if max_imag > tol {
            return Err(Error::NotReal { what, max_imag });
        }
        Ok(())
    }

    /// Riemann sum `Σ v h^d`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `sup |self - other|`.
    pub fn max_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// L² norm of the Fourier coefficients, scaled to match `norm_l2` (Parseval).
    pub fn spectral_norm_l2(&self) -> f64 {
        let hat = self.grid.spectral().forward(&self.values);
        let n = self.grid.size() as f64;
        (hat.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume() / n).sqrt()
    }
}

/// Real vector field with `d` components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.size()) {
            return Err(Error::ShapeMismatch("vector component length".into()));
        }
        Ok(VectorField { grid, comps })
    }

    pub fn zeros(grid: Grid, ncomp: usize) -> Self {
        VectorField {
            grid,
            comps: vec![vec![0.0; grid.size()]; ncomp],
        }
    }

    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: Grid, ncomp: usize, f: F) -> Self {
        let mut comps = vec![vec![0.0; grid.size()]; ncomp];
        for i in 0..grid.size() {
            let v = f(grid.position(i));
            for (c, comp) in comps.iter_mut().enumerate() {
                comp[i] = v[c];
            }
        }
        VectorField { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &VectorField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Value at a grid point as a 3-vector (missing components are zero).
    pub fn at(&self, i: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (c, comp) in self.comps.iter().enumerate().take(3) {
            v[c] = comp[i];
        }
        v
    }
}

/// Two-component complex spinor field `u = (u_1, u_2)^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    comps: [Vec<Complex64>; 2],
}

impl SpinorField {
    pub fn new(grid: Grid, up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self> {
        if up.len() != grid.size() || down.len() != grid.size() {
            return Err(Error::ShapeMismatch("spinor component length".into()));
        }
        Ok(SpinorField {
            grid,
            comps: [up, down],
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = vec![Complex64::default(); grid.size()];
        SpinorField {
            grid,
            comps: [z.clone(), z],
        }
    }

    /// Scalar profile times a constant spinor `chi`.
    pub fn from_profile(profile: &ScalarField, chi: [Complex64; 2]) -> Self {
        let up = profile.values().iter().map(|v| v * chi[0]).collect();
        let down = profile.values().iter().map(|v| v * chi[1]).collect();
        SpinorField {
            grid: *profile.grid(),
            comps: [up, down],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn comp(&self, s: usize) -> &[Complex64] {
        &self.comps[s]
    }

    pub fn comp_mut(&mut self, s: usize) -> &mut [Complex64] {
        &mut self.comps[s]
    }

    pub fn comps(&self) -> &[Vec<Complex64>; 2] {
        &self.comps
    }

    pub fn into_comps(self) -> [Vec<Complex64>; 2] {
        self.comps
    }

    /// `⟨self, other⟩ = Σ_s Σ_x conj(self_s) other_s h^d`.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        let mut acc = Complex64::default();
        for s in 0..2 {
            for (a, b) in self.comps[s].iter().zip(&other.comps[s]) {
                acc += a.conj() * b;
            }
        }
        acc * self.grid.cell_volume()
    }

    pub fn norm_sqr(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        s * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, a: Complex64) {
        for c in self.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
    }

    /// Pointwise `|u_1|² + |u_2|²`.
    pub fn density(&self) -> Vec<f64> {
        self.comps[0]
            .iter()
            .zip(&self.comps[1])
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    pub fn max_diff(&self, other: &SpinorField) -> f64 {
        (0..2)
            .flat_map(|s| {
                self.comps[s]
                    .iter()
                    .zip(&other.comps[s])
                    .map(|(a, b)| (a - b).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// `∂_axis field` via multiplication by `i k_axis` (Nyquist mode dropped).
pub fn spectral_derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = *field.grid();
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: grid.dim(),
        });
    }
    let sp = grid.spectral();
    let hat = sp.forward(field.values());
    ScalarField::new(grid, sp.derivative_from_hat(&hat, axis))
}

/// `field(· + offset)` via the phase factor `e^{i k·offset}`; periodic and exact for
/// band-limited input.
pub fn spectral_shift(field: &ScalarField, offset: &[f64]) -> Result<ScalarField> {
    let grid = *field.grid();
    if offset.len() != grid.dim() {
        return Err(Error::ShapeMismatch(format!(
            "offset has {} components on a {}-dimensional grid",
            offset.len(),
            grid.dim()
        )));
    }
    if offset.iter().any(|v| !v.is_finite()) {
        return Err(Error::ShapeMismatch("non-finite shift".into()));
    }
    let sp = grid.spectral();
    let hat = sp.forward(field.values());
    ScalarField::new(grid, sp.shift_from_hat(&hat, offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn make_grid_examples() {
        let g = make_grid(1, &[8], &[2.0 * PI]).unwrap();
        assert!((g.spacing(0) - PI / 4.0).abs() < 1e-15);
        let k = g.wavenumbers(0);
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let g2 = make_grid(2, &[16, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
        assert_eq!(g2.size(), 256);
        let err = make_grid(1, &[7], &[1.0]).unwrap_err();
        assert!(err.to_string().contains("odd grid size"));
        assert!(make_grid(4, &[8; 4], &[1.0; 4]).is_err());
        assert!(make_grid(1, &[8], &[0.0]).is_err());
        assert!(make_grid(1, &[6], &[1.0]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let g = Grid::cubic(1, 64, 2.0 * PI).unwrap();
        let s = ScalarField::from_real_fn(g, |x| x[0].sin());
        let d = spectral_derivative(&s, 0).unwrap();
        let cosx = ScalarField::from_real_fn(g, |x| x[0].cos());
        assert!(d.max_diff(&cosx) <= 1e-12);

        let k = ScalarField::from_fn(g, |_| c(3.5));
        assert!(spectral_derivative(&k, 0).unwrap().max_abs() < 1e-14);

        let e = ScalarField::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let de = spectral_derivative(&e, 0).unwrap();
        let expect = ScalarField::from_fn(g, |x| {
            Complex64::new(0.0, 3.0) * Complex64::from_polar(1.0, 3.0 * x[0])
        });
        assert!(de.max_diff(&expect) < 1e-12);

        assert!(matches!(
            spectral_derivative(&s, 1),
            Err(Error::AxisOutOfRange { .. })
        ));
    }

    #[test]
    fn shift_examples() {
        let g = Grid::cubic(1, 64, 2.0 * PI).unwrap();
        let s = ScalarField::from_real_fn(g, |x| x[0].sin());
        let sh = spectral_shift(&s, &[PI / 2.0]).unwrap();
        let cosx = ScalarField::from_real_fn(g, |x| x[0].cos());
        assert!(sh.max_diff(&cosx) < 1e-12);
        assert!(spectral_shift(&s, &[0.0]).unwrap().max_diff(&s) < 1e-14);
        assert!(spectral_shift(&s, &[2.0 * PI]).unwrap().max_diff(&s) < 1e-12);
        assert!(spectral_shift(&s, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn parseval_2d() {
        let g = Grid::new(&[16, 24], &[3.0, 5.0]).unwrap();
        let f = ScalarField::from_fn(g, |x| {
            Complex64::new((x[0] * 2.1).sin() + x[1].cos().powi(3), (x[0] * x[1]).cos())
        });
        let a = f.norm_l2();
        let b = f.spectral_norm_l2();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    fn band_limited(coef: &[(f64, f64)], g: Grid) -> ScalarField {
        ScalarField::from_fn(g, |x| {
            let mut v = Complex64::default();
            for (m, &(a, b)) in coef.iter().enumerate() {
                let k = (m + 1) as f64 * 2.0 * PI / g.length(0);
                let ky = if g.dim() > 1 {
                    m as f64 * 2.0 * PI / g.length(1)
                } else {
                    0.0
                };
                v += Complex64::new(a, b) * Complex64::from_polar(1.0, k * x[0] - ky * x[1]);
            }
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fft_roundtrip(vals in proptest::collection::vec(-1.0f64..1.0, 2 * 8 * 12)) {
            let shape = [8, 12];
            let data: Vec<Complex64> = vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            let mut buf = data.clone();
            fft::forward(&mut buf, &shape);
            fft::inverse(&mut buf, &shape);
            let scale = data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            for (a, b) in buf.iter().zip(&data) {
                prop_assert!((a - b).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn derivative_commutes_with_shift(
            coef in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
            sx in -3.0f64..3.0, sy in -3.0f64..3.0,
        ) {
            let g = Grid::new(&[32, 32], &[2.0 * PI, 4.0]).unwrap();
            let f = band_limited(&coef, g);
            for axis in 0..2 {
                let a = spectral_shift(&spectral_derivative(&f, axis).unwrap(), &[sx, sy]).unwrap();
                let b = spectral_derivative(&spectral_shift(&f, &[sx, sy]).unwrap(), axis).unwrap();
                prop_assert!(a.max_diff(&b) <= 1e-10);
            }
        }
    }
}
