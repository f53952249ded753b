//! Scalar Wigner functions and Wigner matrices of mixed spinor states.
//!
//! `F(x, ξ) = (2π)^{-d} ∫ e^{-iξ·y} Σ_j λ_j u_j(x + ħy/2) ⊗ ū_j(x - ħy/2) dy`
//!
//! The kernel is tabulated column by column in `y` (one shifted copy of every
//! member per column) and then transformed row by row in `y`. With the
//! `(2π)^{-d}` prefactor the momentum marginal is exactly the density.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::phase::{aligned_gather, half_cell_variants, PhaseGrid};
use crate::error::{Error, Result};
use crate::par;
use crate::quantum::MixedState;
use crate::spectral::fft::{self, Direction};

/// Columns of `y` computed per parallel batch.
const COLUMN_BLOCK: usize = 64;

/// Real scalar Wigner function on a phase grid, stored `[x][ξ]` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerFunction {
    phase: PhaseGrid,
    values: Vec<f64>,
}

impl WignerFunction {
    pub fn new(phase: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != phase.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} phase-space points",
                values.len(),
                phase.size()
            )));
        }
        Ok(WignerFunction { phase, values })
    }

    pub fn zeros(phase: PhaseGrid) -> Self {
        WignerFunction {
            phase,
            values: vec![0.0; phase.size()],
        }
    }

    pub fn phase(&self) -> &PhaseGrid {
        &self.phase
    }

    pub fn hbar(&self) -> f64 {
        self.phase.hbar()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Momentum slab at position index `ix`.
    pub fn row(&self, ix: usize) -> &[f64] {
        let m = self.phase.xi_size();
        &self.values[ix * m..(ix + 1) * m]
    }

    /// `∫∫ f dx dξ`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.phase.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &WignerFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Hermitian 2×2 Wigner matrix; `comps` are the entries 11, 12, 21, 22.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerMatrix {
    phase: PhaseGrid,
    comps: [Vec<Complex64>; 4],
}

impl WignerMatrix {
    pub fn new(phase: PhaseGrid, comps: [Vec<Complex64>; 4]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != phase.size()) {
            return Err(Error::ShapeMismatch(
                "Wigner matrix entries do not match the phase grid".into(),
            ));
        }
        Ok(WignerMatrix { phase, comps })
    }

    pub fn zeros(phase: PhaseGrid) -> Self {
        let z = vec![Complex64::default(); phase.size()];
        WignerMatrix {
            phase,
            comps: [z.clone(), z.clone(), z.clone(), z],
        }
    }

    pub fn phase(&self) -> &PhaseGrid {
        &self.phase
    }

    pub fn hbar(&self) -> f64 {
        self.phase.hbar()
    }

    /// Entry `(a, b)` with `a, b ∈ {0, 1}`.
    pub fn entry(&self, a: usize, b: usize) -> &[Complex64] {
        &self.comps[2 * a + b]
    }

    pub fn comps(&self) -> &[Vec<Complex64>; 4] {
        &self.comps
    }

    pub fn into_comps(self) -> [Vec<Complex64>; 4] {
        self.comps
    }

    /// `Tr F`, which must be real.
    pub fn trace(&self) -> WignerFunction {
        let values = self.comps[0]
            .iter()
            .zip(&self.comps[3])
            .map(|(a, b)| (a + b).re)
            .collect();
        WignerFunction {
            phase: self.phase,
            values,
        }
    }

    /// `sup |F - F†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.phase.size() {
            m = m
                .max(self.comps[0][i].im.abs())
                .max(self.comps[3][i].im.abs());
            m = m.max((self.comps[1][i] - self.comps[2][i].conj()).norm());
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.norm()))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Scalar,
    Matrix,
}

impl Kind {
    fn pairs(self) -> &'static [(usize, usize)] {
        match self {
            Kind::Scalar => &[(0, 0), (1, 1)],
            Kind::Matrix => &[(0, 0), (0, 1), (1, 0), (1, 1)],
        }
    }

    fn outputs(self) -> usize {
        match self {
            Kind::Scalar => 1,
            Kind::Matrix => 4,
        }
    }

    /// Output slot for pair number `p`.
    fn slot(self, p: usize) -> usize {
        match self {
            Kind::Scalar => 0,
            Kind::Matrix => p,
        }
    }
}

/// Relative spectral mass that the momentum box cannot represent.
fn unresolved_mass(state: &MixedState, pg: &PhaseGrid) -> f64 {
    let grid = state.grid();
    let sp = grid.spectral();
    let d = grid.dim();
    let hbar = pg.hbar();
    let size = grid.size();
    let mut outside = vec![false; size];
    for (f, o) in outside.iter_mut().enumerate() {
        let idx = grid.multi_index(f);
        for a in 0..d {
            let k = sp.k(a)[f];
            if idx[a] == grid.n(a) / 2 || (hbar * k).abs() > pg.xi_box(a) {
                *o = true;
            }
        }
    }
    let mut lost = 0.0;
    let mut total = 0.0;
    for (w, u) in state.weights().iter().zip(state.members()) {
        for s in 0..2 {
            let hat = sp.forward(u.comp(s));
            for (f, v) in hat.iter().enumerate() {
                let m = w * v.norm_sqr();
                total += m;
                if outside[f] {
                    lost += m;
                }
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        lost / total
    }
}

/// Shifted member data shared by all columns.
enum MemberData {
    /// Per member, per spin, the `2^d` half-cell variants.
    Aligned {
        ratio: Vec<i64>,
        variants: Vec<[Vec<Vec<Complex64>>; 2]>,
    },
    /// Per member, per spin, the Fourier coefficients.
    General { hats: Vec<[Vec<Complex64>; 2]> },
}

fn member_data(state: &MixedState, pg: &PhaseGrid) -> MemberData {
    let sp = state.grid().spectral();
    match pg.alignment() {
        Some(ratio) => {
            let variants = par::map(state.members(), |u| {
                [
                    half_cell_variants(&sp, u.comp(0)),
                    half_cell_variants(&sp, u.comp(1)),
                ]
            });
            MemberData::Aligned { ratio, variants }
        }
        None => {
            let hats = par::map(state.members(), |u| {
                [sp.forward(u.comp(0)), sp.forward(u.comp(1))]
            });
            MemberData::General { hats }
        }
    }
}

/// Kernel column `y_j` for every `x`, one vector per output slot.
fn kernel_column(
    state: &MixedState,
    pg: &PhaseGrid,
    data: &MemberData,
    kind: Kind,
    j: usize,
) -> Vec<Vec<Complex64>> {
    let nx = pg.x_grid().size();
    let mut out = vec![vec![Complex64::default(); nx]; kind.outputs()];
    let weights = state.weights();
    match data {
        MemberData::Aligned { ratio, variants } => {
            let gp = aligned_gather(pg, ratio, j, 1);
            let gm = aligned_gather(pg, ratio, j, -1);
            for (m, w) in weights.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                for (p, &(a, b)) in kind.pairs().iter().enumerate() {
                    let plus = &variants[m][a][gp.variant];
                    let minus = &variants[m][b][gm.variant];
                    let o = &mut out[kind.slot(p)];
                    for x in 0..nx {
                        o[x] +=
                            *w * plus[gp.index[x] as usize] * minus[gm.index[x] as usize].conj();
                    }
                }
            }
        }
        MemberData::General { hats } => {
            let sp = state.grid().spectral();
            let d = pg.dim();
            let s = pg.half_shift(j);
            let plus_off: Vec<f64> = s[..d].to_vec();
            let minus_off: Vec<f64> = s[..d].iter().map(|v| -v).collect();
            for (m, w) in weights.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let plus = [
                    sp.shift_from_hat(&hats[m][0], &plus_off),
                    sp.shift_from_hat(&hats[m][1], &plus_off),
                ];
                let minus = [
                    sp.shift_from_hat(&hats[m][0], &minus_off),
                    sp.shift_from_hat(&hats[m][1], &minus_off),
                ];
                for (p, &(a, b)) in kind.pairs().iter().enumerate() {
                    let o = &mut out[kind.slot(p)];
                    for x in 0..nx {
                        o[x] += *w * plus[a][x] * minus[b][x].conj();
                    }
                }
            }
        }
    }
    out
}

/// Full kernel tables `[x][y]` (y in FFT order), one per output slot.
fn kernel(state: &MixedState, pg: &PhaseGrid, kind: Kind) -> Vec<Vec<Complex64>> {
    let nx = pg.x_grid().size();
    let ny = pg.xi_size();
    let data = member_data(state, pg);
    let mut tables = vec![vec![Complex64::default(); nx * ny]; kind.outputs()];
    let mut start = 0;
    while start < ny {
        let stop = (start + COLUMN_BLOCK).min(ny);
        let cols = par::map_range(stop - start, |c| {
            kernel_column(state, pg, &data, kind, start + c)
        });
        for (c, col) in cols.into_iter().enumerate() {
            let j = start + c;
            for (slot, values) in col.into_iter().enumerate() {
                let t = &mut tables[slot];
                for (x, v) in values.into_iter().enumerate() {
                    t[x * ny + j] = v;
                }
            }
        }
        start = stop;
    }
    tables
}

/// `(2π)^{-d} Δy^d`.
fn prefactor(pg: &PhaseGrid) -> f64 {
    (0..pg.dim()).map(|a| pg.d_y(a) / (2.0 * PI)).product()
}

/// Turns kernel rows into momentum rows in place. `partner[s]` is the slot
/// whose conjugate at `-y` pairs with slot `s` (Hermitian symmetry).
pub(crate) fn rows_to_momentum(pg: &PhaseGrid, tables: &mut [Vec<Complex64>], partner: &[usize]) {
    let ny = pg.xi_size();
    let nx = pg.x_grid().size();
    let c = prefactor(pg);
    let shape = pg.xi_grid().shape().to_vec();
    let axes: Vec<usize> = (0..shape.len()).collect();
    let nyq: Vec<usize> = (0..ny).filter(|&j| pg.is_nyquist(j)).collect();
    let sign: Vec<f64> = (0..ny).map(|j| pg.parity(j) * c).collect();
    let neg: Vec<usize> = (0..ny).map(|j| pg.negate(j)).collect();
    // the unpaired samples are symmetrised before any row is transformed
    if !nyq.is_empty() {
        for ix in 0..nx {
            let base = ix * ny;
            let fixed: Vec<Vec<Complex64>> = (0..tables.len())
                .map(|s| {
                    nyq.iter()
                        .map(|&j| {
                            0.5 * (tables[s][base + j] + tables[partner[s]][base + neg[j]].conj())
                        })
                        .collect()
                })
                .collect();
            for (s, vals) in fixed.into_iter().enumerate() {
                for (&j, v) in nyq.iter().zip(vals) {
                    tables[s][base + j] = v;
                }
            }
        }
    }
    for t in tables.iter_mut() {
        par::for_each_chunk(t, ny, |_, row| {
            for (v, s) in row.iter_mut().zip(&sign) {
                *v *= *s;
            }
            fft::transform(row, &shape, &axes, Direction::Forward);
        });
    }
}

/// Inverse of [`rows_to_momentum`] (without the symmetrisation): momentum rows
/// to `c (-1)^j G(x, y_j)`-scaled kernel rows, in place. The scale is undone
/// by the matching forward pass, so callers may multiply by `y`-space symbols
/// in between.
pub(crate) fn rows_to_y(pg: &PhaseGrid, table: &mut [Complex64]) {
    let ny = pg.xi_size();
    let shape = pg.xi_grid().shape().to_vec();
    let axes: Vec<usize> = (0..shape.len()).collect();
    par::for_each_chunk(table, ny, |_, row| {
        fft::transform(row, &shape, &axes, Direction::Inverse);
    });
}

/// Forward counterpart of [`rows_to_y`].
pub(crate) fn rows_from_y(pg: &PhaseGrid, table: &mut [Complex64]) {
    let ny = pg.xi_size();
    let shape = pg.xi_grid().shape().to_vec();
    let axes: Vec<usize> = (0..shape.len()).collect();
    par::for_each_chunk(table, ny, |_, row| {
        fft::transform(row, &shape, &axes, Direction::Forward);
    });
}

fn check(state: &MixedState, pg: &PhaseGrid) -> Result<()> {
    pg.check_x(state.grid())?;
    if (state.hbar() - pg.hbar()).abs() > 1e-14 * state.hbar() {
        return Err(Error::PhaseSpace(format!(
            "state hbar {} differs from phase grid hbar {}",
            state.hbar(),
            pg.hbar()
        )));
    }
    let lost = unresolved_mass(state, pg);
    if lost > 1e-6 {
        return Err(Error::UnderResolved(format!(
            "spectral mass {lost:e} outside the momentum box"
        )));
    }
    Ok(())
}

/// Scalar Wigner transform of a mixed state.
pub fn wigner_transform(state: &MixedState, phase: &PhaseGrid) -> Result<WignerFunction> {
    check(state, phase)?;
    let mut tables = kernel(state, phase, Kind::Scalar);
    rows_to_momentum(phase, &mut tables, &[0]);
    let t = tables.pop().expect("one slot");
    let scale = t.iter().fold(1.0f64, |m, v| m.max(v.re.abs()));
    let imag = t.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if imag > 1e-10 * scale {
        return Err(Error::PhaseSpace(format!(
            "Wigner transform not real (imaginary part {imag:e})"
        )));
    }
    WignerFunction::new(*phase, t.into_iter().map(|v| v.re).collect())
}

/// 2×2 Wigner matrix of a mixed state.
pub fn wigner_matrix(state: &MixedState, phase: &PhaseGrid) -> Result<WignerMatrix> {
    check(state, phase)?;
    let mut tables = kernel(state, phase, Kind::Matrix);
    rows_to_momentum(phase, &mut tables, &[0, 2, 1, 3]);
    let d = tables.pop().expect("slot 3");
    let c = tables.pop().expect("slot 2");
    let b = tables.pop().expect("slot 1");
    let a = tables.pop().expect("slot 0");
    let m = WignerMatrix::new(*phase, [a, b, c, d])?;
    let herm = m.hermiticity_error();
    if herm > 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::PhaseSpace(format!(
            "Wigner matrix not Hermitian (defect {herm:e})"
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, SpinorField};

    fn gaussian_1d(hbar: f64, len: f64, n: usize) -> MixedState {
        let g = Grid::cubic(1, n, len).unwrap();
        let c = 0.5 * len;
        let up: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = g.position(i)[0] - c;
                Complex64::new((PI * hbar).powf(-0.25) * (-x * x / (2.0 * hbar)).exp(), 0.0)
            })
            .collect();
        let u = SpinorField::new(g, up, vec![Complex64::default(); n]).unwrap();
        MixedState::pure(hbar, u, 1e6).unwrap()
    }

    fn closed_form(f: &WignerFunction, c: f64) -> f64 {
        let pg = f.phase();
        let h = pg.hbar();
        let nxi = pg.xi_size();
        let mut err = 0.0f64;
        for (i, v) in f.values().iter().enumerate() {
            let x = pg.x_grid().position(i / nxi)[0] - c;
            let xi = pg.xi_at(i % nxi)[0];
            let exact = (-(x * x + xi * xi) / h).exp() / (PI * h);
            err = err.max((v - exact).abs());
        }
        err
    }

    #[test]
    fn gaussian_closed_form_both_paths() {
        let hbar: f64 = 0.5;
        let len = 24.0 * hbar.sqrt();
        let st = gaussian_1d(hbar, len, 128);
        let g = *st.grid();
        for pg in [
            PhaseGrid::padded(g, hbar, 128).unwrap(),
            PhaseGrid::aligned(g, hbar, 128).unwrap(),
        ] {
            let f = wigner_transform(&st, &pg).unwrap();
            assert!(
                closed_form(&f, 0.5 * len) < 1e-9,
                "{}",
                closed_form(&f, 0.5 * len)
            );
            assert!((f.mass() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_state_and_plane_wave() {
        let g = Grid::cubic(1, 32, 2.0 * PI).unwrap();
        let hbar = 0.25;
        let k0 = 3.0;
        let up: Vec<Complex64> = (0..32)
            .map(|i| Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), k0 * g.position(i)[0]))
            .collect();
        let u = SpinorField::new(g, up, vec![Complex64::default(); 32]).unwrap();
        let st = MixedState::pure(hbar, u, 1e6).unwrap();
        let pg = PhaseGrid::aligned(g, hbar, 64).unwrap();
        let f = wigner_transform(&st, &pg).unwrap();
        // a delta column at ξ = ħk₀
        let target = (0..64)
            .find(|&m| (pg.xi(0, m) - hbar * k0).abs() < 1e-12)
            .unwrap();
        for ix in 0..32 {
            let row = f.row(ix);
            for (m, v) in row.iter().enumerate() {
                let expect = if m == target {
                    1.0 / (2.0 * PI * pg.d_xi(0))
                } else {
                    0.0
                };
                assert!((v - expect).abs() < 1e-12, "x {ix} m {m}: {v}");
            }
        }
        assert!((f.mass() - 1.0).abs() < 1e-12);
        let zero = WignerFunction::zeros(pg);
        assert_eq!(zero.mass(), 0.0);
    }

    #[test]
    fn matrix_structure() {
        let hbar = 0.5;
        let st = gaussian_1d(hbar, 12.0, 64);
        let pg = PhaseGrid::aligned(*st.grid(), hbar, 64).unwrap();
        let f = wigner_transform(&st, &pg).unwrap();
        let m = wigner_matrix(&st, &pg).unwrap();
        let fv = f.values();
        for i in 0..pg.size() {
            assert!((m.entry(0, 0)[i].re - fv[i]).abs() < 1e-12);
            for (a, b) in [(0, 1), (1, 0), (1, 1)] {
                assert!(m.entry(a, b)[i].norm() < 1e-14);
            }
        }
        // (1,1)/√2 spinor: every entry is f/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = &st.members()[0];
        let mixed = SpinorField::new(
            *st.grid(),
            u0.comp(0).iter().map(|v| v * s).collect(),
            u0.comp(0).iter().map(|v| v * s).collect(),
        )
        .unwrap();
        let st2 = MixedState::pure(hbar, mixed, 1e6).unwrap();
        let m2 = wigner_matrix(&st2, &pg).unwrap();
        for i in 0..pg.size() {
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                assert!((m2.entry(a, b)[i] - Complex64::new(0.5 * fv[i], 0.0)).norm() < 1e-12);
            }
        }
    }
}
