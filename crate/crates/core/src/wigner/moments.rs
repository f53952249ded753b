//! Husimi smoothing and momentum moments of Wigner functions.

use num_complex::Complex64;

use super::phase::PhaseGrid;
use super::transform::{WignerFunction, WignerMatrix};
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::spectral::fft;
use crate::spectral::{ScalarField, VectorField};

/// Wavenumbers of the momentum axis `a` (period `2Ξ`), FFT order.
fn xi_wavenumbers(pg: &PhaseGrid, a: usize) -> Vec<f64> {
    pg.xi_grid().wavenumbers(a)
}

/// `f ∗_x G^ħ ∗_ξ G^ħ` with `G^ħ(z) = (πħ)^{-d/2} e^{-|z|²/ħ}`, by FFT.
///
/// The convolution is periodic in both variables, i.e. the Gaussian is
/// periodised over the torus and over the momentum box; see
/// [`PhaseGrid::smoothing_wrap_tail`] for the size of the wrap-around.
pub fn husimi(f: &WignerFunction) -> Result<WignerFunction> {
    let pg = *f.phase();
    let d = pg.dim();
    let hbar = pg.hbar();
    let width = (0.5 * hbar).sqrt();
    for a in 0..d {
        let h = pg.x_grid().spacing(a);
        let dxi = pg.d_xi(a);
        if width < h || width < dxi {
            return Err(Error::UnderResolved(format!(
                "smoothing width {width} below grid spacing (h = {h}, dξ = {dxi}) on axis {a}"
            )));
        }
    }
    let mut shape: Vec<usize> = pg.x_grid().shape().to_vec();
    shape.extend_from_slice(pg.xi_grid().shape());
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut buf, &shape);
    // separable multiplier e^{-ħ|k|²/4} per axis
    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(2 * d);
    for a in 0..d {
        factors.push(
            pg.x_grid()
                .wavenumbers(a)
                .iter()
                .map(|k| (-0.25 * hbar * k * k).exp())
                .collect(),
        );
    }
    for a in 0..d {
        factors.push(
            xi_wavenumbers(&pg, a)
                .iter()
                .map(|k| (-0.25 * hbar * k * k).exp())
                .collect(),
        );
    }
    let mut strides = vec![1usize; shape.len()];
    for a in (0..shape.len() - 1).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    for (i, v) in buf.iter_mut().enumerate() {
        let mut m = 1.0;
        for (ax, fac) in factors.iter().enumerate() {
            m *= fac[(i / strides[ax]) % shape[ax]];
        }
        *v *= m;
    }
    fft::inverse(&mut buf, &shape);
    WignerFunction::new(pg, buf.into_iter().map(|v| v.re).collect())
}

/// `∫ f dξ` at every grid point.
pub fn moment_density(f: &WignerFunction) -> ScalarField {
    let pg = f.phase();
    let dv = pg.xi_grid().cell_volume();
    let values: Vec<Complex64> = (0..pg.x_grid().size())
        .map(|ix| Complex64::new(f.row(ix).iter().sum::<f64>() * dv, 0.0))
        .collect();
    ScalarField::new(*pg.x_grid(), values).expect("grid-sized")
}

/// `∫ Re Tr(σ (σ·(ξ - A(x))) F) dξ`.
///
/// For Hermitian `F` the spin part `i ε_klm (ξ_l - A_l) Tr(σ_m F)` is purely
/// imaginary, so this moment is the convective current only.
pub fn moment_current(m: &WignerMatrix, fields: &FieldSet) -> Result<VectorField> {
    let pg = m.phase();
    pg.check_x(fields.grid())?;
    let d = pg.dim();
    if d < 2 {
        return Err(Error::PhaseSpace(
            "the current moment needs at least two dimensions".into(),
        ));
    }
    let nx = pg.x_grid().size();
    let nxi = pg.xi_size();
    let dv = pg.xi_grid().cell_volume();
    let xi: Vec<[f64; 3]> = (0..nxi).map(|j| pg.xi_at(j)).collect();
    let mut comps = vec![vec![0.0; nx]; d];
    for ix in 0..nx {
        let a = fields.a_at(ix);
        let mut acc = [Complex64::default(); 3];
        for (j, xv) in xi.iter().enumerate() {
            let i = ix * nxi + j;
            let f = [
                m.comps()[0][i],
                m.comps()[1][i],
                m.comps()[2][i],
                m.comps()[3][i],
            ];
            let tr = f[0] + f[3];
            // Tr(σ_m F) for F = [[f0, f1], [f2, f3]]
            let spin = [f[1] + f[2], Complex64::i() * (f[1] - f[2]), f[0] - f[3]];
            let mut p = [0.0; 3];
            for l in 0..d {
                p[l] = xv[l] - a[l];
            }
            for (k, ak) in acc.iter_mut().enumerate().take(d) {
                *ak += p[k] * tr;
                for l in 0..3 {
                    for (mm, s) in spin.iter().enumerate() {
                        let e = levi_civita(k, l, mm);
                        if e != 0.0 {
                            *ak += Complex64::i() * e * p[l] * s;
                        }
                    }
                }
            }
        }
        for k in 0..d {
            comps[k][ix] = acc[k].re * dv;
        }
    }
    VectorField::new(*pg.x_grid(), comps)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
