//! Pseudo-differential operators `θ[g]`, `β[g]` and the Pauli–Wigner residual.
//!
//! `(θ[g]Φ)(x, ξ) = (2π)^{-d} ∫∫ δ[g](x, y) Φ(x, η) e^{-i(ξ-η)·y} dη dy` with
//! `δ[g] = (i/ħ)(g(x + ħy/2) - g(x - ħy/2))`: transform `Φ` to `y`, multiply,
//! transform back. The `β` operator uses `½(g(x + ħy/2) + g(x - ħy/2))`.
//! Unpaired `y` samples (index `-n_ξ/2`) are dropped, as for first derivatives.

use num_complex::Complex64;

use super::phase::{PhaseGrid, Shifter};
use super::transform::{rows_from_y, rows_to_y, WignerFunction, WignerMatrix};
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::par;
use crate::spectral::fft::{self, Direction};
use crate::spectral::ScalarField;

/// `g(x + ħy_j/2)` and `g(x - ħy_j/2)` laid out `[x][j]`.
fn shifted_pair(pg: &PhaseGrid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let grid = pg.x_grid();
    let sp = grid.spectral();
    let cv: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let shifter = Shifter::new(pg, &sp, &cv);
    let nx = grid.size();
    let ny = pg.xi_size();
    let cols = par::map_range(ny, |j| {
        (shifter.column(pg, j, 1.0), shifter.column(pg, j, -1.0))
    });
    let mut plus = vec![0.0; nx * ny];
    let mut minus = vec![0.0; nx * ny];
    for (j, (p, m)) in cols.into_iter().enumerate() {
        for x in 0..nx {
            plus[x * ny + j] = p[x].re;
            minus[x * ny + j] = m[x].re;
        }
    }
    (plus, minus)
}

/// Same as [`shifted_pair`] for a symbol given pointwise (no wrapping).
fn shifted_pair_fn<G: Fn([f64; 3]) -> f64 + Sync>(pg: &PhaseGrid, g: &G) -> (Vec<f64>, Vec<f64>) {
    let grid = pg.x_grid();
    let nx = grid.size();
    let ny = pg.xi_size();
    let d = pg.dim();
    let rows = par::map_range(nx, |ix| {
        let x = grid.position(ix);
        let mut p = Vec::with_capacity(ny);
        let mut m = Vec::with_capacity(ny);
        for j in 0..ny {
            let s = pg.half_shift(j);
            let mut xp = x;
            let mut xm = x;
            for a in 0..d {
                xp[a] += s[a];
                xm[a] -= s[a];
            }
            p.push(g(xp));
            m.push(g(xm));
        }
        (p, m)
    });
    let mut plus = Vec::with_capacity(nx * ny);
    let mut minus = Vec::with_capacity(nx * ny);
    for (p, m) in rows {
        plus.extend(p);
        minus.extend(m);
    }
    (plus, minus)
}

/// `δ[g]` as a `y`-space multiplier.
fn delta_table(pg: &PhaseGrid, plus: &[f64], minus: &[f64]) -> Vec<Complex64> {
    let ny = pg.xi_size();
    let nyq: Vec<bool> = (0..ny).map(|j| pg.is_nyquist(j)).collect();
    let inv = 1.0 / pg.hbar();
    plus.iter()
        .zip(minus)
        .enumerate()
        .map(|(i, (p, m))| {
            if nyq[i % ny] {
                Complex64::default()
            } else {
                Complex64::new(0.0, (p - m) * inv)
            }
        })
        .collect()
}

/// `β[g]` as a `y`-space multiplier.
fn beta_table(pg: &PhaseGrid, plus: &[f64], minus: &[f64]) -> Vec<Complex64> {
    let ny = pg.xi_size();
    let nyq: Vec<bool> = (0..ny).map(|j| pg.is_nyquist(j)).collect();
    plus.iter()
        .zip(minus)
        .enumerate()
        .map(|(i, (p, m))| {
            if nyq[i % ny] {
                Complex64::default()
            } else {
                Complex64::new(0.5 * (p + m), 0.0)
            }
        })
        .collect()
}

/// Applies a `y`-space multiplier to momentum rows.
fn apply_symbol(pg: &PhaseGrid, table: &[Complex64], values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    rows_to_y(pg, &mut buf);
    for (v, s) in buf.iter_mut().zip(table) {
        *v *= s;
    }
    rows_from_y(pg, &mut buf);
    buf
}

fn real_symbol(pg: &PhaseGrid, g: &ScalarField) -> Result<Vec<f64>> {
    pg.check_x(g.grid())?;
    g.require_real("symbol", 1e-12 * g.max_abs().max(1.0))?;
    Ok(g.real_parts())
}

fn theta_on_function(
    pg: &PhaseGrid,
    table: &[Complex64],
    f: &WignerFunction,
) -> Result<WignerFunction> {
    let vals: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = apply_symbol(pg, table, &vals);
    WignerFunction::new(*pg, out.into_iter().map(|v| v.re).collect())
}

fn theta_on_matrix(pg: &PhaseGrid, table: &[Complex64], m: &WignerMatrix) -> Result<WignerMatrix> {
    let c = m.comps();
    WignerMatrix::new(
        *pg,
        [
            apply_symbol(pg, table, &c[0]),
            apply_symbol(pg, table, &c[1]),
            apply_symbol(pg, table, &c[2]),
            apply_symbol(pg, table, &c[3]),
        ],
    )
}

/// `θ[g] f` for a real symbol sampled on the position grid (spectral shifts).
pub fn apply_theta(g: &ScalarField, f: &WignerFunction) -> Result<WignerFunction> {
    let pg = *f.phase();
    let vals = real_symbol(&pg, g)?;
    let (p, m) = shifted_pair(&pg, &vals);
    theta_on_function(&pg, &delta_table(&pg, &p, &m), f)
}

/// `θ[g] F` entrywise on a Wigner matrix.
pub fn apply_theta_matrix(g: &ScalarField, f: &WignerMatrix) -> Result<WignerMatrix> {
    let pg = *f.phase();
    let vals = real_symbol(&pg, g)?;
    let (p, m) = shifted_pair(&pg, &vals);
    theta_on_matrix(&pg, &delta_table(&pg, &p, &m), f)
}

/// `θ[g] f` for a symbol evaluated pointwise at `x ± ħy/2` (no periodisation).
pub fn apply_theta_fn<G: Fn([f64; 3]) -> f64 + Sync>(
    g: G,
    f: &WignerFunction,
) -> Result<WignerFunction> {
    let pg = *f.phase();
    let (p, m) = shifted_pair_fn(&pg, &g);
    theta_on_function(&pg, &delta_table(&pg, &p, &m), f)
}

/// `∂_{ξ_axis} f` by spectral differentiation over the momentum box.
pub fn momentum_derivative(f: &WignerFunction, axis: usize) -> Result<WignerFunction> {
    let pg = *f.phase();
    if axis >= pg.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: pg.dim(),
        });
    }
    let ny = pg.xi_size();
    let dy = pg.d_y(axis);
    let nyq: Vec<bool> = (0..ny).map(|j| pg.is_nyquist(j)).collect();
    // ∂_ξ ↔ multiplication by -i y
    let table: Vec<Complex64> = (0..pg.size())
        .map(|i| {
            let j = i % ny;
            if nyq[j] {
                return Complex64::default();
            }
            let idx = pg.xi_grid().multi_index(j);
            let y = pg.signed(axis, idx[axis]) as f64 * dy;
            Complex64::new(0.0, -y)
        })
        .collect();
    let vals: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = apply_symbol(&pg, &table, &vals);
    WignerFunction::new(pg, out.into_iter().map(|v| v.re).collect())
}

/// Spectral `∂_{x_axis}` of every momentum slab.
fn position_derivative(pg: &PhaseGrid, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    let mut shape: Vec<usize> = pg.x_grid().shape().to_vec();
    shape.extend_from_slice(pg.xi_grid().shape());
    let mut buf = values.to_vec();
    fft::transform(&mut buf, &shape, &[axis], Direction::Forward);
    let n = pg.x_grid().n(axis);
    let k = pg.x_grid().wavenumbers(axis);
    let stride: usize = shape[axis + 1..].iter().product();
    for (i, v) in buf.iter_mut().enumerate() {
        let idx = (i / stride) % n;
        let kk = if idx == n / 2 { 0.0 } else { k[idx] };
        *v *= Complex64::new(0.0, kk);
    }
    fft::transform(&mut buf, &shape, &[axis], Direction::Inverse);
    buf
}

fn scale_by_xi(pg: &PhaseGrid, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    let ny = pg.xi_size();
    let xi: Vec<f64> = (0..ny).map(|j| pg.xi_at(j)[axis]).collect();
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * xi[i % ny])
        .collect()
}

/// The spatial part `L[F]` of the Pauli–Wigner equation `∂_t F + L[F] = 0`.
///
/// `v` is the total scalar potential. Includes the `-β[∇·A]` term that the
/// symmetric kinetic operator produces for divergent `A` (zero in Coulomb gauge).
pub fn pauli_wigner_operator(
    f: &WignerMatrix,
    fields: &FieldSet,
    v: &[f64],
    stern_gerlach: bool,
) -> Result<WignerMatrix> {
    let pg = *f.phase();
    pg.check_x(fields.grid())?;
    let grid = *pg.x_grid();
    if v.len() != grid.size() {
        return Err(Error::ShapeMismatch(
            "potential does not match the grid".into(),
        ));
    }
    let d = pg.dim();
    let size = pg.size();
    let comps = f.comps();
    let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::default(); size]);
    let add = |out: &mut [Vec<Complex64>; 4], c: usize, t: &[Complex64], s: f64| {
        for (o, v) in out[c].iter_mut().zip(t) {
            *o += s * v;
        }
    };

    // scalar potential part: ½|A|² + V
    let mut w = v.to_vec();
    for (i, wi) in w.iter_mut().enumerate() {
        let a = fields.a_at(i);
        *wi += 0.5 * (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    }
    let (wp, wm) = shifted_pair(&pg, &w);
    let theta_w = delta_table(&pg, &wp, &wm);

    let with_a = !fields.a_is_zero();
    let sp = grid.spectral();
    let a_tables: Vec<(Vec<Complex64>, Vec<Complex64>)> = if with_a {
        (0..d)
            .map(|k| {
                let (p, m) = shifted_pair(&pg, fields.a().comp(k));
                (delta_table(&pg, &p, &m), beta_table(&pg, &p, &m))
            })
            .collect()
    } else {
        Vec::new()
    };
    let div_table = if with_a {
        let ac: Vec<Vec<Complex64>> = (0..d)
            .map(|k| {
                fields
                    .a()
                    .comp(k)
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect()
            })
            .collect();
        let div: Vec<f64> = sp.divergence(&ac).iter().map(|z| z.re).collect();
        let (p, m) = shifted_pair(&pg, &div);
        Some(beta_table(&pg, &p, &m))
    } else {
        None
    };

    for c in 0..4 {
        let fc = &comps[c];
        for k in 0..d {
            let dk = position_derivative(&pg, fc, k);
            add(&mut out, c, &scale_by_xi(&pg, &dk, k), 1.0);
            if with_a {
                let (theta_a, beta_a) = &a_tables[k];
                add(&mut out, c, &apply_symbol(&pg, beta_a, &dk), -1.0);
                add(
                    &mut out,
                    c,
                    &apply_symbol(&pg, theta_a, &scale_by_xi(&pg, fc, k)),
                    -1.0,
                );
            }
        }
        if let Some(t) = &div_table {
            add(&mut out, c, &apply_symbol(&pg, t, fc), -1.0);
        }
        add(&mut out, c, &apply_symbol(&pg, &theta_w, fc), 1.0);
    }

    if stern_gerlach && !fields.stern_gerlach_vanishes() {
        // -(ħ/2) θ[σ·B] in matrix order: -(i/2)(M(x+) Ǧ - Ǧ M(x-)) in y space
        let nx = grid.size();
        let mut bp = Vec::with_capacity(3);
        let mut bm = Vec::with_capacity(3);
        for comp in 0..3 {
            let vals: Vec<f64> = (0..nx)
                .map(|i| fields.stern_gerlach_field(i)[comp])
                .collect();
            let (p, m) = shifted_pair(&pg, &vals);
            bp.push(p);
            bm.push(m);
        }
        let mut g: Vec<Vec<Complex64>> = comps.to_vec();
        for t in g.iter_mut() {
            rows_to_y(&pg, t);
        }
        let ny = pg.xi_size();
        let mut sg: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::default(); size]);
        let mat = |b: [f64; 3]| -> [Complex64; 4] {
            [
                Complex64::new(b[2], 0.0),
                Complex64::new(b[0], -b[1]),
                Complex64::new(b[0], b[1]),
                Complex64::new(-b[2], 0.0),
            ]
        };
        for i in 0..size {
            if pg.is_nyquist(i % ny) {
                continue;
            }
            let mp = mat([bp[0][i], bp[1][i], bp[2][i]]);
            let mm = mat([bm[0][i], bm[1][i], bm[2][i]]);
            let gi = [g[0][i], g[1][i], g[2][i], g[3][i]];
            for r in 0..2 {
                for s in 0..2 {
                    let mut acc = Complex64::default();
                    for t in 0..2 {
                        acc += mp[2 * r + t] * gi[2 * t + s] - gi[2 * r + t] * mm[2 * t + s];
                    }
                    sg[2 * r + s][i] = Complex64::new(0.0, -0.5) * acc;
                }
            }
        }
        for (c, t) in sg.iter_mut().enumerate() {
            rows_from_y(&pg, t);
            add(&mut out, c, t, 1.0);
        }
    }
    WignerMatrix::new(pg, out)
}

fn norm(m: &[Vec<Complex64>]) -> f64 {
    m.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative residual of `∂_t F + L[F] = 0` at each interior snapshot, with
/// `∂_t F` by central differences. Normalised by the transport term `ξ·∇_x F`.
pub fn pauli_wigner_residual(
    traj: &[WignerMatrix],
    times: &[f64],
    fields: &FieldSet,
    potentials: &[Vec<f64>],
    stern_gerlach: bool,
) -> Result<Vec<f64>> {
    if traj.len() != times.len() || traj.len() != potentials.len() {
        return Err(Error::ShapeMismatch(
            "trajectory, times and potentials differ in length".into(),
        ));
    }
    if traj.len() < 3 {
        return Err(Error::TimeStep(
            "at least three snapshots are needed".into(),
        ));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::TimeStep(format!(
            "non-increasing snapshot times (dt = {dt})"
        )));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::TimeStep(
                "snapshot times are not uniformly spaced".into(),
            ));
        }
    }
    let pg = *traj[0].phase();
    let mut out = Vec::with_capacity(traj.len() - 2);
    for n in 1..traj.len() - 1 {
        let l = pauli_wigner_operator(&traj[n], fields, &potentials[n], stern_gerlach)?;
        let mut res: Vec<Vec<Complex64>> = Vec::with_capacity(4);
        for c in 0..4 {
            let a = &traj[n + 1].comps()[c];
            let b = &traj[n - 1].comps()[c];
            res.push(
                a.iter()
                    .zip(b)
                    .zip(&l.comps()[c])
                    .map(|((p, m), lv)| (p - m) / (2.0 * dt) + lv)
                    .collect(),
            );
        }
        let mut transport: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); pg.size()]; 4];
        for c in 0..4 {
            for k in 0..pg.dim() {
                let dk = position_derivative(&pg, &traj[n].comps()[c], k);
                for (t, v) in transport[c].iter_mut().zip(scale_by_xi(&pg, &dk, k)) {
                    *t += v;
                }
            }
        }
        let num = norm(&res);
        let den = norm(&transport);
        out.push(if den > 0.0 { num / den } else { num });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::quantum::MixedState;
    use crate::spectral::{Grid, SpinorField};
    use crate::wigner::{wigner_matrix, wigner_transform};

    fn packet(hbar: f64, len: f64, n: usize, k0: f64) -> MixedState {
        let g = Grid::cubic(1, n, len).unwrap();
        let c = 0.5 * len;
        let up: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = g.position(i)[0] - c;
                Complex64::from_polar(
                    (PI * hbar).powf(-0.25) * (-x * x / (2.0 * hbar)).exp(),
                    k0 * x,
                )
            })
            .collect();
        let u = SpinorField::new(g, up, vec![Complex64::default(); n]).unwrap();
        MixedState::pure(hbar, u, 1e6).unwrap()
    }

    #[test]
    fn constant_symbol_is_annihilated() {
        let st = packet(0.5, 12.0, 64, 1.0);
        let pg = PhaseGrid::padded(*st.grid(), 0.5, 64).unwrap();
        let f = wigner_transform(&st, &pg).unwrap();
        let g = ScalarField::from_real_fn(*st.grid(), |_| 2.5);
        let t = apply_theta(&g, &f).unwrap();
        assert!(t.max_abs() < 1e-12 * f.max_abs());
    }

    #[test]
    fn quadratic_symbol_is_first_order() {
        let hbar: f64 = 0.5;
        let len = 24.0 * hbar.sqrt();
        let st = packet(hbar, len, 128, 0.7);
        let pg = PhaseGrid::padded(*st.grid(), hbar, 128).unwrap();
        let f = wigner_transform(&st, &pg).unwrap();
        let c = 0.5 * len;
        let (a2, a1) = (0.8, -0.3);
        let t = apply_theta_fn(|x| a2 * (x[0] - c) * (x[0] - c) + a1 * x[0], &f).unwrap();
        let df = momentum_derivative(&f, 0).unwrap();
        let nxi = pg.xi_size();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (i, v) in t.values().iter().enumerate() {
            let x = pg.x_grid().position(i / nxi)[0];
            let expect = -(2.0 * a2 * (x - c) + a1) * df.values()[i];
            num = num.max((v - expect).abs());
            den = den.max(expect.abs());
        }
        assert!(num < 1e-8 * den, "{num} vs {den}");
    }

    #[test]
    fn low_mode_acts_like_linear_symbol() {
        let hbar = 0.05;
        let len = 8.0;
        let st = packet(hbar, len, 128, 0.0);
        let pg = PhaseGrid::padded(*st.grid(), hbar, 128).unwrap();
        let f = wigner_transform(&st, &pg).unwrap();
        let alpha = 0.6;
        let c = 0.5 * len;
        let g = ScalarField::from_real_fn(*st.grid(), |x| {
            alpha * len / (2.0 * PI) * (2.0 * PI * (x[0] - c) / len).sin()
        });
        let t = apply_theta(&g, &f).unwrap();
        // centred finite differences in ξ as the independent oracle
        let nxi = pg.xi_size();
        let dxi = pg.d_xi(0);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for ix in 0..pg.x_grid().size() {
            let row = f.row(ix);
            for m in 2..nxi - 2 {
                let d =
                    (-row[m + 2] + 8.0 * row[m + 1] - 8.0 * row[m - 1] + row[m - 2]) / (12.0 * dxi);
                let expect = -alpha * d;
                num = num.max((t.values()[ix * nxi + m] - expect).abs());
                den = den.max(expect.abs());
            }
        }
        assert!(num < 2e-2 * den, "{num} vs {den}");
    }

    #[test]
    fn residual_of_zero_is_zero() {
        let g = Grid::cubic(1, 32, 8.0).unwrap();
        let pg = PhaseGrid::aligned(g, 0.5, 32).unwrap();
        let z = WignerMatrix::zeros(pg);
        let fields = FieldSet::zero(g);
        let v = vec![0.0; 32];
        let r = pauli_wigner_residual(
            &[z.clone(), z.clone(), z],
            &[0.0, 0.1, 0.2],
            &fields,
            &[v.clone(), v.clone(), v],
            true,
        )
        .unwrap();
        assert_eq!(r, vec![0.0]);
        let st = packet(0.5, 8.0, 32, 0.0);
        let m = wigner_matrix(&st, &pg).unwrap();
        let v = vec![0.0; 32];
        assert!(pauli_wigner_residual(
            &[m.clone(), m.clone(), m],
            &[0.0, 0.1, 0.3],
            &fields,
            &[v.clone(), v.clone(), v],
            true
        )
        .is_err());
    }
}
