//! Phase-space test functions, weak pairings and ħ-oscillation diagnostics.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::transform::WignerFunction;
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::quantum::MixedState;
use crate::spectral::Grid;

/// A test function on `T^d × R^d`.
///
/// Gaussians are `exp(-|x - x₀|²/(2a²) - |p - p₀|²/(2b²))` with the minimal-image
/// distance in `x`; their momentum Fourier transform is a Gaussian, hence
/// integrable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Gaussian {
        x0: [f64; 3],
        p0: [f64; 3],
        wx: f64,
        wp: f64,
    },
    Constant {
        value: f64,
    },
}

impl TestFunction {
    pub fn gaussian(x0: [f64; 3], p0: [f64; 3], wx: f64, wp: f64) -> Result<TestFunction> {
        let t = TestFunction::Gaussian { x0, p0, wx, wp };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TestFunction::Gaussian { wx, wp, x0, p0 } => {
                if !(wx > 0.0 && wp > 0.0 && wx.is_finite() && wp.is_finite()) {
                    return Err(Error::PhaseSpace(format!(
                        "test function widths ({wx}, {wp}) must be positive"
                    )));
                }
                if x0.iter().chain(&p0).any(|v| !v.is_finite()) {
                    return Err(Error::PhaseSpace(
                        "test function centre is not finite".into(),
                    ));
                }
                Ok(())
            }
            TestFunction::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::PhaseSpace(
                        "constant test function is not finite".into(),
                    ))
                }
            }
        }
    }

    /// Value at `(x, p)` on the torus of `grid`.
    pub fn eval(&self, grid: &Grid, x: &[f64; 3], p: &[f64; 3]) -> f64 {
        match *self {
            TestFunction::Gaussian { x0, p0, wx, wp } => {
                let dx = grid.periodic_delta(x, &x0);
                let mut e = 0.0;
                for a in 0..grid.dim() {
                    e += dx[a] * dx[a] / (2.0 * wx * wx) + (p[a] - p0[a]).powi(2) / (2.0 * wp * wp);
                }
                (-e).exp()
            }
            TestFunction::Constant { value } => value,
        }
    }
}

/// Gaussian mass (relative) outside `[lo, hi]`.
fn outside_mass(center: f64, width: f64, lo: f64, hi: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * width;
    0.5 * erfc((hi - center) / s) + 0.5 * erfc((center - lo) / s)
}

/// `∫∫ f(x, ξ) φ(x, ξ - A(x)) dx dξ`; `fields = None` pairs in `ξ` directly.
pub fn pair_shifted(
    f: &WignerFunction,
    phi: &TestFunction,
    fields: Option<&FieldSet>,
) -> Result<f64> {
    phi.validate()?;
    let pg = f.phase();
    let grid = *pg.x_grid();
    if let Some(fs) = fields {
        pg.check_x(fs.grid())?;
    }
    let d = pg.dim();
    let nx = grid.size();
    let shift = |ix: usize| -> [f64; 3] { fields.map(|fs| fs.a_at(ix)).unwrap_or([0.0; 3]) };
    match *phi {
        TestFunction::Constant { value } => Ok(value * f.mass()),
        TestFunction::Gaussian { x0, p0, wx, wp } => {
            let mut worst = 0.0f64;
            for ix in 0..nx {
                let a = shift(ix);
                for ax in 0..d {
                    let lo = -pg.xi_box(ax) - a[ax];
                    let hi = pg.xi_box(ax) - pg.d_xi(ax) - a[ax];
                    worst = worst.max(outside_mass(p0[ax], wp, lo, hi));
                }
            }
            if worst > 1e-8 {
                return Err(Error::PhaseSpace(format!(
                    "test function mass {worst:e} outside the momentum box"
                )));
            }
            let shape = pg.xi_grid().shape().to_vec();
            let mut acc = 0.0;
            for ix in 0..nx {
                let x = grid.position(ix);
                let dx = grid.periodic_delta(&x, &x0);
                let ex: f64 = (0..d).map(|ax| dx[ax] * dx[ax]).sum::<f64>() / (2.0 * wx * wx);
                let wxv = (-ex).exp();
                if wxv < 1e-300 {
                    continue;
                }
                let a = shift(ix);
                let tables: Vec<Vec<f64>> = (0..d)
                    .map(|ax| {
                        (0..shape[ax])
                            .map(|m| {
                                let p = pg.xi(ax, m) - a[ax];
                                (-(p - p0[ax]).powi(2) / (2.0 * wp * wp)).exp()
                            })
                            .collect()
                    })
                    .collect();
                let row = f.row(ix);
                let mut s = 0.0;
                for (m, v) in row.iter().enumerate() {
                    let idx = pg.xi_grid().multi_index(m);
                    let mut w = 1.0;
                    for ax in 0..d {
                        w *= tables[ax][idx[ax]];
                    }
                    s += v * w;
                }
                acc += wxv * s;
            }
            Ok(acc * pg.cell_volume())
        }
    }
}

/// `⟨f, φ⟩ = ∫∫ f φ dx dξ`.
pub fn pair_against(f: &WignerFunction, phi: &TestFunction) -> Result<f64> {
    pair_shifted(f, phi, None)
}

/// Tail masses `Σ_j λ_j ∫_{|k| ≥ R/ħ} |û_j|²` for each `R` (non-increasing in `R`
/// by construction) and the companion `ħ² Σ_j λ_j ‖∇u_j‖²`.
pub fn oscillatory_tails(state: &MixedState, cutoffs: &[f64]) -> Result<(Vec<f64>, f64)> {
    if cutoffs.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::PhaseSpace("cutoffs must be positive".into()));
    }
    let grid = state.grid();
    let sp = grid.spectral();
    let hbar = state.hbar();
    let norm = grid.cell_volume() / grid.size() as f64;
    let kabs: Vec<f64> = sp.k_squared().iter().map(|k| k.sqrt()).collect();
    // cutoffs sorted ascending; bin[i] collects modes with R_i/ħ ≤ |k| < R_{i+1}/ħ
    let mut order: Vec<usize> = (0..cutoffs.len()).collect();
    order.sort_by(|&a, &b| cutoffs[a].total_cmp(&cutoffs[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| cutoffs[i] / hbar).collect();
    let mut bins = vec![0.0; sorted.len()];
    let mut grad = 0.0;
    for (w, u) in state.weights().iter().zip(state.members()) {
        for s in 0..2 {
            let hat = sp.forward(u.comp(s));
            for (f, c) in hat.iter().enumerate() {
                let m = w * c.norm_sqr() * norm;
                grad += m * sp.k_squared()[f];
                let passed = sorted.partition_point(|&r| r <= kabs[f]);
                if passed > 0 {
                    bins[passed - 1] += m;
                }
            }
        }
    }
    let mut tails_sorted = vec![0.0; sorted.len()];
    let mut acc = 0.0;
    for i in (0..sorted.len()).rev() {
        acc += bins[i];
        tails_sorted[i] = acc;
    }
    let mut tails = vec![0.0; cutoffs.len()];
    for (pos, &i) in order.iter().enumerate() {
        tails[i] = tails_sorted[pos];
    }
    Ok((tails, hbar * hbar * grad))
}

/// Tail mass beyond frequency `R/ħ`.
pub fn oscillatory_tail(state: &MixedState, r: f64) -> Result<f64> {
    Ok(oscillatory_tails(state, &[r])?.0[0])
}
