//! Comparisons between the quantum and kinetic sides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::kinetic::ParticleEnsemble;
use crate::quantum::state::{interpolate_real, vector_potential_at};
use crate::spectral::{Grid, VectorField};
use crate::wigner::{pair_shifted, TestFunction, WignerFunction};

/// `λ(x, ξ) = ½|ξ − A(x)|² + V(x)`, the doubly degenerate eigenvalue of the
/// Pauli symbol. `A` and `V` are interpolated trigonometrically from the grid.
pub fn symbol_eigenvalue(x: &[f64; 3], xi: &[f64; 3], fields: &FieldSet) -> f64 {
    let grid = fields.grid();
    let a = vector_potential_at(fields, x);
    let v = fields
        .v_ext()
        .map(|v| interpolate_real(grid, v, x))
        .unwrap_or(0.0);
    0.5 * (0..grid.dim()).map(|k| (xi[k] - a[k]).powi(2)).sum::<f64>() + v
}

/// `|⟨f_q, φ(x, ξ − A)⟩ − Σ w_i φ(x_i, p_i)|` for every test function.
pub fn weak_error(
    f_q: &WignerFunction,
    particles: &ParticleEnsemble,
    battery: &[TestFunction],
    fields: Option<&FieldSet>,
) -> Result<Vec<f64>> {
    if battery.is_empty() {
        return Err(Error::PhaseSpace("empty test-function battery".into()));
    }
    let grid = *f_q.phase().x_grid();
    battery
        .iter()
        .map(|phi| {
            let q = pair_shifted(f_q, phi, fields)?;
            let k = particles.pair(|x, p| phi.eval(&grid, x, p));
            Ok((q - k).abs())
        })
        .collect()
}

/// Ten Gaussians around the bulk of `particles`: two at the mean, eight one
/// standard deviation away along each position and momentum axis. Position
/// widths are `0.5` and `1.0` in box coordinates; momentum widths are half and
/// one standard deviation of the cloud, which keeps them inside the momentum
/// box of the finest phase grid.
pub fn default_battery(
    particles: &ParticleEnsemble,
    reference: &[f64; 3],
) -> Result<Vec<TestFunction>> {
    let d = particles.dim();
    let (mx, sx, mp, sp) = particles.spread(reference);
    let wp = sp.iter().take(d).sum::<f64>() / d as f64;
    if !(wp > 0.0) {
        return Err(Error::PhaseSpace(
            "particle cloud has zero momentum spread".into(),
        ));
    }
    let grid = particles.grid();
    let mut out = vec![
        TestFunction::gaussian(mx, mp, 1.0, wp)?,
        TestFunction::gaussian(mx, mp, 0.5, 0.5 * wp)?,
    ];
    let mut offsets = Vec::new();
    for a in 0..d {
        for s in [1.0, -1.0] {
            let mut x = mx;
            x[a] = grid.wrap(a, x[a] + s * sx[a]);
            offsets.push((x, mp));
        }
        for s in [1.0, -1.0] {
            let mut p = mp;
            p[a] += s * sp[a];
            offsets.push((mx, p));
        }
    }
    let mut k = 0;
    while out.len() < 10 {
        let (x, p) = offsets[k % offsets.len()];
        let scale = if (k + k / offsets.len()) % 2 == 0 {
            0.5
        } else {
            1.0
        };
        out.push(TestFunction::gaussian(x, p, scale, scale * wp)?);
        k += 1;
    }
    Ok(out)
}

/// `∫∫ f(x, ξ) φ_x(x) dx dξ` where `φ_x` is the position factor of `phi`.
pub fn pair_position_marginal(f: &WignerFunction, phi: &TestFunction) -> Result<f64> {
    phi.validate()?;
    match *phi {
        TestFunction::Constant { value } => Ok(value * f.mass()),
        TestFunction::Gaussian { x0, wx, .. } => {
            let grid = *f.phase().x_grid();
            let sum: f64 = (0..grid.size())
                .map(|ix| {
                    let dx = grid.periodic_delta(&grid.position(ix), &x0);
                    let e = (0..grid.dim()).map(|a| dx[a] * dx[a]).sum::<f64>() / (2.0 * wx * wx);
                    (-e).exp() * f.row(ix).iter().sum::<f64>()
                })
                .sum();
            Ok(sum * f.phase().cell_volume())
        }
    }
}

/// A lowest-frequency Fourier mode `cos(2π m·x/L − phase)` in position only.
///
/// Modes are smooth on the torus and lose the least to the `O(√ħ)` packet
/// broadening of the quantum density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionTest {
    pub mode: [i32; 3],
    pub phase: f64,
}

impl PositionTest {
    pub fn eval(&self, grid: &Grid, x: &[f64; 3]) -> f64 {
        let arg: f64 = (0..grid.dim())
            .map(|a| 2.0 * std::f64::consts::PI * self.mode[a] as f64 * x[a] / grid.length(a))
            .sum();
        (arg - self.phase).cos()
    }
}

/// `∫ J ψ dx` per component.
pub fn pair_field(j: &VectorField, psi: &PositionTest) -> [f64; 3] {
    let grid = j.grid();
    let w: Vec<f64> = (0..grid.size())
        .map(|i| psi.eval(grid, &grid.position(i)))
        .collect();
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate().take(j.ncomp()) {
        *o = j.comp(c).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume();
    }
    out
}

/// `Σ w_i p_i ψ(x_i)`.
pub fn pair_particle_current(particles: &ParticleEnsemble, psi: &PositionTest) -> [f64; 3] {
    let grid = particles.grid();
    let mut out = [0.0; 3];
    for ((x, p), w) in particles
        .positions()
        .iter()
        .zip(particles.momenta())
        .zip(particles.weights())
    {
        let v = w * psi.eval(grid, x);
        for a in 0..3 {
            out[a] += v * p[a];
        }
    }
    out
}

/// The unit modes along each axis, in phase and in quadrature with the mean
/// of the cloud.
pub fn default_position_tests(
    particles: &ParticleEnsemble,
    reference: &[f64; 3],
) -> Vec<PositionTest> {
    let grid = particles.grid();
    let (mx, _, _, _) = particles.spread(reference);
    let mut out = Vec::new();
    for a in 0..particles.dim() {
        let mut mode = [0; 3];
        mode[a] = 1;
        let phase = 2.0 * std::f64::consts::PI * mx[a] / grid.length(a);
        out.push(PositionTest { mode, phase });
        out.push(PositionTest {
            mode,
            phase: phase + 0.5 * std::f64::consts::PI,
        });
    }
    out
}
