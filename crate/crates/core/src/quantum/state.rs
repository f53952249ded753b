//! Mixed states and their construction from phase-space samples.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::kinetic::sampling::{sample_phase_points, GaussianPhaseDensity, SamplingScheme};
use crate::par;
use crate::spectral::{Grid, SpinorField};

/// Relative slack allowed in the weight and admissibility checks.
const WEIGHT_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;

/// Weighted ensemble `{(λ_j, u_j)}` of normalised spinors.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    hbar: f64,
    grid: Grid,
    weights: Vec<f64>,
    members: Vec<SpinorField>,
    bound: f64,
}

impl MixedState {
    /// Validates weights, normalisation and the admissibility bound
    /// `ħ^{-d} Σ λ_j² ≤ C`.
    pub fn new(
        hbar: f64,
        weights: Vec<f64>,
        members: Vec<SpinorField>,
        bound: f64,
    ) -> Result<Self> {
        if !(hbar > 0.0 && hbar <= 1.0) {
            return Err(Error::InvalidState(format!("hbar = {hbar} outside (0, 1]")));
        }
        if !(bound > 0.0) {
            return Err(Error::InvalidState(format!(
                "admissibility constant {bound} must be positive"
            )));
        }
        if members.is_empty() || weights.len() != members.len() {
            return Err(Error::InvalidState(format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            )));
        }
        let grid = *members[0].grid();
        if members.iter().any(|m| m.grid() != &grid) {
            return Err(Error::ShapeMismatch(
                "members live on different grids".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidState("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidState(format!("weights sum to {total}")));
        }
        for (j, m) in members.iter().enumerate() {
            let nrm = m.norm();
            if (nrm - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidState(format!("member {j} has norm {nrm}")));
            }
        }
        let state = MixedState {
            hbar,
            grid,
            weights,
            members,
            bound,
        };
        state.check_admissible()?;
        Ok(state)
    }

    /// A single-member state; admissible only when `ħ^{-d} ≤ C`.
    pub fn pure(hbar: f64, u: SpinorField, bound: f64) -> Result<Self> {
        MixedState::new(hbar, vec![1.0], vec![u], bound)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[SpinorField] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `ħ^{-d} Σ λ_j²`.
    pub fn admissibility_value(&self) -> f64 {
        let s: f64 = self.weights.iter().map(|w| w * w).sum();
        s * self.hbar.powi(-(self.grid.dim() as i32))
    }

    pub fn check_admissible(&self) -> Result<()> {
        let value = self.admissibility_value();
        if value > self.bound * (1.0 + WEIGHT_TOL) {
            return Err(Error::Admissibility {
                value,
                bound: self.bound,
            });
        }
        Ok(())
    }

    /// Same weights, new members (used by the propagators, which preserve norms).
    pub(crate) fn with_members(&self, members: Vec<SpinorField>) -> MixedState {
        debug_assert_eq!(members.len(), self.members.len());
        MixedState {
            hbar: self.hbar,
            grid: self.grid,
            weights: self.weights.clone(),
            members,
            bound: self.bound,
        }
    }

    /// Largest entry of `|G − I|` with `G_ij = ⟨u_i, u_j⟩`.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.members.len();
        let rows = par::map_range(n, |i| {
            let mut worst: f64 = 0.0;
            for j in i..n {
                let g = self.members[i].inner(&self.members[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
            worst
        });
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// Periodised Gaussian packet `N e^{-|x−x0|²/(2σ²)} e^{i ξ0·(x−x0)/ħ} χ`.
///
/// `xi0` is the canonical momentum carried by the phase; images within three
/// widths of each periodic copy are summed.
pub fn coherent_state(
    grid: &Grid,
    hbar: f64,
    x0: [f64; 3],
    xi0: [f64; 3],
    sigma: f64,
    chi: [Complex64; 2],
) -> Result<SpinorField> {
    let d = grid.dim();
    let hmax = (0..d).map(|a| grid.spacing(a)).fold(0.0, f64::max);
    if !(sigma >= 3.0 * hmax) {
        return Err(Error::UnderResolved(format!(
            "coherent width {sigma} below three grid spacings ({})",
            3.0 * hmax
        )));
    }
    let chi_norm = (chi[0].norm_sqr() + chi[1].norm_sqr()).sqrt();
    if (chi_norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!(
            "spin vector has norm {chi_norm}"
        )));
    }
    // per-axis factor tables: the packet factorises over axes
    let reach = 10.0 * sigma;
    let axis_tables: Vec<Vec<Complex64>> = (0..d)
        .map(|a| {
            let l = grid.length(a);
            let images = (reach / l).ceil() as i64 + 1;
            (0..grid.n(a))
                .map(|i| {
                    let x = i as f64 * grid.spacing(a);
                    let mut acc = Complex64::default();
                    for m in -images..=images {
                        let dx = x - x0[a] + m as f64 * l;
                        if dx.abs() > reach {
                            continue;
                        }
                        let env = (-dx * dx / (2.0 * sigma * sigma)).exp();
                        acc += Complex64::from_polar(env, xi0[a] * dx / hbar);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut profile = vec![Complex64::default(); grid.size()];
    for (f, v) in profile.iter_mut().enumerate() {
        let idx = grid.multi_index(f);
        let mut p = Complex64::new(1.0, 0.0);
        for (a, table) in axis_tables.iter().enumerate() {
            p *= table[idx[a]];
        }
        *v = p;
    }
    let norm = (profile.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_volume()).sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidState(
            "coherent state vanishes on the grid".into(),
        ));
    }
    let up = profile.iter().map(|v| v * chi[0] / norm).collect();
    let down = profile.iter().map(|v| v * chi[1] / norm).collect();
    SpinorField::new(*grid, up, down)
}

/// Recipe for an ensemble of coherent states sampled from `f_I`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub density: GaussianPhaseDensity,
    pub scheme: SamplingScheme,
    pub seed: u64,
    pub spin: [Complex64; 2],
    /// Packet width; `None` selects the minimum-uncertainty width `√ħ`.
    pub width: Option<f64>,
}

/// Number of members `⌈ħ^{-d}/C⌉` of the uniform-weight construction.
pub fn ensemble_size(dim: usize, hbar: f64, bound: f64) -> usize {
    let target = hbar.powi(-(dim as i32)) / bound;
    // guard against representation error when the ratio is an integer
    let n = (target * (1.0 - 1e-12)).ceil();
    (n as usize).max(1)
}

/// Uniform-weight mixed state of coherent packets centred at samples of `f_I`.
///
/// Sampled momenta are kinetic; the packet phase uses `ξ = p + A(x_0)` so the
/// Wigner function sits at the sampled point after the change of variables.
pub fn build_mixed_state(
    grid: &Grid,
    fields: &FieldSet,
    hbar: f64,
    bound: f64,
    spec: &EnsembleSpec,
) -> Result<MixedState> {
    if bound < 1.0 {
        return Err(Error::InvalidState(format!(
            "admissibility constant {bound} below 1"
        )));
    }
    if spec.density.dim != grid.dim() {
        return Err(Error::ShapeMismatch(
            "f_I dimension differs from the grid".into(),
        ));
    }
    let n = ensemble_size(grid.dim(), hbar, bound);
    let points = sample_phase_points(&spec.density, n, spec.scheme, spec.seed)?;
    let sigma = spec.width.unwrap_or_else(|| hbar.sqrt());
    let members = par::map(&points, |pt| {
        let mut x0 = [0.0; 3];
        for (a, x) in x0.iter_mut().enumerate().take(grid.dim()) {
            *x = grid.wrap(a, pt.x[a]);
        }
        let a0 = vector_potential_at(fields, &x0);
        let mut xi0 = pt.p;
        for a in 0..grid.dim() {
            xi0[a] += a0[a];
        }
        coherent_state(grid, hbar, x0, xi0, sigma, spec.spin)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let w = 1.0 / n as f64;
    MixedState::new(hbar, vec![w; n], members, bound)
}

/// Trigonometric interpolation of `A` at an arbitrary point.
pub fn vector_potential_at(fields: &FieldSet, x: &[f64; 3]) -> [f64; 3] {
    let grid = fields.grid();
    let mut out = [0.0; 3];
    if fields.a_is_zero() {
        return out;
    }
    for (c, o) in out.iter_mut().enumerate().take(grid.dim()) {
        *o = interpolate_real(grid, fields.a().comp(c), x);
    }
    out
}

/// Band-limited interpolant of real grid data at `x` (direct Fourier sum).
pub fn interpolate_real(grid: &Grid, values: &[f64], x: &[f64; 3]) -> f64 {
    let sp = grid.spectral();
    let data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let hat = sp.forward(&data);
    let n = grid.size() as f64;
    let mut acc = 0.0;
    for (f, h) in hat.iter().enumerate() {
        if h.norm() < 1e-14 * n {
            continue;
        }
        let mut phase = 0.0;
        let mut weight = 1.0;
        for a in 0..grid.dim() {
            let k = sp.k(a)[f];
            if k != 0.0 && sp.k_deriv(a)[f] == 0.0 {
                // Nyquist: use the real cosine interpolant
                weight *= (k * x[a]).cos();
            } else {
                phase += k * x[a];
            }
        }
        acc += weight * (h * Complex64::from_polar(1.0, phase)).re;
    }
    acc / n
}

/// Pointwise analytic density `(πσ²)^{-d/2} e^{-|x−x0|²/σ²}` of an unperiodised packet.
pub fn gaussian_packet_density(dim: usize, sigma: f64, dist2: f64) -> f64 {
    (PI * sigma * sigma).powf(-(dim as f64) / 2.0) * (-dist2 / (sigma * sigma)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldSet;

    fn up() -> [Complex64; 2] {
        [Complex64::new(1.0, 0.0), Complex64::default()]
    }

    #[test]
    fn coherent_examples() {
        let hbar = 0.1;
        let g = Grid::cubic(2, 64, 4.0).unwrap();
        let c = g.center();
        let u = coherent_state(&g, hbar, c, [0.3, -0.2, 0.0], hbar.sqrt(), up()).unwrap();
        assert!(u.comp(1).iter().all(|v| *v == Complex64::default()));
        assert!((u.norm() - 1.0).abs() < 1e-10);

        let u0 = coherent_state(&g, hbar, c, [0.0; 3], hbar.sqrt(), up()).unwrap();
        let rho = u0.density();
        let mut worst: f64 = 0.0;
        for (i, r) in rho.iter().enumerate() {
            let x = g.position(i);
            let d2: f64 = (0..2).map(|a| (x[a] - c[a]).powi(2)).sum();
            if d2.sqrt() < 1.5 {
                let expect = (PI * hbar).powf(-1.0) * (-d2 / hbar).exp();
                worst = worst.max((r - expect).abs());
            }
        }
        assert!(worst < 1e-8, "{worst:e}");
        assert!(matches!(
            coherent_state(&g, hbar, c, [0.0; 3], 0.1, up()),
            Err(Error::UnderResolved(_))
        ));
    }

    #[test]
    fn ensemble_sizes() {
        assert_eq!(ensemble_size(3, 0.5, 1.0), 8);
        assert_eq!(ensemble_size(2, 0.25, 1.0), 16);
        assert_eq!(ensemble_size(2, 0.0625, 1.0), 256);
        assert_eq!(ensemble_size(2, 0.3, 1.0), 12);
    }

    #[test]
    fn admissibility_gate() {
        let g = Grid::cubic(2, 32, 4.0).unwrap();
        let u = coherent_state(&g, 0.25, g.center(), [0.0; 3], 0.5, up()).unwrap();
        let err = MixedState::pure(0.25, u, 1.0).unwrap_err();
        assert!(matches!(err, Error::Admissibility { value, .. } if value == 16.0));

        let f = FieldSet::zero(g);
        let spec = EnsembleSpec {
            density: GaussianPhaseDensity::isotropic(2, g.center(), 0.4, [0.0; 3], 0.3),
            scheme: SamplingScheme::Halton,
            seed: 1,
            spin: up(),
            width: None,
        };
        let s = build_mixed_state(&g, &f, 0.25, 1.0, &spec).unwrap();
        assert_eq!(s.len(), 16);
        assert!(s.weights().iter().all(|&w| w == 1.0 / 16.0));
        assert!(s.admissibility_value() <= 1.0);
        assert!(s.gram_deviation() < 1.0);

        let g3 = Grid::cubic(3, 32, 6.0).unwrap();
        let spec3 = EnsembleSpec {
            density: GaussianPhaseDensity::isotropic(3, g3.center(), 0.5, [0.0; 3], 0.3),
            ..spec
        };
        let s3 = build_mixed_state(&g3, &FieldSet::zero(g3), 0.5, 1.0, &spec3).unwrap();
        assert_eq!(s3.len(), 8);
        assert_eq!(s3.admissibility_value(), 1.0);
    }

    #[test]
    fn rejects_bad_weights() {
        let g = Grid::cubic(1, 32, 4.0).unwrap();
        let u = coherent_state(&g, 0.5, g.center(), [0.0; 3], 0.5, up()).unwrap();
        assert!(MixedState::new(0.5, vec![0.7, 0.2], vec![u.clone(), u.clone()], 1.0).is_err());
        assert!(MixedState::new(0.5, vec![1.2, -0.2], vec![u.clone(), u.clone()], 1.0).is_err());
        let mut v = u.clone();
        v.scale(Complex64::new(1.1, 0.0));
        assert!(MixedState::new(0.5, vec![0.5, 0.5], vec![u, v], 1.0).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_modes() {
        let g = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let vals: Vec<f64> = (0..g.size())
            .map(|i| {
                let x = g.position(i);
                (2.0 * x[0]).sin() + (x[1]).cos() * 0.5
            })
            .collect();
        let p: [f64; 3] = [0.37, 1.91, 0.0];
        let expect = (2.0 * p[0]).sin() + p[1].cos() * 0.5;
        assert!((interpolate_real(&g, &vals, &p) - expect).abs() < 1e-12);
    }
}
