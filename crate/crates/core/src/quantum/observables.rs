//! Density, current, charge and energy of a mixed state.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{self, FieldSet};
use crate::par;
use crate::spectral::{Grid, ScalarField, SpinorField, VectorField};

use super::hamiltonian::{kinetic_momentum, pauli, sigma_dot};
use super::state::MixedState;

/// Charge, energies and the diagonal density at one instant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observables {
    #[serde(skip)]
    pub rho_diag: Vec<f64>,
    pub charge: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub e_total: f64,
}

/// `Σ_j λ_j |u_j|²`.
pub fn density(state: &MixedState) -> ScalarField {
    let rho = density_values(state);
    ScalarField::from_real(*state.grid(), &rho).expect("density has grid length")
}

pub(crate) fn density_values(state: &MixedState) -> Vec<f64> {
    let per = par::map(state.members(), |u| u.density());
    let mut rho = vec![0.0; state.grid().size()];
    for (w, d) in state.weights().iter().zip(per) {
        for (r, v) in rho.iter_mut().zip(d) {
            *r += w * v;
        }
    }
    rho
}

/// `(∫ρ^p)^{1/p}` by the grid Riemann sum.
pub fn lp_norm(grid: &Grid, rho: &[f64], p: f64) -> f64 {
    let s: f64 = rho.iter().map(|r| r.max(0.0).powf(p)).sum::<f64>() * grid.cell_volume();
    s.powf(1.0 / p)
}

/// Current split into its convective and spin-curl parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentParts {
    /// `Σλ Im(ū(ħ∇ − iA)u)`.
    pub convective: VectorField,
    /// `Σλ ∇×(ūσu)` restricted to the in-plane components for `d = 2`; `None` for `d = 1`.
    pub spin_curl: Option<VectorField>,
    pub hbar: f64,
}

impl CurrentParts {
    /// `convective − ħ ∇×s`, the mixed-state current as written with the spin curl.
    pub fn total(&self) -> VectorField {
        self.combine(-self.hbar)
    }

    /// `convective + (ħ/2) ∇×s`, the value of the compact `Re(u†σ(σ·P)u)` form.
    pub fn total_compact(&self) -> VectorField {
        self.combine(0.5 * self.hbar)
    }

    fn combine(&self, factor: f64) -> VectorField {
        let mut out = self.convective.clone();
        if let Some(sc) = &self.spin_curl {
            for c in 0..out.ncomp() {
                for (o, s) in out.comp_mut(c).iter_mut().zip(sc.comp(c)) {
                    *o += factor * s;
                }
            }
        }
        out
    }
}

/// Spin density `s = ūσu` of one member (3 components).
pub fn spin_density(u: &SpinorField) -> [Vec<f64>; 3] {
    let n = u.grid().size();
    let mut s = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let (a, b) = (u.comp(0)[i], u.comp(1)[i]);
        let ab = a.conj() * b;
        s[0][i] = 2.0 * ab.re;
        s[1][i] = 2.0 * ab.im;
        s[2][i] = a.norm_sqr() - b.norm_sqr();
    }
    s
}

fn real_field(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Convective and spin-curl parts of the mixed-state current.
pub fn current_parts(state: &MixedState, fields: &FieldSet) -> Result<CurrentParts> {
    let grid = *state.grid();
    if fields.grid() != &grid {
        return Err(Error::ShapeMismatch(
            "field grid differs from state grid".into(),
        ));
    }
    let d = grid.dim();
    let n = grid.size();
    let hbar = state.hbar();
    let sp = grid.spectral();
    let per = par::map(state.members(), |u| {
        let mut conv = vec![vec![0.0; n]; d];
        for s in 0..2 {
            let g = sp.gradient(u.comp(s));
            for a in 0..d {
                for i in 0..n {
                    conv[a][i] += hbar * (u.comp(s)[i].conj() * g[a][i]).im;
                }
            }
        }
        let rho = u.density();
        if !fields.a_is_zero() {
            for (a, c) in conv.iter_mut().enumerate() {
                for i in 0..n {
                    c[i] -= fields.a().comp(a)[i] * rho[i];
                }
            }
        }
        (conv, spin_density(u))
    });
    let mut conv = vec![vec![0.0; n]; d];
    let mut spin = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (w, (c, s)) in state.weights().iter().zip(per) {
        for a in 0..d {
            for i in 0..n {
                conv[a][i] += w * c[a][i];
            }
        }
        for b in 0..3 {
            for i in 0..n {
                spin[b][i] += w * s[b][i];
            }
        }
    }
    let deriv = |comp: &[f64], axis: usize| -> Vec<f64> {
        let hat = sp.forward(&real_field(comp));
        sp.derivative_from_hat(&hat, axis)
            .iter()
            .map(|z| z.re)
            .collect()
    };
    let spin_curl = match d {
        1 => None,
        2 => {
            let dy = deriv(&spin[2], 1);
            let dx = deriv(&spin[2], 0);
            Some(VectorField::new(
                grid,
                vec![dy, dx.iter().map(|v| -v).collect()],
            )?)
        }
        _ => {
            let c0: Vec<f64> = deriv(&spin[2], 1)
                .iter()
                .zip(deriv(&spin[1], 2))
                .map(|(p, q)| p - q)
                .collect();
            let c1: Vec<f64> = deriv(&spin[0], 2)
                .iter()
                .zip(deriv(&spin[2], 0))
                .map(|(p, q)| p - q)
                .collect();
            let c2: Vec<f64> = deriv(&spin[1], 0)
                .iter()
                .zip(deriv(&spin[0], 1))
                .map(|(p, q)| p - q)
                .collect();
            Some(VectorField::new(grid, vec![c0, c1, c2])?)
        }
    };
    Ok(CurrentParts {
        convective: VectorField::new(grid, conv)?,
        spin_curl,
        hbar,
    })
}

/// Mixed-state current `Σλ [Im(ū(ħ∇ − iA)u) − ħ∇×(ūσu)]`.
///
/// For `d = 1` only the convective part exists; [`current_parts`] exposes the split.
pub fn current(state: &MixedState, fields: &FieldSet) -> Result<VectorField> {
    Ok(current_parts(state, fields)?.total())
}

/// Compact form `Σλ Re(u†σ_k (σ·P) u)` with `P = −iħ∇ − A`, computed without the split.
pub fn current_compact(state: &MixedState, fields: &FieldSet) -> Result<VectorField> {
    let grid = *state.grid();
    if grid.dim() == 1 {
        return Err(Error::InvalidState("compact current needs d >= 2".into()));
    }
    let d = grid.dim();
    let n = grid.size();
    let hbar = state.hbar();
    let per = par::map(state.members(), |u| {
        let w = sigma_dot(&kinetic_momentum(u, fields, hbar));
        let mut j = vec![vec![0.0; n]; d];
        for (k, jk) in j.iter_mut().enumerate() {
            for i in 0..n {
                let (p, q) = pauli(k, w[0][i], w[1][i]);
                jk[i] = (u.comp(0)[i].conj() * p + u.comp(1)[i].conj() * q).re;
            }
        }
        j
    });
    let mut out = vec![vec![0.0; n]; d];
    for (wt, j) in state.weights().iter().zip(per) {
        for a in 0..d {
            for i in 0..n {
                out[a][i] += wt * j[a][i];
            }
        }
    }
    VectorField::new(grid, out)
}

/// `‖σ·(ħ∇ − iA)u‖²` for one member (equal to `‖σ·P u‖²`).
fn pauli_kinetic_norm(u: &SpinorField, fields: &FieldSet, hbar: f64) -> f64 {
    let w = sigma_dot(&kinetic_momentum(u, fields, hbar));
    let s: f64 = w.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum();
    s * u.grid().cell_volume()
}

/// `⟨u, σ·b u⟩` for a uniform vector `b`.
fn spin_expectation(u: &SpinorField, b: [f64; 3]) -> f64 {
    let s = spin_density(u);
    let sum: f64 = (0..3).map(|c| b[c] * s[c].iter().sum::<f64>()).sum();
    sum * u.grid().cell_volume()
}

/// Charge and energy with `V_self` the self-consistent part of the potential.
///
/// `E_kin = ½Σλ‖σ·(ħ∇ − iA)u‖²` (plus the override Stern–Gerlach energy in test
/// mode), `E_pot = ½∫|∇V_self|² + ∫V_ext ρ`.
pub fn charge_energy(state: &MixedState, fields: &FieldSet, v_self: &[f64]) -> Result<Observables> {
    let grid = *state.grid();
    if v_self.len() != grid.size() {
        return Err(Error::ShapeMismatch("potential length".into()));
    }
    let hbar = state.hbar();
    let rho = density_values(state);
    let charge: f64 = state
        .weights()
        .iter()
        .zip(state.members())
        .map(|(w, u)| w * u.norm_sqr())
        .sum();
    let kin = par::map(state.members(), |u| {
        let mut e = 0.5 * pauli_kinetic_norm(u, fields, hbar);
        if let Some(b) = fields.b_override() {
            e -= 0.5 * hbar * spin_expectation(u, b);
        }
        e
    });
    let e_kin: f64 = state.weights().iter().zip(kin).map(|(w, e)| w * e).sum();
    let mut e_pot = 0.0;
    if v_self.iter().any(|&v| v != 0.0) {
        let gv = fields::grad(&ScalarField::from_real(grid, v_self)?)?;
        let s: f64 = gv
            .comps()
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x * x)
            .sum();
        e_pot += 0.5 * s * grid.cell_volume();
    }
    if let Some(vext) = fields.v_ext() {
        e_pot += vext.iter().zip(&rho).map(|(v, r)| v * r).sum::<f64>() * grid.cell_volume();
    }
    Ok(Observables {
        rho_diag: rho,
        charge,
        e_kin,
        e_pot,
        e_total: e_kin + e_pot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::sampling::{GaussianPhaseDensity, SamplingScheme};
    use crate::quantum::state::{build_mixed_state, coherent_state, EnsembleSpec};
    use std::f64::consts::PI;

    fn plane_wave(g: &Grid, k: [f64; 2]) -> SpinorField {
        let amp = 1.0 / g.volume().sqrt();
        let prof = ScalarField::from_fn(*g, |x| {
            Complex64::from_polar(amp, k[0] * x[0] + k[1] * x[1])
        });
        SpinorField::from_profile(&prof, [Complex64::new(1.0, 0.0), Complex64::default()])
    }

    #[test]
    fn density_examples() {
        let g = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let u = coherent_state(
            &g,
            0.5,
            g.center(),
            [0.2, 0.0, 0.0],
            1.0,
            [Complex64::new(1.0, 0.0), Complex64::default()],
        )
        .unwrap();
        let v = coherent_state(
            &g,
            0.5,
            [2.0, 2.0, 0.0],
            [0.0; 3],
            0.8,
            [Complex64::new(0.0, 1.0), Complex64::default()],
        )
        .unwrap();
        let s1 = MixedState::new(1.0, vec![1.0], vec![u.clone()], 1.0).unwrap();
        assert!((density(&s1).integral().re - 1.0).abs() < 1e-10);
        let s2 = MixedState::new(0.5, vec![0.5, 0.5], vec![u.clone(), v.clone()], 4.0).unwrap();
        let rho = density(&s2);
        let (du, dv) = (u.density(), v.density());
        for i in 0..g.size() {
            assert!((rho.values()[i].re - 0.5 * (du[i] + dv[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn plane_wave_current_and_energy() {
        let g = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let hbar = 0.5;
        let k = [2.0, -1.0];
        let u = plane_wave(&g, k);
        let s = MixedState::new(hbar, vec![1.0], vec![u], 4.0).unwrap();
        let f = FieldSet::zero(g);
        let rho0 = 1.0 / g.volume();
        let parts = current_parts(&s, &f).unwrap();
        assert!(parts.spin_curl.as_ref().unwrap().max_abs() < 1e-14);
        let j = parts.total();
        for i in 0..g.size() {
            assert!((j.comp(0)[i] - hbar * k[0] * rho0).abs() < 1e-13);
            assert!((j.comp(1)[i] - hbar * k[1] * rho0).abs() < 1e-13);
        }
        // uniform A test gauge
        let a0 = [0.3, -0.7];
        let a = VectorField::from_fn(g, 2, |_| [a0[0], a0[1], 0.0]);
        let fa = FieldSet::new(a, None).unwrap();
        let ja = current(&s, &fa).unwrap();
        for i in 0..g.size() {
            assert!((ja.comp(0)[i] - (hbar * k[0] - a0[0]) * rho0).abs() < 1e-13);
            assert!((ja.comp(1)[i] - (hbar * k[1] - a0[1]) * rho0).abs() < 1e-13);
        }
        let obs = charge_energy(&s, &f, &vec![0.0; g.size()]).unwrap();
        assert!((obs.charge - 1.0).abs() < 1e-10);
        assert!((obs.e_kin - hbar * hbar * 5.0 / 2.0).abs() < 1e-12);
        assert_eq!(obs.e_total, obs.e_kin + obs.e_pot);
    }

    fn generic_state(g: &Grid, fields: &FieldSet, hbar: f64) -> MixedState {
        let spec = EnsembleSpec {
            density: GaussianPhaseDensity::isotropic(2, g.center(), 0.5, [0.4, -0.2, 0.0], 0.3),
            scheme: SamplingScheme::Halton,
            seed: 11,
            spin: [Complex64::new(0.8, 0.0), Complex64::new(0.36, 0.48)],
            width: None,
        };
        build_mixed_state(g, fields, hbar, 1.0, &spec).unwrap()
    }

    #[test]
    fn compact_form_matches_split() {
        let g = Grid::cubic(2, 64, 2.0 * PI).unwrap();
        let a = VectorField::from_fn(g, 2, |x| [0.0, 0.6 * x[0].sin(), 0.0]);
        let f = FieldSet::new(a, None).unwrap();
        let s = generic_state(&g, &f, 0.25);
        let parts = current_parts(&s, &f).unwrap();
        let compact = current_compact(&s, &f).unwrap();
        let expect = parts.total_compact();
        let scale = expect.max_abs();
        assert!(compact.max_diff(&expect) <= 1e-9 * scale);
        // the spin-curl coefficients of the two forms differ by the factor −1/2
        let mixed = parts.total();
        let conv = &parts.convective;
        for c in 0..2 {
            for i in (0..g.size()).step_by(7) {
                let sm = mixed.comp(c)[i] - conv.comp(c)[i];
                let sc = compact.comp(c)[i] - conv.comp(c)[i];
                assert!((sc + 0.5 * sm).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn gauge_covariance() {
        let g = Grid::cubic(2, 64, 2.0 * PI).unwrap();
        let hbar = 0.25;
        let a = VectorField::from_fn(g, 2, |x| [0.2 * x[1].cos(), 0.5 * x[0].sin(), 0.0]);
        let f = FieldSet::new(a.clone(), None).unwrap();
        let s = generic_state(&g, &f, hbar);
        // φ = 0.3 sin(x) cos(y)
        let phi = |x: [f64; 3]| 0.3 * x[0].sin() * x[1].cos();
        let a2 = VectorField::from_fn(g, 2, |x| {
            let b = [0.2 * x[1].cos(), 0.5 * x[0].sin()];
            [
                b[0] + 0.3 * x[0].cos() * x[1].cos(),
                b[1] - 0.3 * x[0].sin() * x[1].sin(),
                0.0,
            ]
        });
        let f2 = FieldSet::new(a2, None).unwrap();
        let members: Vec<SpinorField> = s
            .members()
            .iter()
            .map(|u| {
                let mut w = u.clone();
                for c in 0..2 {
                    for (i, v) in w.comp_mut(c).iter_mut().enumerate() {
                        *v *= Complex64::from_polar(1.0, phi(g.position(i)) / hbar);
                    }
                }
                w
            })
            .collect();
        let s2 = MixedState::new(hbar, s.weights().to_vec(), members, 1.0).unwrap();
        let zero = vec![0.0; g.size()];
        let (o1, o2) = (
            charge_energy(&s, &f, &zero).unwrap(),
            charge_energy(&s2, &f2, &zero).unwrap(),
        );
        assert!((o1.e_kin - o2.e_kin).abs() <= 1e-9 * o1.e_kin);
        let rho_diff = o1
            .rho_diag
            .iter()
            .zip(&o2.rho_diag)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(rho_diff < 1e-12);
        let (j1, j2) = (current(&s, &f).unwrap(), current(&s2, &f2).unwrap());
        assert!(j1.max_diff(&j2) <= 1e-9 * j1.max_abs().max(1.0));
    }

    #[test]
    fn lp_norm_of_constant() {
        let g = Grid::cubic(1, 16, 2.0).unwrap();
        let rho = vec![0.5; 16];
        assert!((lp_norm(&g, &rho, 1.4) - 0.5 * 2f64.powf(1.0 / 1.4)).abs() < 1e-14);
    }
}
