//! Matrix-free Pauli Hamiltonian.
//!
//! The expanded form applied here is
//! `H u = −½ħ²Δu + (iħ/2)(A·∇u + ∇·(A u)) + ½|A|²u + V u − (ħ/2)(σ·B)u`.
//! Splitting the cross term symmetrically keeps the discrete operator exactly
//! Hermitian, so Krylov propagation is unitary to roundoff.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::spectral::{fft, Grid, ScalarField, Spectral, SpinorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Precomputed operator data shared read-only across members.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    grid: Grid,
    hbar: f64,
    sp: Spectral,
    /// `A` components, empty when `A ≡ 0`.
    a: Vec<Vec<f64>>,
    /// `V + ½|A|²`.
    diag: Vec<f64>,
    /// Stern–Gerlach block `−(ħ/2) σ·B` as `(m11, m12)` with `m22 = −m11`, `m21 = conj(m12)`.
    sg: Option<Vec<(f64, Complex64)>>,
}

impl Hamiltonian {
    /// Builds `H` for potential `v` (real, on the field grid).
    pub fn new(fields: &FieldSet, v: &[f64], hbar: f64, stern_gerlach: bool) -> Result<Self> {
        let grid = *fields.grid();
        if v.len() != grid.size() {
            return Err(Error::ShapeMismatch(format!(
                "potential has {} values, grid {}",
                v.len(),
                grid.size()
            )));
        }
        let a: Vec<Vec<f64>> = if fields.a_is_zero() {
            Vec::new()
        } else {
            fields.a().comps().to_vec()
        };
        let mut diag = v.to_vec();
        for comp in &a {
            for (dv, ac) in diag.iter_mut().zip(comp) {
                *dv += 0.5 * ac * ac;
            }
        }
        let sg = if stern_gerlach && !fields.stern_gerlach_vanishes() {
            Some(
                (0..grid.size())
                    .map(|i| {
                        let b = fields.stern_gerlach_field(i);
                        let s = -0.5 * hbar;
                        (s * b[2], Complex64::new(s * b[0], -s * b[1]))
                    })
                    .collect(),
            )
        } else {
            None
        };
        Ok(Hamiltonian {
            grid,
            hbar,
            sp: Spectral::new(&grid),
            a,
            diag,
            sg,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn has_vector_potential(&self) -> bool {
        !self.a.is_empty()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    pub(crate) fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub(crate) fn stern_gerlach_blocks(&self) -> Option<&[(f64, Complex64)]> {
        self.sg.as_deref()
    }

    /// Scalar part (everything except the spin block) applied to one component.
    fn apply_scalar(&self, u: &[Complex64], out: &mut [Complex64]) {
        let shape = self.grid.shape();
        let h = self.hbar;
        let mut hat = u.to_vec();
        fft::forward(&mut hat, shape);
        let c2 = 0.5 * h * h;
        for ((o, v), &k2) in out.iter_mut().zip(&hat).zip(self.sp.k_squared()) {
            *o = v * (c2 * k2);
        }
        if self.a.is_empty() {
            fft::inverse(out, shape);
            for ((o, &d), x) in out.iter_mut().zip(&self.diag).zip(u) {
                *o += d * x;
            }
            return;
        }
        let mut a_dot_grad = vec![Complex64::default(); u.len()];
        let mut buf = vec![Complex64::default(); u.len()];
        for (axis, comp) in self.a.iter().enumerate() {
            let kd = self.sp.k_deriv(axis);
            for ((b, v), &k) in buf.iter_mut().zip(&hat).zip(kd) {
                *b = Complex64::new(-v.im * k, v.re * k);
            }
            fft::inverse(&mut buf, shape);
            // A·∇u, then A u for the divergence term in the same pass
            for (((g, b), &a), x) in a_dot_grad.iter_mut().zip(buf.iter_mut()).zip(comp).zip(u) {
                *g += a * *b;
                *b = a * x;
            }
            fft::forward(&mut buf, shape);
            // ∇·(A u), accumulated in Fourier space with the (iħ/2) prefactor
            for ((o, b), &k) in out.iter_mut().zip(&buf).zip(kd) {
                *o += b * (-0.5 * h * k);
            }
        }
        fft::inverse(out, shape);
        let c = I * (0.5 * h);
        for (((o, g), &d), x) in out.iter_mut().zip(&a_dot_grad).zip(&self.diag).zip(u) {
            *o += c * g + d * x;
        }
    }

    /// `H` on a flattened spinor `[u_1 ; u_2]`, written into `out`.
    pub fn apply_flat(&self, u: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.size();
        let (u1, u2) = u.split_at(n);
        let (o1, o2) = out.split_at_mut(n);
        self.apply_scalar(u1, o1);
        self.apply_scalar(u2, o2);
        if let Some(sg) = &self.sg {
            for i in 0..n {
                let (m11, m12) = sg[i];
                let a = u1[i];
                let b = u2[i];
                o1[i] += m11 * a + m12 * b;
                o2[i] += m12.conj() * a - m11 * b;
            }
        }
    }

    pub fn apply(&self, u: &SpinorField) -> Result<SpinorField> {
        if u.grid() != &self.grid {
            return Err(Error::ShapeMismatch(
                "spinor grid differs from Hamiltonian grid".into(),
            ));
        }
        let flat = flatten(u);
        let mut out = vec![Complex64::default(); flat.len()];
        self.apply_flat(&flat, &mut out);
        Ok(unflatten(&self.grid, out))
    }
}

pub(crate) fn flatten(u: &SpinorField) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(2 * u.grid().size());
    v.extend_from_slice(u.comp(0));
    v.extend_from_slice(u.comp(1));
    v
}

pub(crate) fn unflatten(grid: &Grid, mut v: Vec<Complex64>) -> SpinorField {
    let down = v.split_off(grid.size());
    SpinorField::new(*grid, v, down).expect("flattened spinor has matching length")
}

fn real_potential(v: &ScalarField, grid: &Grid) -> Result<Vec<f64>> {
    if v.grid() != grid {
        return Err(Error::ShapeMismatch(
            "potential grid differs from field grid".into(),
        ));
    }
    v.require_real("V", 1e-12)?;
    Ok(v.real_parts())
}

/// `H u` in the expanded form.
pub fn apply_pauli_hamiltonian(
    u: &SpinorField,
    fields: &FieldSet,
    v: &ScalarField,
    hbar: f64,
) -> Result<SpinorField> {
    let vv = real_potential(v, fields.grid())?;
    Hamiltonian::new(fields, &vv, hbar, true)?.apply(u)
}

/// `P_a u = −iħ ∂_a u − A_a u` for every axis, componentwise.
pub(crate) fn kinetic_momentum(
    u: &SpinorField,
    fields: &FieldSet,
    hbar: f64,
) -> Vec<[Vec<Complex64>; 2]> {
    let grid = u.grid();
    let sp = grid.spectral();
    let d = grid.dim();
    let grads: Vec<Vec<Vec<Complex64>>> = (0..2).map(|s| sp.gradient(u.comp(s))).collect();
    (0..d)
        .map(|a| {
            let acomp = fields.a().comp(a);
            let make = |s: usize| -> Vec<Complex64> {
                grads[s][a]
                    .iter()
                    .zip(u.comp(s))
                    .zip(acomp)
                    .map(|((g, v), &ai)| -I * hbar * g - ai * v)
                    .collect()
            };
            [make(0), make(1)]
        })
        .collect()
}

/// `Σ_a σ_a w_a` for spinors `w_a` (only the first `d` Pauli matrices).
pub(crate) fn sigma_dot(w: &[[Vec<Complex64>; 2]]) -> [Vec<Complex64>; 2] {
    let n = w[0][0].len();
    let mut o1 = vec![Complex64::default(); n];
    let mut o2 = vec![Complex64::default(); n];
    for (a, wa) in w.iter().enumerate() {
        for i in 0..n {
            let (x, y) = (wa[0][i], wa[1][i]);
            let (p, q) = pauli(a, x, y);
            o1[i] += p;
            o2[i] += q;
        }
    }
    [o1, o2]
}

/// `σ_a (x, y)^T`.
pub(crate) fn pauli(a: usize, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    match a {
        0 => (y, x),
        1 => (-I * y, I * x),
        _ => (x, -y),
    }
}

/// `½(σ·P)² u + V u` with `P = −iħ∇ − A`, plus the explicit override term in test mode.
///
/// Independent of [`Hamiltonian`]; agreement of the two is the Pauli vector identity.
pub fn apply_pauli_identity_form(
    u: &SpinorField,
    fields: &FieldSet,
    v: &ScalarField,
    hbar: f64,
) -> Result<SpinorField> {
    let grid = *fields.grid();
    if u.grid() != &grid {
        return Err(Error::ShapeMismatch(
            "spinor grid differs from field grid".into(),
        ));
    }
    let vv = real_potential(v, &grid)?;
    let first = sigma_dot(&kinetic_momentum(u, fields, hbar));
    let w = SpinorField::new(grid, first[0].clone(), first[1].clone())?;
    let second = sigma_dot(&kinetic_momentum(&w, fields, hbar));
    let mut up = Vec::with_capacity(grid.size());
    let mut down = Vec::with_capacity(grid.size());
    for i in 0..grid.size() {
        let (x, y) = (u.comp(0)[i], u.comp(1)[i]);
        let mut r1 = 0.5 * second[0][i] + vv[i] * x;
        let mut r2 = 0.5 * second[1][i] + vv[i] * y;
        if let Some(b) = fields.b_override() {
            for (a, &ba) in b.iter().enumerate() {
                let (p, q) = pauli(a, x, y);
                r1 -= 0.5 * hbar * ba * p;
                r2 -= 0.5 * hbar * ba * q;
            }
        }
        up.push(r1);
        down.push(r2);
    }
    SpinorField::new(grid, up, down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::VectorField;
    use std::f64::consts::PI;

    fn smooth_spinor(g: &Grid) -> SpinorField {
        let up = (0..g.size())
            .map(|i| {
                let x = g.position(i);
                Complex64::new(x[0].sin() + 0.3, (x[1] * 2.0).cos()) * 0.5
            })
            .collect();
        let down = (0..g.size())
            .map(|i| {
                let x = g.position(i);
                Complex64::new((x[0] + x[1]).cos(), 0.2 * x[1].sin())
            })
            .collect();
        SpinorField::new(*g, up, down).unwrap()
    }

    fn smooth_fields(g: &Grid) -> (FieldSet, ScalarField) {
        let a = VectorField::from_fn(*g, 2, |x| [0.4 * x[1].cos(), 0.7 * x[0].sin() + 0.2, 0.0]);
        let f = FieldSet::new(a, None).unwrap();
        let v = ScalarField::from_real_fn(*g, |x| 0.5 * (x[0] - x[1]).cos());
        (f, v)
    }

    fn rel_diff(a: &SpinorField, b: &SpinorField) -> f64 {
        let mut d = a.clone();
        for s in 0..2 {
            for (x, y) in d.comp_mut(s).iter_mut().zip(b.comp(s)) {
                *x -= y;
            }
        }
        d.norm() / b.norm()
    }

    #[test]
    fn plane_wave_eigenvalue() {
        let g = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let f = FieldSet::zero(g);
        let v = ScalarField::zeros(g);
        let hbar = 0.3;
        let k = [3.0, -2.0];
        let prof =
            ScalarField::from_fn(g, |x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]));
        let u =
            SpinorField::from_profile(&prof, [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let hu = apply_pauli_hamiltonian(&u, &f, &v, hbar).unwrap();
        let e = hbar * hbar * 13.0 / 2.0;
        let mut expect = u.clone();
        expect.scale(Complex64::new(e, 0.0));
        assert!(hu.max_diff(&expect) < 1e-11);
    }

    #[test]
    fn override_spin_up_eigenvalue() {
        let g = Grid::cubic(2, 16, 1.0).unwrap();
        let b0 = 1.7;
        let f = FieldSet::uniform_b_override(g, [0.0, 0.0, b0]);
        let v = ScalarField::zeros(g);
        let hbar = 0.25;
        let prof = ScalarField::from_real_fn(g, |_| 1.0);
        let u = SpinorField::from_profile(&prof, [Complex64::new(1.0, 0.0), Complex64::default()]);
        let hu = apply_pauli_hamiltonian(&u, &f, &v, hbar).unwrap();
        let mut expect = u.clone();
        expect.scale(Complex64::new(-hbar * b0 / 2.0, 0.0));
        assert!(hu.max_diff(&expect) < 1e-13);
    }

    #[test]
    fn pauli_identity_equivalence() {
        let g = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let (f, v) = smooth_fields(&g);
        let u = smooth_spinor(&g);
        for hbar in [1.0, 0.25] {
            let a = apply_pauli_hamiltonian(&u, &f, &v, hbar).unwrap();
            let b = apply_pauli_identity_form(&u, &f, &v, hbar).unwrap();
            assert!(
                rel_diff(&a, &b) < 1e-9,
                "hbar {hbar}: {:e}",
                rel_diff(&a, &b)
            );
        }
        let fo = FieldSet::uniform_b_override(g, [0.3, -0.5, 0.8]);
        let a = apply_pauli_hamiltonian(&u, &fo, &v, 0.5).unwrap();
        let b = apply_pauli_identity_form(&u, &fo, &v, 0.5).unwrap();
        assert!(rel_diff(&a, &b) < 1e-9);
    }

    #[test]
    fn pauli_identity_3d() {
        let g = Grid::cubic(3, 16, 2.0 * PI).unwrap();
        let a = VectorField::from_fn(g, 3, |x| {
            [0.3 * x[1].sin(), 0.2 * x[2].cos(), 0.5 * x[0].sin()]
        });
        let f = FieldSet::new(a, None).unwrap();
        let v = ScalarField::from_real_fn(g, |x| x[2].cos());
        let prof = ScalarField::from_fn(g, |x| Complex64::new(x[0].cos(), (x[1] + x[2]).sin()));
        let u =
            SpinorField::from_profile(&prof, [Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)]);
        let ha = apply_pauli_hamiltonian(&u, &f, &v, 0.5).unwrap();
        let hb = apply_pauli_identity_form(&u, &f, &v, 0.5).unwrap();
        assert!(rel_diff(&ha, &hb) < 1e-9);
    }

    #[test]
    fn hermitian() {
        let g = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let (f, v) = smooth_fields(&g);
        let u = smooth_spinor(&g);
        let prof =
            ScalarField::from_fn(g, |x| Complex64::new((2.0 * x[1]).sin(), x[0].cos() * 0.4));
        let w =
            SpinorField::from_profile(&prof, [Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.0)]);
        let h = Hamiltonian::new(&f, &v.real_parts(), 0.4, true).unwrap();
        let a = h.apply(&u).unwrap().inner(&w);
        let b = u.inner(&h.apply(&w).unwrap());
        assert!((a - b).norm() <= 1e-12 * a.norm().max(b.norm()));
    }

    #[test]
    fn rejects_complex_potential() {
        let g = Grid::cubic(1, 16, 1.0).unwrap();
        let f = FieldSet::zero(g);
        let v = ScalarField::from_fn(g, |_| Complex64::new(0.0, 1.0));
        let u = SpinorField::zeros(g);
        assert!(apply_pauli_hamiltonian(&u, &f, &v, 0.5).is_err());
    }
}
