//! External electromagnetic configurations and the Poisson solver.
//!
//! The magnetic potential `A` is external and time independent; `B = ∇×A` is
//! derived spectrally. In two dimensions `B` is the out-of-plane scalar
//! `∂_x A_y − ∂_y A_x`. A uniform field has no periodic potential, so uniform
//! Stern–Gerlach physics is exposed through a `b_override` test mode with `A = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fft, Grid, ScalarField, Spectral, VectorField};

/// Magnetic field derived from `A`.
#[derive(Clone, Debug, PartialEq)]
pub enum MagneticField {
    /// Out-of-plane component for `d = 2`.
    Planar(Vec<f64>),
    /// Full 3-vector for `d = 3`.
    Vector(VectorField),
}

impl MagneticField {
    /// The field at flat index `i` as a 3-vector.
    pub fn at(&self, i: usize) -> [f64; 3] {
        match self {
            MagneticField::Planar(b) => [0.0, 0.0, b[i]],
            MagneticField::Vector(v) => v.at(i),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            MagneticField::Planar(b) => b.iter().fold(0.0, |m, v| m.max(v.abs())),
            MagneticField::Vector(v) => v.max_abs(),
        }
    }
}

/// Analytic field presets. `omega` is the trap frequency, `amplitude` the
/// amplitude of `A_y = a sin(2πx/L_x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    Zero,
    SinusoidalB {
        amplitude: f64,
    },
    HarmonicV {
        omega: f64,
    },
    UniformBOverride {
        b0: [f64; 3],
    },
    /// Smooth periodic well `ω² Σ (L/2π)² (1 − cos(2π(x−c)/L))`, harmonic near the centre.
    CosineWell {
        omega: f64,
    },
    /// `sinusoidal_b` plus `cosine_well`.
    MagneticTrap {
        amplitude: f64,
        omega: f64,
    },
}

/// Parameter bag used when a preset is selected by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub amplitude: Option<f64>,
    pub omega: Option<f64>,
    pub b0: Option<[f64; 3]>,
}

pub const PRESET_NAMES: [&str; 6] = [
    "zero",
    "sinusoidal_B",
    "harmonic_V",
    "uniform_B_override",
    "cosine_well",
    "magnetic_trap",
];

impl Preset {
    pub fn from_name(name: &str, p: &PresetParams) -> Result<Preset> {
        let amplitude = p.amplitude.unwrap_or(1.0);
        let omega = p.omega.unwrap_or(1.0);
        Ok(match name {
            "zero" => Preset::Zero,
            "sinusoidal_B" | "sinusoidal_b" => Preset::SinusoidalB { amplitude },
            "harmonic_V" | "harmonic_v" => Preset::HarmonicV { omega },
            "uniform_B_override" | "uniform_b_override" => Preset::UniformBOverride {
                b0: p.b0.unwrap_or([0.0, 0.0, 1.0]),
            },
            "cosine_well" => Preset::CosineWell { omega },
            "magnetic_trap" => Preset::MagneticTrap { amplitude, omega },
            other => return Err(Error::Fields(format!("unknown preset `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::SinusoidalB { .. } => "sinusoidal_B",
            Preset::HarmonicV { .. } => "harmonic_V",
            Preset::UniformBOverride { .. } => "uniform_B_override",
            Preset::CosineWell { .. } => "cosine_well",
            Preset::MagneticTrap { .. } => "magnetic_trap",
        }
    }
}

/// External fields on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet {
    grid: Grid,
    a: VectorField,
    b: Option<MagneticField>,
    v_ext: Option<Vec<f64>>,
    b_override: Option<[f64; 3]>,
    preset: Option<Preset>,
}

impl FieldSet {
    /// Fields with potential `a` (real, `d` components) and optional external potential.
    pub fn new(a: VectorField, v_ext: Option<ScalarField>) -> Result<FieldSet> {
        let grid = *a.grid();
        if a.ncomp() != grid.dim() {
            return Err(Error::Fields(format!(
                "A needs {} components, got {}",
                grid.dim(),
                a.ncomp()
            )));
        }
        let b = if grid.dim() == 1 {
            if !a.is_zero() {
                return Err(Error::Fields("d = 1 requires A = 0".into()));
            }
            None
        } else {
            Some(curl(&a)?)
        };
        let v_ext = match v_ext {
            Some(v) => {
                if v.grid() != &grid {
                    return Err(Error::ShapeMismatch(
                        "V_ext grid differs from A grid".into(),
                    ));
                }
                v.require_real("V_ext", 1e-12)?;
                Some(v.real_parts())
            }
            None => None,
        };
        Ok(FieldSet {
            grid,
            a,
            b,
            v_ext,
            b_override: None,
            preset: None,
        })
    }

    /// `A = 0`, no external potential.
    pub fn zero(grid: Grid) -> FieldSet {
        let b = match grid.dim() {
            1 => None,
            2 => Some(MagneticField::Planar(vec![0.0; grid.size()])),
            _ => Some(MagneticField::Vector(VectorField::zeros(grid, 3))),
        };
        FieldSet {
            grid,
            a: VectorField::zeros(grid, grid.dim()),
            b,
            v_ext: None,
            b_override: None,
            preset: Some(Preset::Zero),
        }
    }

    /// Test mode: `A = 0` and a uniform field `b0` acting only through the Stern–Gerlach term.
    pub fn uniform_b_override(grid: Grid, b0: [f64; 3]) -> FieldSet {
        let mut f = FieldSet::zero(grid);
        f.b_override = Some(b0);
        f.preset = Some(Preset::UniformBOverride { b0 });
        f
    }

    pub fn with_external_potential(mut self, v: Option<Vec<f64>>) -> Result<FieldSet> {
        if let Some(ref vv) = v {
            if vv.len() != self.grid.size() {
                return Err(Error::ShapeMismatch("V_ext length".into()));
            }
        }
        self.v_ext = v;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn a(&self) -> &VectorField {
        &self.a
    }

    pub fn a_is_zero(&self) -> bool {
        self.a.is_zero()
    }

    /// `B = ∇×A` (absent for `d = 1`).
    pub fn b(&self) -> Option<&MagneticField> {
        self.b.as_ref()
    }

    pub fn b_override(&self) -> Option<[f64; 3]> {
        self.b_override
    }

    pub fn preset(&self) -> Option<&Preset> {
        self.preset.as_ref()
    }

    pub fn v_ext(&self) -> Option<&[f64]> {
        self.v_ext.as_deref()
    }

    /// Field entering `σ·B` at flat index `i`: the override when set, otherwise the curl.
    /// In two dimensions only the out-of-plane component is non-zero.
    pub fn stern_gerlach_field(&self, i: usize) -> [f64; 3] {
        if let Some(b0) = self.b_override {
            return b0;
        }
        match &self.b {
            Some(b) => b.at(i),
            None => [0.0; 3],
        }
    }

    /// True when `σ·B` vanishes identically.
    pub fn stern_gerlach_vanishes(&self) -> bool {
        match self.b_override {
            Some(b0) => b0 == [0.0; 3],
            None => self.b.as_ref().map(|b| b.max_abs() == 0.0).unwrap_or(true),
        }
    }

    /// Copy with the Stern–Gerlach coupling removed (override cleared, curl zeroed).
    pub fn without_stern_gerlach(&self) -> FieldSet {
        let mut f = self.clone();
        f.b_override = None;
        f.b = match self.grid.dim() {
            1 => None,
            2 => Some(MagneticField::Planar(vec![0.0; self.grid.size()])),
            _ => Some(MagneticField::Vector(VectorField::zeros(self.grid, 3))),
        };
        f
    }

    /// `A` at an arbitrary point by trigonometric interpolation is not needed; presets
    /// provide closed forms. This evaluates `A` at grid point `i` as a 3-vector.
    pub fn a_at(&self, i: usize) -> [f64; 3] {
        self.a.at(i)
    }
}

/// `∇×A`: a 3-vector for `d = 3`, the out-of-plane scalar for `d = 2`.
pub fn curl(a: &VectorField) -> Result<MagneticField> {
    let grid = *a.grid();
    let sp = Spectral::new(&grid);
    let deriv = |c: usize, axis: usize| -> Vec<f64> {
        let vals: Vec<Complex64> = a.comp(c).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let hat = sp.forward(&vals);
        sp.derivative_from_hat(&hat, axis)
            .iter()
            .map(|v| v.re)
            .collect()
    };
    match grid.dim() {
        1 => Err(Error::Fields("curl is undefined for d = 1".into())),
        2 => {
            if a.ncomp() != 2 {
                return Err(Error::Fields("A must have 2 components in d = 2".into()));
            }
            let dxay = deriv(1, 0);
            let dyax = deriv(0, 1);
            Ok(MagneticField::Planar(
                dxay.iter().zip(&dyax).map(|(p, q)| p - q).collect(),
            ))
        }
        _ => {
            if a.ncomp() != 3 {
                return Err(Error::Fields("A must have 3 components in d = 3".into()));
            }
            let bx: Vec<f64> = deriv(2, 1)
                .iter()
                .zip(deriv(1, 2))
                .map(|(p, q)| p - q)
                .collect();
            let by: Vec<f64> = deriv(0, 2)
                .iter()
                .zip(deriv(2, 0))
                .map(|(p, q)| p - q)
                .collect();
            let bz: Vec<f64> = deriv(1, 0)
                .iter()
                .zip(deriv(0, 1))
                .map(|(p, q)| p - q)
                .collect();
            Ok(MagneticField::Vector(VectorField::new(
                grid,
                vec![bx, by, bz],
            )?))
        }
    }
}

/// Spectral gradient of a real potential.
pub fn grad(v: &ScalarField) -> Result<VectorField> {
    v.require_real("potential", 1e-10)?;
    let grid = *v.grid();
    let sp = Spectral::new(&grid);
    let comps = sp
        .gradient(v.values())
        .into_iter()
        .map(|c| c.into_iter().map(|z| z.re).collect())
        .collect();
    VectorField::new(grid, comps)
}

/// Periodic Poisson solve `−ΔV = ρ − mean(ρ)` with `V̂(0) = 0`.
pub fn solve_poisson(rho: &ScalarField) -> Result<ScalarField> {
    rho.require_real("rho", 1e-10)?;
    let grid = *rho.grid();
    let sp = Spectral::new(&grid);
    let mut hat = sp.forward(rho.values());
    for (v, &k2) in hat.iter_mut().zip(sp.k_squared()) {
        if k2 == 0.0 {
            *v = Complex64::default();
        } else {
            *v /= k2;
        }
    }
    sp.inverse_in_place(&mut hat);
    for v in hat.iter_mut() {
        v.im = 0.0;
    }
    ScalarField::new(grid, hat)
}

/// Poisson solve from a real density slice.
pub fn solve_poisson_real(grid: &Grid, rho: &[f64]) -> Result<Vec<f64>> {
    let f = ScalarField::from_real(*grid, rho)?;
    Ok(solve_poisson(&f)?.real_parts())
}

/// Free-space Poisson solve in `d = 3`: `V = ρ * 1/(4π|x|)` for `ρ` supported in the box.
///
/// Uses a kernel truncated at the box diameter `R`, whose transform
/// `(1 − cos(|k|R))/|k|²` is smooth, on a grid zero-padded fourfold per axis.
pub fn solve_poisson_free_space(rho: &ScalarField) -> Result<ScalarField> {
    rho.require_real("rho", 1e-10)?;
    let grid = *rho.grid();
    if grid.dim() != 3 {
        return Err(Error::Fields(
            "free-space Poisson mode requires d = 3".into(),
        ));
    }
    let pad = 4;
    let shape = [grid.n(0) * pad, grid.n(1) * pad, grid.n(2) * pad];
    let lens = [
        grid.length(0) * pad as f64,
        grid.length(1) * pad as f64,
        grid.length(2) * pad as f64,
    ];
    let r_trunc = grid.lengths().iter().map(|l| l * l).sum::<f64>().sqrt();
    let big = Grid::new(&shape, &lens)?;
    let mut buf = vec![Complex64::default(); big.size()];
    for i in 0..grid.size() {
        let idx = grid.multi_index(i);
        buf[big.flat_index(&idx)] = rho.values()[i];
    }
    fft::forward(&mut buf, &shape);
    let sp = Spectral::new(&big);
    for (v, &k2) in buf.iter_mut().zip(sp.k_squared()) {
        let g = if k2 == 0.0 {
            0.5 * r_trunc * r_trunc
        } else {
            let k = k2.sqrt();
            (1.0 - (k * r_trunc).cos()) / k2
        };
        *v *= g;
    }
    fft::inverse(&mut buf, &shape);
    let out = (0..grid.size())
        .map(|i| {
            let idx = grid.multi_index(i);
            Complex64::new(buf[big.flat_index(&idx)].re, 0.0)
        })
        .collect();
    ScalarField::new(grid, out)
}

/// Builds the analytic field set for `preset` on `grid`.
pub fn preset_fields(grid: Grid, preset: &Preset) -> Result<FieldSet> {
    let d = grid.dim();
    let c = grid.center();
    let sinusoidal_a = |amplitude: f64| -> Result<VectorField> {
        if d == 1 {
            return Err(Error::Fields("sinusoidal_B needs d >= 2".into()));
        }
        let kappa = 2.0 * PI / grid.length(0);
        Ok(VectorField::from_fn(grid, d, |x| {
            [0.0, amplitude * (kappa * x[0]).sin(), 0.0]
        }))
    };
    let cosine_well = |omega: f64| -> Vec<f64> {
        (0..grid.size())
            .map(|i| {
                let x = grid.position(i);
                (0..d)
                    .map(|a| {
                        let l = grid.length(a);
                        let s = l / (2.0 * PI);
                        omega * omega * s * s * (1.0 - (2.0 * PI * (x[a] - c[a]) / l).cos())
                    })
                    .sum()
            })
            .collect()
    };
    let mut fs = match *preset {
        Preset::Zero => {
            FieldSet::zero(grid).with_external_potential(Some(vec![0.0; grid.size()]))?
        }
        Preset::SinusoidalB { amplitude } => FieldSet::new(sinusoidal_a(amplitude)?, None)?,
        Preset::HarmonicV { omega } => {
            let v: Vec<f64> = (0..grid.size())
                .map(|i| {
                    let dx = grid.periodic_delta(&grid.position(i), &c);
                    0.5 * omega * omega * dx.iter().map(|t| t * t).sum::<f64>()
                })
                .collect();
            FieldSet::zero(grid).with_external_potential(Some(v))?
        }
        Preset::UniformBOverride { b0 } => FieldSet::uniform_b_override(grid, b0),
        Preset::CosineWell { omega } => {
            FieldSet::zero(grid).with_external_potential(Some(cosine_well(omega)))?
        }
        Preset::MagneticTrap { amplitude, omega } => FieldSet::new(sinusoidal_a(amplitude)?, None)?
            .with_external_potential(Some(cosine_well(omega)))?,
    };
    fs.preset = Some(preset.clone());
    Ok(fs)
}

/// Looks a preset up by name.
pub fn preset_by_name(grid: Grid, name: &str, params: &PresetParams) -> Result<FieldSet> {
    preset_fields(grid, &Preset::from_name(name, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> Grid {
        Grid::cubic(2, 32, 2.0 * PI).unwrap()
    }

    #[test]
    fn curl_examples() {
        let g = grid2();
        let a = VectorField::from_fn(g, 2, |x| [0.0, 0.7 * x[0].sin(), 0.0]);
        let b = curl(&a).unwrap();
        for i in 0..g.size() {
            let x = g.position(i);
            assert!((b.at(i)[2] - 0.7 * x[0].cos()).abs() < 1e-12);
        }
        // A = ∇φ for φ = sin(x) cos(2y) → B = 0
        let grad_phi = VectorField::from_fn(g, 2, |x| {
            [
                x[0].cos() * (2.0 * x[1]).cos(),
                -2.0 * x[0].sin() * (2.0 * x[1]).sin(),
                0.0,
            ]
        });
        assert!(curl(&grad_phi).unwrap().max_abs() < 1e-10);
        let g3 = Grid::cubic(3, 8, 1.0).unwrap();
        assert_eq!(curl(&VectorField::zeros(g3, 3)).unwrap().max_abs(), 0.0);
        let g1 = Grid::cubic(1, 8, 1.0).unwrap();
        assert!(curl(&VectorField::zeros(g1, 1)).is_err());
    }

    #[test]
    fn curl_is_gauge_invariant_and_divergence_free() {
        let g = Grid::cubic(3, 16, 2.0 * PI).unwrap();
        let a = VectorField::from_fn(g, 3, |x| {
            [
                x[1].sin() * x[2].cos(),
                (2.0 * x[0]).cos(),
                x[0].sin() * x[1].sin(),
            ]
        });
        let phi_grad = VectorField::from_fn(g, 3, |x| {
            // φ = cos(x) sin(y) + sin(z)
            [
                -x[0].sin() * x[1].sin(),
                x[0].cos() * x[1].cos(),
                x[2].cos(),
            ]
        });
        let mut shifted = a.clone();
        for c in 0..3 {
            for (s, p) in shifted.comp_mut(c).iter_mut().zip(phi_grad.comp(c)) {
                *s += p;
            }
        }
        let b1 = curl(&a).unwrap();
        let b2 = curl(&shifted).unwrap();
        let (MagneticField::Vector(v1), MagneticField::Vector(v2)) = (&b1, &b2) else {
            panic!("expected vector field");
        };
        assert!(v1.max_diff(v2) < 1e-10);
        let sp = Spectral::new(&g);
        let comps: Vec<Vec<Complex64>> = (0..3)
            .map(|c| v1.comp(c).iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        let div = sp.divergence(&comps);
        assert!(div.iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn poisson_examples() {
        let g = Grid::cubic(1, 32, 2.0 * PI).unwrap();
        let rho = ScalarField::from_real_fn(g, |x| x[0].cos());
        let v = solve_poisson(&rho).unwrap();
        assert!(v.max_diff(&rho) < 1e-12);
        let zero = ScalarField::zeros(g);
        assert_eq!(solve_poisson(&zero).unwrap().max_abs(), 0.0);
        let complex = ScalarField::from_fn(g, |x| Complex64::new(0.0, x[0].sin()));
        assert!(matches!(
            solve_poisson(&complex),
            Err(Error::NotReal { .. })
        ));
    }

    #[test]
    fn poisson_residual_2d() {
        let g = Grid::new(&[32, 16], &[4.0, 3.0]).unwrap();
        let rho = ScalarField::from_real_fn(g, |x| {
            (-(x[0] - 2.0).powi(2) - 2.0 * (x[1] - 1.5).powi(2)).exp() + 0.3
        });
        let v = solve_poisson(&rho).unwrap();
        let lap = g.spectral().laplacian(v.values());
        let mean = rho.integral().re / g.volume();
        let resid = lap
            .iter()
            .zip(rho.values())
            .map(|(l, r)| (-l.re - (r.re - mean)).abs())
            .fold(0.0, f64::max);
        assert!(resid <= 1e-10 * rho.max_abs());
    }

    #[test]
    fn grad_examples() {
        let g = Grid::cubic(1, 32, 2.0 * PI).unwrap();
        let v = ScalarField::from_real_fn(g, |x| x[0].cos());
        let gv = grad(&v).unwrap();
        for i in 0..g.size() {
            assert!((gv.comp(0)[i] + g.position(i)[0].sin()).abs() < 1e-12);
        }
        let c = ScalarField::from_real_fn(g, |_| 2.0);
        assert!(grad(&c).unwrap().max_abs() < 1e-14);

        // finite-difference oracle, d = 2, error O(h²)
        let g2 = Grid::cubic(2, 64, 2.0 * PI).unwrap();
        let f = |x: f64, y: f64| (2.0 * x).sin() + (3.0 * y).cos();
        let v2 = ScalarField::from_real_fn(g2, |x| f(x[0], x[1]));
        let gv2 = grad(&v2).unwrap();
        let h = 1e-4;
        for i in (0..g2.size()).step_by(97) {
            let x = g2.position(i);
            let fx = (f(x[0] + h, x[1]) - f(x[0] - h, x[1])) / (2.0 * h);
            let fy = (f(x[0], x[1] + h) - f(x[0], x[1] - h)) / (2.0 * h);
            assert!((gv2.comp(0)[i] - fx).abs() < 1e-7);
            assert!((gv2.comp(1)[i] - fy).abs() < 1e-7);
        }
    }

    #[test]
    fn presets() {
        let g = grid2();
        let z = preset_by_name(g, "zero", &PresetParams::default()).unwrap();
        assert!(z.a_is_zero());
        assert_eq!(z.b().unwrap().max_abs(), 0.0);
        assert!(z.v_ext().unwrap().iter().all(|&v| v == 0.0));

        let s = preset_by_name(
            g,
            "sinusoidal_B",
            &PresetParams {
                amplitude: Some(0.5),
                ..Default::default()
            },
        )
        .unwrap();
        for i in 0..g.size() {
            let x = g.position(i);
            assert!((s.stern_gerlach_field(i)[2] - 0.5 * x[0].cos()).abs() < 1e-12);
            assert!((s.a().comp(1)[i] - 0.5 * x[0].sin()).abs() < 1e-15);
        }

        let h = preset_by_name(
            g,
            "harmonic_V",
            &PresetParams {
                omega: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        let c = g.center();
        let i = g.flat_index(&[20, 10]);
        let x = g.position(i);
        let expect = 0.5 * 4.0 * ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2));
        assert!((h.v_ext().unwrap()[i] - expect).abs() < 1e-12);
        assert!(h.a_is_zero());

        let u = preset_by_name(
            g,
            "uniform_B_override",
            &PresetParams {
                b0: Some([0.0, 0.0, 2.0]),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(u.b_override(), Some([0.0, 0.0, 2.0]));
        assert!(u.a_is_zero());

        let err = preset_by_name(g, "dipole", &PresetParams::default()).unwrap_err();
        assert_eq!(err.stage(), "fields");
        assert!(preset_by_name(
            Grid::cubic(1, 8, 1.0).unwrap(),
            "sinusoidal_B",
            &PresetParams::default()
        )
        .is_err());
    }

    #[test]
    fn free_space_gaussian() {
        // Oracle: radial quadrature of the Newtonian potential of a unit Gaussian,
        // V(r) = (1/r) ∫_0^r ρ(s) s² ds + ∫_r^∞ ρ(s) s ds, with ρ(s) = (2πσ²)^{-3/2} e^{-s²/2σ²}.
        let sigma = 0.5;
        let n = 32;
        let l = 12.0 * sigma;
        let g = Grid::cubic(3, n, l).unwrap();
        let c = g.center();
        let norm = (2.0 * PI * sigma * sigma).powf(-1.5);
        let rho_r = |s: f64| norm * (-s * s / (2.0 * sigma * sigma)).exp();
        let rho = ScalarField::from_real_fn(g, |x| {
            let r2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum();
            norm * (-r2 / (2.0 * sigma * sigma)).exp()
        });
        let v = solve_poisson_free_space(&rho).unwrap();
        let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, m: usize| {
            let h = (b - a) / m as f64;
            let mut s = f(a) + f(b);
            for k in 1..m {
                s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let oracle = |r: f64| {
            let inner = simpson(&|s| rho_r(s) * s * s, 0.0, r, 2000) * 4.0 * PI / (4.0 * PI * r);
            let outer = simpson(&|s| rho_r(s) * s, r, 20.0 * sigma, 4000) * 4.0 * PI / (4.0 * PI);
            inner + outer
        };
        let mut worst: f64 = 0.0;
        for i in 0..g.size() {
            let x = g.position(i);
            let r = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>().sqrt();
            if r >= sigma && r <= 4.0 * sigma {
                let expect = oracle(r);
                worst = worst.max((v.values()[i].re - expect).abs() / expect);
            }
        }
        assert!(worst <= 1e-4, "worst relative error {worst:e}");
    }
}
