//! Electric and magnetic fields as seen by particles.
//!
//! Presets are evaluated in closed form at arbitrary positions; fields that only
//! exist on a grid are interpolated multilinearly with the same weights used
//! for deposition.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{self, FieldSet, Preset};
use crate::spectral::{Grid, ScalarField};

use super::deposit::{interpolate, interpolate_vec};

/// Force field for the characteristics `ẋ = p, ṗ = E + p×B`.
///
/// In two dimensions only the out-of-plane component of `B` is used and the
/// motion stays in the plane; in one dimension `B` is ignored.
#[derive(Clone, Debug, PartialEq)]
pub enum KineticField {
    Uniform {
        dim: usize,
        e: [f64; 3],
        b: [f64; 3],
    },
    /// Closed form of a field preset on the box of `grid`.
    Preset { preset: Preset, grid: Grid },
    /// Grid samples of `E`, `B` and `V`.
    Gridded {
        grid: Grid,
        e: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        v: Vec<f64>,
    },
}

impl KineticField {
    pub fn uniform(dim: usize, e: [f64; 3], b: [f64; 3]) -> Result<KineticField> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Kinetic(format!("dimension {dim} outside 1..3")));
        }
        Ok(KineticField::Uniform { dim, e, b })
    }

    /// Closed form when the field set came from a preset, grid samples otherwise.
    ///
    /// The uniform-`B` override has `A = 0` and so exerts no Lorentz force.
    pub fn from_field_set(fs: &FieldSet) -> Result<KineticField> {
        let grid = *fs.grid();
        if let Some(p) = fs.preset() {
            return Ok(KineticField::Preset {
                preset: p.clone(),
                grid,
            });
        }
        let d = grid.dim();
        let v = fs
            .v_ext()
            .map(|v| v.to_vec())
            .unwrap_or_else(|| vec![0.0; grid.size()]);
        let e = fields::grad(&ScalarField::from_real(grid, &v)?)?
            .comps()
            .iter()
            .map(|c| c.iter().map(|g| -g).collect())
            .collect();
        let b = match fs.b() {
            Some(bf) if d >= 2 => (0..3)
                .map(|c| (0..grid.size()).map(|i| bf.at(i)[c]).collect())
                .collect(),
            _ => vec![vec![0.0; grid.size()]; 3],
        };
        Ok(KineticField::Gridded { grid, e, b, v })
    }

    pub fn dim(&self) -> usize {
        match self {
            KineticField::Uniform { dim, .. } => *dim,
            KineticField::Preset { grid, .. } | KineticField::Gridded { grid, .. } => grid.dim(),
        }
    }

    /// `E(x)`.
    pub fn e(&self, x: &[f64; 3]) -> [f64; 3] {
        let d = self.dim();
        let mut out = match self {
            KineticField::Uniform { e, .. } => *e,
            KineticField::Preset { preset, grid } => preset_e(preset, grid, x),
            KineticField::Gridded { grid, e, .. } => interpolate_vec(grid, e, x),
        };
        for c in out.iter_mut().skip(d) {
            *c = 0.0;
        }
        out
    }

    /// `B(x)`, projected to what acts in dimension `d`.
    pub fn b(&self, x: &[f64; 3]) -> [f64; 3] {
        let raw = match self {
            KineticField::Uniform { b, .. } => *b,
            KineticField::Preset { preset, grid } => preset_b(preset, grid, x),
            KineticField::Gridded { grid, b, .. } => interpolate_vec(grid, b, x),
        };
        match self.dim() {
            1 => [0.0; 3],
            2 => [0.0, 0.0, raw[2]],
            _ => raw,
        }
    }

    /// `V(x)`; for a uniform field `V = −E·x`.
    pub fn potential(&self, x: &[f64; 3]) -> f64 {
        match self {
            KineticField::Uniform { dim, e, .. } => -(0..*dim).map(|a| e[a] * x[a]).sum::<f64>(),
            KineticField::Preset { preset, grid } => preset_v(preset, grid, x),
            KineticField::Gridded { grid, v, .. } => interpolate(grid, v, x),
        }
    }

    /// Upper bound on `|B|` over the box.
    pub fn b_bound(&self) -> f64 {
        match self {
            KineticField::Uniform { .. } => norm(&self.b(&[0.0; 3])),
            KineticField::Preset { preset, grid } => match *preset {
                Preset::SinusoidalB { amplitude } | Preset::MagneticTrap { amplitude, .. }
                    if grid.dim() >= 2 =>
                {
                    amplitude.abs() * 2.0 * PI / grid.length(0)
                }
                _ => 0.0,
            },
            KineticField::Gridded { grid, b, .. } => {
                let lo = if grid.dim() == 2 { 2 } else { 0 };
                if grid.dim() == 1 {
                    return 0.0;
                }
                (0..grid.size())
                    .map(|i| (lo..3).map(|c| b[c][i] * b[c][i]).sum::<f64>().sqrt())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Rejects steps whose rotation angle `dt|B|` exceeds `π`.
    pub fn check_step(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::TimeStep(format!("dt = {dt} must be positive")));
        }
        let b = self.b_bound();
        if dt * b > PI {
            return Err(Error::Kinetic(format!(
                "rotation angle dt·|B| = {} exceeds π",
                dt * b
            )));
        }
        Ok(())
    }
}

pub(crate) fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sinusoidal_b(amplitude: f64, grid: &Grid, x: &[f64; 3]) -> [f64; 3] {
    if grid.dim() < 2 {
        return [0.0; 3];
    }
    // A_y = a sin(κx) ⇒ B_z = aκ cos(κx)
    let kappa = 2.0 * PI / grid.length(0);
    [0.0, 0.0, amplitude * kappa * (kappa * x[0]).cos()]
}

fn cosine_well_e(omega: f64, grid: &Grid, x: &[f64; 3]) -> [f64; 3] {
    let c = grid.center();
    let mut e = [0.0; 3];
    for a in 0..grid.dim() {
        let l = grid.length(a);
        e[a] = -omega * omega * l / (2.0 * PI) * (2.0 * PI * (x[a] - c[a]) / l).sin();
    }
    e
}

fn cosine_well_v(omega: f64, grid: &Grid, x: &[f64; 3]) -> f64 {
    let c = grid.center();
    (0..grid.dim())
        .map(|a| {
            let l = grid.length(a);
            let s = l / (2.0 * PI);
            omega * omega * s * s * (1.0 - (2.0 * PI * (x[a] - c[a]) / l).cos())
        })
        .sum()
}

fn preset_e(preset: &Preset, grid: &Grid, x: &[f64; 3]) -> [f64; 3] {
    match *preset {
        Preset::HarmonicV { omega } => {
            let dx = grid.periodic_delta(x, &grid.center());
            let mut e = [0.0; 3];
            for a in 0..grid.dim() {
                e[a] = -omega * omega * dx[a];
            }
            e
        }
        Preset::CosineWell { omega } | Preset::MagneticTrap { omega, .. } => {
            cosine_well_e(omega, grid, x)
        }
        Preset::Zero | Preset::SinusoidalB { .. } | Preset::UniformBOverride { .. } => [0.0; 3],
    }
}

fn preset_b(preset: &Preset, grid: &Grid, x: &[f64; 3]) -> [f64; 3] {
    match *preset {
        Preset::SinusoidalB { amplitude } | Preset::MagneticTrap { amplitude, .. } => {
            sinusoidal_b(amplitude, grid, x)
        }
        _ => [0.0; 3],
    }
}

fn preset_v(preset: &Preset, grid: &Grid, x: &[f64; 3]) -> f64 {
    match *preset {
        Preset::HarmonicV { omega } => {
            let dx = grid.periodic_delta(x, &grid.center());
            0.5 * omega * omega * dx.iter().map(|t| t * t).sum::<f64>()
        }
        Preset::CosineWell { omega } | Preset::MagneticTrap { omega, .. } => {
            cosine_well_v(omega, grid, x)
        }
        _ => 0.0,
    }
}
