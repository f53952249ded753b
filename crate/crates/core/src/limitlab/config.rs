//! Sweep configuration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::{Preset, PresetParams};
use crate::kinetic::{GaussianPhaseDensity, SamplingScheme};
use crate::wigner::TestFunction;

/// Which limit is being tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// External fields only on both sides.
    Linear,
    /// Both sides coupled to their own Poisson field.
    SelfConsistent,
}

/// How the quantum time step depends on `ħ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// The same `dt` for every `ħ`.
    Fixed,
    /// `min(dt, ħ·dt/4)`.
    HbarScaled,
}

/// Spin of every ensemble member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
    /// `(1, 1)/√2`.
    PlusX,
}

impl Spin {
    pub fn vector(self) -> [Complex64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Spin::Up => [Complex64::new(1.0, 0.0), Complex64::default()],
            Spin::Down => [Complex64::default(), Complex64::new(1.0, 0.0)],
            Spin::PlusX => [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        }
    }
}

/// An `ħ` ladder experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub dim: usize,
    /// Box length (the same on every axis).
    pub length: f64,
    /// Strictly decreasing.
    pub hbars: Vec<f64>,
    pub preset: String,
    #[serde(default)]
    pub preset_params: PresetParams,
    /// Initial phase-space density `f_I`.
    pub initial: GaussianPhaseDensity,
    pub spin: Spin,
    pub t_final: f64,
    pub dt: f64,
    pub dt_policy: DtPolicy,
    /// Quantum grid points per axis for each `ħ`; empty selects [`auto_grid_points`].
    #[serde(default)]
    pub grid_points: Vec<usize>,
    /// Grid of the kinetic Poisson solve.
    pub kinetic_grid_points: usize,
    pub particles: usize,
    /// Admissibility constant `C`.
    pub bound: f64,
    pub sampling: SamplingScheme,
    pub seed: u64,
    /// Test functions; empty builds the default battery around the kinetic solution.
    #[serde(default)]
    pub battery: Vec<TestFunction>,
    pub tail_radii: Vec<f64>,
}

impl Default for SweepConfig {
    /// The primary experiment: `d = 2`, magnetic trap, four `ħ` levels.
    fn default() -> Self {
        SweepConfig {
            dim: 2,
            length: 4.0,
            hbars: vec![0.5, 0.25, 0.125, 0.0625],
            preset: "magnetic_trap".into(),
            preset_params: PresetParams {
                amplitude: Some(0.3),
                omega: Some(1.0),
                b0: None,
            },
            initial: GaussianPhaseDensity::isotropic(
                2,
                [1.25, 2.0, 0.0],
                0.4,
                [0.4, 0.0, 0.0],
                0.3,
            ),
            spin: Spin::Up,
            t_final: 1.0,
            dt: 0.05,
            dt_policy: DtPolicy::Fixed,
            grid_points: Vec::new(),
            kinetic_grid_points: 64,
            particles: 100_000,
            bound: 1.0,
            sampling: SamplingScheme::Halton,
            seed: 7,
            battery: Vec::new(),
            tail_radii: vec![1.0, 2.0, 4.0, 8.0],
        }
    }
}

/// Smallest multiple of 8 with spacing at most `√ħ/4`.
pub fn auto_grid_points(length: f64, hbar: f64) -> usize {
    let h = 0.25 * hbar.sqrt();
    let n = (length / h - 1e-9).ceil() as usize;
    n.div_ceil(8).max(1) * 8
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| {
            Err(Error::Sweep {
                stage: "config",
                source: Box::new(Error::InvalidState(m)),
            })
        };
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dimension {} outside 1..3", self.dim));
        }
        if !(self.length > 0.0) {
            return bad("box length must be positive".into());
        }
        if self.hbars.is_empty() {
            return bad("empty hbar list".into());
        }
        if self.hbars.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return bad("hbar values must be positive".into());
        }
        if self.hbars.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "hbar list {:?} is not strictly decreasing",
                self.hbars
            ));
        }
        if !self.grid_points.is_empty() && self.grid_points.len() != self.hbars.len() {
            return bad("grid_points needs one entry per hbar".into());
        }
        if self.initial.dim != self.dim {
            return bad("initial density dimension differs from dim".into());
        }
        self.initial.validate()?;
        Preset::from_name(&self.preset, &self.preset_params)?;
        if !(self.t_final >= 0.0 && self.dt > 0.0) {
            return bad("need t_final >= 0 and dt > 0".into());
        }
        if self.particles == 0 {
            return bad("need at least one particle".into());
        }
        if self.bound < 1.0 {
            return bad(format!("admissibility constant {} below 1", self.bound));
        }
        if self.tail_radii.is_empty() || self.tail_radii.iter().any(|r| !(*r > 0.0)) {
            return bad("tail radii must be positive".into());
        }
        for t in &self.battery {
            t.validate()?;
        }
        Ok(())
    }

    /// Quantum grid points per axis at ladder index `i`.
    pub fn points(&self, i: usize) -> usize {
        if self.grid_points.is_empty() {
            auto_grid_points(self.length, self.hbars[i])
        } else {
            self.grid_points[i]
        }
    }

    pub fn quantum_dt(&self, hbar: f64) -> f64 {
        match self.dt_policy {
            DtPolicy::Fixed => self.dt,
            DtPolicy::HbarScaled => self.dt.min(0.25 * hbar * self.dt),
        }
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("serialisable");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_grids_refine() {
        let c = SweepConfig::default();
        c.validate().unwrap();
        let pts: Vec<usize> = (0..4).map(|i| c.points(i)).collect();
        assert_eq!(pts, vec![24, 32, 48, 64]);
        assert_eq!(c.hash(), c.clone().hash());
        let mut d = c.clone();
        d.seed += 1;
        assert_ne!(c.hash(), d.hash());
    }

    #[test]
    fn rejects_bad_ladders() {
        let mut c = SweepConfig {
            hbars: vec![0.25, 0.5],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        c.hbars = vec![];
        assert!(c.validate().is_err());
        c = SweepConfig::default();
        c.preset = "nope".into();
        assert!(c.validate().is_err());
        c = SweepConfig::default();
        c.grid_points = vec![32];
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = SweepConfig::default();
        let s = serde_json::to_string(&c).unwrap();
        let back: SweepConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<SweepConfig>(&s.replace("\"dim\"", "\"dimm\"")).is_err());
    }
}
