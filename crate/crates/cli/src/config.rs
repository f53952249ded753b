//! Run configuration files.
//!
//! A config is TOML: a few top-level keys followed by optional sections.
//! Every key has a default, so an empty file is valid; unknown keys are
//! rejected. See `docs/config.md` for the grammar.

use std::path::{Path, PathBuf};

use pwlab::fields::{Preset, PresetParams};
use pwlab::kinetic::{GaussianPhaseDensity, SamplingScheme};
use pwlab::limitlab::{DtPolicy, Mode, Spin, SweepConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] pwlab::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Evolve,
    Wigner,
    Vlasov,
    Sweep,
    Ablation,
    Current,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kind: Kind,
    pub mode: Mode,
    pub seed: u64,
    pub out: PathBuf,
    pub grid: GridSection,
    pub fields: FieldsSection,
    pub initial: InitialSection,
    pub time: TimeSection,
    pub quantum: QuantumSection,
    pub kinetic: KineticSection,
    pub sweep: SweepSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub dim: usize,
    /// Box length on every axis.
    pub length: f64,
    /// Points per axis for single-ħ runs.
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsSection {
    pub preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    /// Centre of the initial density; missing axes are zero.
    pub x_mean: Vec<f64>,
    pub x_sigma: f64,
    pub p_mean: Vec<f64>,
    pub p_sigma: f64,
    pub spin: Spin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_final: f64,
    pub dt: f64,
    pub dt_policy: DtPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumSection {
    /// ħ of single-ħ runs.
    pub hbar: f64,
    /// Ladder of sweep runs, strictly decreasing.
    pub hbars: Vec<f64>,
    /// Admissibility constant `C`.
    pub bound: f64,
    /// Per-ħ grid points of sweeps; empty picks them automatically.
    pub grid_points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KineticSection {
    pub particles: usize,
    pub grid_points: usize,
    pub sampling: SamplingScheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub tail_radii: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: Kind::Sweep,
            mode: Mode::Linear,
            seed: 7,
            out: PathBuf::from("out"),
            grid: GridSection::default(),
            fields: FieldsSection::default(),
            initial: InitialSection::default(),
            time: TimeSection::default(),
            quantum: QuantumSection::default(),
            kinetic: KineticSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            dim: 2,
            length: 4.0,
            points: 32,
        }
    }
}

impl Default for FieldsSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        FieldsSection {
            preset: s.preset,
            amplitude: s.preset_params.amplitude,
            omega: s.preset_params.omega,
            b0: s.preset_params.b0,
        }
    }
}

impl Default for InitialSection {
    fn default() -> Self {
        let f = SweepConfig::default().initial;
        InitialSection {
            x_mean: f.x_mean[..f.dim].to_vec(),
            x_sigma: f.x_sigma[0],
            p_mean: f.p_mean[..f.dim].to_vec(),
            p_sigma: f.p_sigma[0],
            spin: Spin::Up,
        }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        TimeSection {
            t_final: s.t_final,
            dt: s.dt,
            dt_policy: s.dt_policy,
        }
    }
}

impl Default for QuantumSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        QuantumSection {
            hbar: 0.25,
            hbars: s.hbars,
            bound: s.bound,
            grid_points: Vec::new(),
        }
    }
}

impl Default for KineticSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        KineticSection {
            particles: s.particles,
            grid_points: s.kinetic_grid_points,
            sampling: s.sampling,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            tail_radii: SweepConfig::default().tail_radii,
        }
    }
}

fn vec3(v: &[f64], what: &str, dim: usize) -> Result<[f64; 3], ConfigError> {
    if v.len() > dim {
        return Err(ConfigError::Invalid(format!(
            "initial.{what} has {} entries for dim = {dim}",
            v.len()
        )));
    }
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    Ok(out)
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serialisable")
    }

    pub fn preset_params(&self) -> PresetParams {
        PresetParams {
            amplitude: self.fields.amplitude,
            omega: self.fields.omega,
            b0: self.fields.b0,
        }
    }

    pub fn initial_density(&self) -> Result<GaussianPhaseDensity, ConfigError> {
        let d = self.grid.dim;
        Ok(GaussianPhaseDensity::isotropic(
            d,
            vec3(&self.initial.x_mean, "x_mean", d)?,
            self.initial.x_sigma,
            vec3(&self.initial.p_mean, "p_mean", d)?,
            self.initial.p_sigma,
        ))
    }

    /// Ladder settings of the sweep-type experiments.
    pub fn sweep_config(&self) -> Result<SweepConfig, ConfigError> {
        Ok(SweepConfig {
            dim: self.grid.dim,
            length: self.grid.length,
            hbars: self.quantum.hbars.clone(),
            preset: self.fields.preset.clone(),
            preset_params: self.preset_params(),
            initial: self.initial_density()?,
            spin: self.initial.spin,
            t_final: self.time.t_final,
            dt: self.time.dt,
            dt_policy: self.time.dt_policy,
            grid_points: self.quantum.grid_points.clone(),
            kinetic_grid_points: self.kinetic.grid_points,
            particles: self.kinetic.particles,
            bound: self.quantum.bound,
            sampling: self.kinetic.sampling,
            seed: self.seed,
            battery: Vec::new(),
            tail_radii: self.sweep.tail_radii.clone(),
        })
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=3).contains(&self.grid.dim) {
            return bad(format!("grid.dim = {} outside 1..3", self.grid.dim));
        }
        if self.quantum.hbars.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "quantum.hbars {:?} is not strictly decreasing",
                self.quantum.hbars
            ));
        }
        if self.quantum.hbar.is_nan() || self.quantum.hbar <= 0.0 {
            return bad("quantum.hbar must be positive".into());
        }
        if self.grid.points < 8 {
            return bad(format!("grid.points = {} below 8", self.grid.points));
        }
        Preset::from_name(&self.fields.preset, &self.preset_params())?;
        self.initial_density()?.validate()?;
        if matches!(self.kind, Kind::Sweep | Kind::Ablation | Kind::Current) {
            self.sweep_config()?.validate()?;
        }
        Ok(())
    }

    /// The settings that determine results: everything but the output directory.
    pub fn canonical(&self) -> RunConfig {
        RunConfig {
            out: PathBuf::new(),
            ..self.clone()
        }
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_toml(s, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.quantum.hbars, vec![0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn misspelt_key_is_named() {
        let e = parse("[quantum]\nhbarr = 0.5\n").unwrap_err().to_string();
        assert!(e.contains("hbarr"), "{e}");
        let e = parse("seeed = 3\n").unwrap_err().to_string();
        assert!(e.contains("seeed"), "{e}");
    }

    #[test]
    fn increasing_ladder_is_rejected() {
        let e = parse("[quantum]\nhbars = [0.25, 0.5]\n").unwrap_err();
        assert!(e.to_string().contains("decreasing"));
    }

    #[test]
    fn round_trip() {
        let c = parse("kind = \"evolve\"\nmode = \"self_consistent\"\n[fields]\npreset = \"harmonic_V\"\nomega = 2.0\n").unwrap();
        let again = parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        let moved = RunConfig {
            out: PathBuf::from("elsewhere"),
            ..c.clone()
        };
        assert_eq!(moved.hash(), c.hash());
    }

    #[test]
    fn unknown_preset_is_a_fields_error() {
        match parse("[fields]\npreset = \"nope\"\n") {
            Err(ConfigError::Core(e)) => assert_eq!(e.stage(), "fields"),
            other => panic!("{other:?}"),
        }
    }
}
