//! Experiment drivers: compute, then write artifacts into the output directory.

use std::path::PathBuf;

use pwlab::fields::{preset_by_name, FieldSet};
use pwlab::io::{save_particles, save_real, save_spinor, save_wigner, write_csv, Provenance};
use pwlab::kinetic::{run_pic, sample_ensemble, KineticField, KineticOptions};
use pwlab::limitlab::{
    current_convergence, run_sweep, sg_ablation, ConvergenceReport, Mode, SweepPlan,
};
use pwlab::quantum::{
    build_mixed_state, density, evolve_pauli_poisson, EnsembleSpec, EvolveOptions, MixedState,
};
use pwlab::selftest::{run_selftest, Profile};
use pwlab::spectral::Grid;
use pwlab::wigner::{husimi, moment_density, wigner_transform, PhaseGrid};
use pwlab::{Error, Result};
use serde::Serialize;

use crate::config::{Kind, RunConfig};

pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False when a check (selftest) did not pass.
    pub passed: bool,
}

/// `run.json`: what was run and with which settings.
#[derive(Serialize)]
struct RunRecord<'a> {
    provenance: &'a Provenance,
    seed: u64,
    /// Without the output directory, so reruns elsewhere match byte for byte.
    config: RunConfig,
    files: Vec<String>,
}

struct Writer {
    dir: PathBuf,
    meta: Provenance,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(cfg: &RunConfig) -> Result<Writer> {
        std::fs::create_dir_all(&cfg.out)?;
        Ok(Writer {
            dir: cfg.out.clone(),
            meta: Provenance::new(cfg.hash()),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(p, body)?;
        Ok(())
    }

    fn finish(mut self, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
        let names = self
            .files
            .iter()
            .filter_map(|p| p.file_name())
            .map(|f| f.to_string_lossy().into_owned())
            .collect();
        let rec = RunRecord {
            provenance: &self.meta,
            seed: cfg.seed,
            config: cfg.canonical(),
            files: names,
        };
        let body = serde_json::to_string_pretty(&rec).expect("serialisable");
        self.text("run.json", &body)?;
        Ok(self.files)
    }
}

fn coupling(mode: Mode) -> f64 {
    match mode {
        Mode::Linear => 0.0,
        Mode::SelfConsistent => 1.0,
    }
}

fn config_err(e: crate::config::ConfigError) -> Error {
    match e {
        crate::config::ConfigError::Core(e) => e,
        other => Error::Sweep {
            stage: "config",
            source: Box::new(Error::InvalidState(other.to_string())),
        },
    }
}

fn quantum_setup(cfg: &RunConfig) -> Result<(FieldSet, MixedState)> {
    let grid = Grid::cubic(cfg.grid.dim, cfg.grid.points, cfg.grid.length)?;
    let fields = preset_by_name(grid, &cfg.fields.preset, &cfg.preset_params())?;
    let spec = EnsembleSpec {
        density: cfg.initial_density().map_err(config_err)?,
        scheme: cfg.kinetic.sampling,
        seed: cfg.seed,
        spin: cfg.initial.spin.vector(),
        width: None,
    };
    let state = build_mixed_state(&grid, &fields, cfg.quantum.hbar, cfg.quantum.bound, &spec)?;
    Ok((fields, state))
}

pub fn experiment(cfg: &RunConfig) -> Result<Outcome> {
    let files = match cfg.kind {
        Kind::Evolve => evolve(cfg)?,
        Kind::Wigner => wigner(cfg)?,
        Kind::Vlasov => vlasov(cfg)?,
        Kind::Sweep => ladder(
            cfg,
            "sweep",
            run_sweep(&sweep_cfg(cfg)?, cfg.mode, SweepPlan::default())?,
        )?,
        Kind::Ablation => ladder(cfg, "ablation", sg_ablation(&sweep_cfg(cfg)?)?)?,
        Kind::Current => ladder(
            cfg,
            "current",
            current_convergence(&sweep_cfg(cfg)?, cfg.mode)?,
        )?,
    };
    Ok(Outcome {
        files,
        passed: true,
    })
}

fn sweep_cfg(cfg: &RunConfig) -> Result<pwlab::limitlab::SweepConfig> {
    cfg.sweep_config().map_err(config_err)
}

fn evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (fields, state) = quantum_setup(cfg)?;
    let opts = EvolveOptions {
        dt: cfg.time.dt,
        t_final: cfg.time.t_final,
        coupling: coupling(cfg.mode),
        ..EvolveOptions::default()
    };
    let traj = evolve_pauli_poisson(&state, &fields, &opts)?;
    let mut w = Writer::new(cfg)?;
    let rows: Vec<Vec<f64>> = traj
        .records
        .iter()
        .map(|r| {
            vec![
                r.step as f64,
                r.t,
                r.charge,
                r.e_kin,
                r.e_pot,
                r.e_total,
                r.rho_l75,
            ]
        })
        .collect();
    let p = w.path("evolve.csv");
    write_csv(
        &p,
        &w.meta,
        &[
            "step", "t", "charge", "e_kin", "e_pot", "e_total", "rho_l75",
        ],
        &rows,
    )?;
    let grid = *state.grid();
    let rho = density(&traj.final_state).real_parts();
    let p = w.path("density.pwps");
    save_real(&p, &grid, &[&rho], &w.meta)?;
    let p = w.path("potential.pwps");
    save_real(&p, &grid, &[&traj.final_potential], &w.meta)?;
    for (j, u) in traj.final_state.members().iter().enumerate() {
        let p = w.path(&format!("member_{j:04}.pwps"));
        save_spinor(&p, u, &w.meta)?;
    }
    w.finish(cfg)
}

#[derive(Serialize)]
struct WignerSummary {
    hbar: f64,
    xi_points: usize,
    mass: f64,
    trace: f64,
    wigner_min: f64,
    husimi_min: f64,
    husimi_mass: f64,
    /// `‖∫f dξ − ρ‖_∞`.
    marginal_error: f64,
}

fn wigner(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (_, state) = quantum_setup(cfg)?;
    let hbar = cfg.quantum.hbar;
    let pg = PhaseGrid::aligned_for_width(*state.grid(), hbar, hbar.sqrt())?;
    let f = wigner_transform(&state, &pg)?;
    let fh = husimi(&f)?;
    let rho = density(&state).real_parts();
    let marg = moment_density(&f).real_parts();
    let summary = WignerSummary {
        hbar,
        xi_points: pg.n_xi(0),
        mass: f.mass(),
        trace: state
            .weights()
            .iter()
            .zip(state.members())
            .map(|(l, u)| l * u.norm_sqr())
            .sum(),
        wigner_min: f.min(),
        husimi_min: fh.min(),
        husimi_mass: fh.mass(),
        marginal_error: rho
            .iter()
            .zip(&marg)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    };
    let mut w = Writer::new(cfg)?;
    let p = w.path("wigner.pwps");
    save_wigner(&p, &f, &w.meta)?;
    let p = w.path("husimi.pwps");
    save_wigner(&p, &fh, &w.meta)?;
    w.text(
        "wigner.json",
        &serde_json::to_string_pretty(&summary).expect("serialisable"),
    )?;
    w.finish(cfg)
}

fn vlasov(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let grid = Grid::cubic(cfg.grid.dim, cfg.kinetic.grid_points, cfg.grid.length)?;
    let fields = preset_by_name(grid, &cfg.fields.preset, &cfg.preset_params())?;
    let field = KineticField::from_field_set(&fields)?;
    let f = cfg.initial_density().map_err(config_err)?;
    let opts = KineticOptions {
        t_final: cfg.time.t_final,
        dt: cfg.time.dt,
        particles: cfg.kinetic.particles,
        scheme: cfg.kinetic.sampling,
        seed: cfg.seed,
        coupling: coupling(cfg.mode),
        snapshot_every: 0,
    };
    let ens = sample_ensemble(&f, grid, opts.particles, opts.scheme, opts.seed)?;
    let run = run_pic(ens, &field, &opts)?;
    let mut w = Writer::new(cfg)?;
    let rows: Vec<Vec<f64>> = run
        .records
        .iter()
        .map(|r| {
            vec![
                r.step as f64,
                r.t,
                r.kinetic,
                r.field,
                r.external,
                r.total,
                r.momentum[0],
                r.momentum[1],
                r.momentum[2],
            ]
        })
        .collect();
    let p = w.path("vlasov.csv");
    write_csv(
        &p,
        &w.meta,
        &[
            "step", "t", "kinetic", "field", "external", "total", "px", "py", "pz",
        ],
        &rows,
    )?;
    let last = run.last();
    let p = w.path("particles.pwps");
    save_particles(&p, &last.particles, &w.meta)?;
    let p = w.path("density.pwps");
    save_real(&p, &grid, &[&last.moments.rho_values()], &w.meta)?;
    w.finish(cfg)
}

/// Writes a ladder report, then turns a recorded stage failure into an error.
fn ladder(cfg: &RunConfig, stem: &str, mut report: ConvergenceReport) -> Result<Vec<PathBuf>> {
    report.metadata.config_hash = cfg.hash();
    let mut w = Writer::new(cfg)?;
    w.text(&format!("{stem}.json"), &report.to_json())?;
    w.text(&format!("{stem}.csv"), &report.to_csv())?;
    let files = w.finish(cfg)?;
    report.check()?;
    Ok(files)
}

pub fn selftest(cfg: &RunConfig, profile: Profile) -> Result<Outcome> {
    let report = run_selftest(profile, cfg.seed);
    for l in report.lines() {
        println!("{l}");
    }
    let mut w = Writer::new(cfg)?;
    w.text("selftest.json", &report.to_json())?;
    Ok(Outcome {
        files: w.finish(cfg)?,
        passed: report.passed(),
    })
}
