//! The ħ ladder: one quantum job per `ħ` against a shared kinetic reference.

use log::info;

use super::config::{Mode, SweepConfig};
use super::measure::{
    default_battery, default_position_tests, pair_field, pair_particle_current,
    pair_position_marginal, weak_error, PositionTest,
};
use super::report::{ConvergenceReport, HbarRow, RunMetadata, StageFailure};
use crate::error::{Error, Result};
use crate::fields::{preset_by_name, FieldSet};
use crate::kinetic::{
    run_pic, sample_ensemble, transport, KineticField, KineticOptions, ParticleEnsemble,
};
use crate::quantum::{
    build_mixed_state, current_parts, density, evolve_pauli_poisson, lp_norm, EnsembleSpec,
    EvolveOptions, MixedState,
};
use crate::spectral::Grid;
use crate::wigner::{
    husimi, oscillatory_tails, wigner_transform, PhaseGrid, TestFunction, WignerFunction,
};

/// Optional measurements on top of the weak errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepPlan {
    /// Rerun each quantum evolution without the Stern–Gerlach term.
    pub sg_ablation: bool,
    /// Pair the quantum and kinetic currents.
    pub current: bool,
}

impl SweepPlan {
    pub fn all() -> Self {
        SweepPlan {
            sg_ablation: true,
            current: true,
        }
    }
}

/// Weak errors across the ladder in the given mode.
pub fn run_hbar_sweep(cfg: &SweepConfig, mode: Mode) -> Result<ConvergenceReport> {
    run_sweep(cfg, mode, SweepPlan::default())
}

/// Weak distances between Stern–Gerlach on and off, in the linear mode.
pub fn sg_ablation(cfg: &SweepConfig) -> Result<ConvergenceReport> {
    run_sweep(
        cfg,
        Mode::Linear,
        SweepPlan {
            sg_ablation: true,
            current: false,
        },
    )
}

/// Paired current errors and the spin-curl magnitudes.
pub fn current_convergence(cfg: &SweepConfig, mode: Mode) -> Result<ConvergenceReport> {
    run_sweep(
        cfg,
        mode,
        SweepPlan {
            sg_ablation: false,
            current: true,
        },
    )
}

/// Runs the ladder.
///
/// An invalid configuration is an error. A failure inside a stage stops the
/// ladder and is recorded in [`ConvergenceReport::failure`] next to the rows
/// finished so far.
pub fn run_sweep(cfg: &SweepConfig, mode: Mode, plan: SweepPlan) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mut report = ConvergenceReport {
        metadata: RunMetadata::new(cfg.hash(), cfg.seed),
        mode,
        config: cfg.clone(),
        battery: cfg.battery.clone(),
        position_tests: Vec::new(),
        kinetic_mass: 0.0,
        l75_bound: 2.0 * initial_l75(cfg),
        rows: Vec::new(),
        order: None,
        sg_order: None,
        current_order: None,
        spin_curl_slope: None,
        failure: None,
    };
    let kin = match kinetic_reference(cfg, mode) {
        Ok(k) => k,
        Err(e) => {
            report.failure = Some(failure(&e, None));
            return Ok(report);
        }
    };
    report.kinetic_mass = kin.mass();
    if report.battery.is_empty() {
        match default_battery(&kin, &cfg.initial.x_mean) {
            Ok(b) => report.battery = b,
            Err(e) => {
                report.failure = Some(failure(&e, None));
                return Ok(report);
            }
        }
    }
    report.position_tests = default_position_tests(&kin, &cfg.initial.x_mean);
    for i in 0..cfg.hbars.len() {
        let hbar = cfg.hbars[i];
        let started = std::time::Instant::now();
        match hbar_job(
            cfg,
            mode,
            plan,
            i,
            &kin,
            &report.battery,
            &report.position_tests,
        ) {
            Ok(row) => {
                info!(
                    "hbar {hbar}: aggregate {:.3e} ({:.1} s)",
                    row.aggregate,
                    started.elapsed().as_secs_f64()
                );
                report.rows.push(row);
            }
            Err(e) => {
                report.failure = Some(failure(&e, Some(hbar)));
                break;
            }
        }
    }
    report.refit();
    Ok(report)
}

fn failure(e: &Error, hbar: Option<f64>) -> StageFailure {
    let stage = match e {
        Error::Sweep { stage, .. } => stage,
        other => other.stage(),
    };
    StageFailure {
        stage: stage.to_string(),
        hbar,
        message: e.to_string(),
    }
}

/// `‖ρ_I‖_{7/5}` of the Gaussian `x`-marginal, ignoring periodic images.
fn initial_l75(cfg: &SweepConfig) -> f64 {
    let p = 1.4f64;
    let log_int: f64 = (0..cfg.dim)
        .map(|a| {
            let s = cfg.initial.x_sigma[a];
            0.5 * (1.0 - p) * (2.0 * std::f64::consts::PI * s * s).ln() - 0.5 * p.ln()
        })
        .sum();
    (log_int / p).exp()
}

fn fields_on(cfg: &SweepConfig, n: usize) -> Result<FieldSet> {
    let grid = Grid::cubic(cfg.dim, n, cfg.length)?;
    preset_by_name(grid, &cfg.preset, &cfg.preset_params)
}

/// The kinetic solution at `T`, shared by every `ħ`.
fn kinetic_reference(cfg: &SweepConfig, mode: Mode) -> Result<ParticleEnsemble> {
    let fs = fields_on(cfg, cfg.kinetic_grid_points)?;
    let grid = *fs.grid();
    let field = KineticField::from_field_set(&fs)?;
    let ens = sample_ensemble(&cfg.initial, grid, cfg.particles, cfg.sampling, cfg.seed)?;
    if cfg.t_final == 0.0 {
        return Ok(ens);
    }
    match mode {
        Mode::Linear => transport(ens, &field, cfg.t_final, cfg.dt),
        Mode::SelfConsistent => {
            let opts = KineticOptions {
                t_final: cfg.t_final,
                dt: cfg.dt,
                particles: cfg.particles,
                scheme: cfg.sampling,
                seed: cfg.seed,
                coupling: 1.0,
                snapshot_every: 0,
            };
            let run = run_pic(ens, &field, &opts)?;
            Ok(run.last().particles.clone())
        }
    }
}

struct Evolved {
    state: MixedState,
    steps: usize,
    l75_max: f64,
    energy_drift: f64,
    charge_drift: f64,
}

fn evolve(
    cfg: &SweepConfig,
    mode: Mode,
    state: &MixedState,
    fields: &FieldSet,
    sg: bool,
) -> Result<Evolved> {
    if cfg.t_final == 0.0 {
        let rho = density(state).real_parts();
        return Ok(Evolved {
            state: state.clone(),
            steps: 0,
            l75_max: lp_norm(state.grid(), &rho, 1.4),
            energy_drift: 0.0,
            charge_drift: 0.0,
        });
    }
    let mut opts = EvolveOptions {
        dt: cfg.quantum_dt(state.hbar()),
        t_final: cfg.t_final,
        coupling: match mode {
            Mode::Linear => 0.0,
            Mode::SelfConsistent => 1.0,
        },
        energy_abort: None,
        ..EvolveOptions::default()
    };
    opts.propagator.stern_gerlach = sg;
    let traj = evolve_pauli_poisson(state, fields, &opts)?;
    Ok(Evolved {
        steps: traj.records.len() - 1,
        l75_max: traj.records.iter().map(|r| r.rho_l75).fold(0.0, f64::max),
        energy_drift: traj.max_energy_drift(),
        charge_drift: traj.max_charge_drift(),
        state: traj.final_state,
    })
}

fn husimi_of(state: &MixedState) -> Result<WignerFunction> {
    let hbar = state.hbar();
    let pg = PhaseGrid::aligned_for_width(*state.grid(), hbar, hbar.sqrt())?;
    let f = wigner_transform(state, &pg)?;
    husimi(&f)
}

fn pair_marginals(f: &WignerFunction, battery: &[TestFunction]) -> Result<Vec<f64>> {
    battery
        .iter()
        .map(|phi| pair_position_marginal(f, phi))
        .collect()
}

fn hbar_job(
    cfg: &SweepConfig,
    mode: Mode,
    plan: SweepPlan,
    i: usize,
    kin: &ParticleEnsemble,
    battery: &[TestFunction],
    tests: &[PositionTest],
) -> Result<HbarRow> {
    let hbar = cfg.hbars[i];
    let fields = fields_on(cfg, cfg.points(i))?;
    let spec = EnsembleSpec {
        density: cfg.initial.clone(),
        scheme: cfg.sampling,
        seed: cfg.seed,
        spin: cfg.spin.vector(),
        width: None,
    };
    let initial = build_mixed_state(fields.grid(), &fields, hbar, cfg.bound, &spec)?;
    let run = evolve(cfg, mode, &initial, &fields, true)?;
    let fh = husimi_of(&run.state)?;
    let errors = weak_error(&fh, kin, battery, Some(&fields))?;
    let aggregate = errors.iter().sum::<f64>() / errors.len() as f64;
    let mass_error = (fh.mass() - kin.mass()).abs();
    let husimi_min = fh.min();
    let xi_points = fh.phase().n_xi(0);
    let on = if plan.sg_ablation {
        Some(pair_marginals(&fh, battery)?)
    } else {
        None
    };
    drop(fh);
    let (tails, grad_energy) = oscillatory_tails(&run.state, &cfg.tail_radii)?;

    let (current_error, spin_curl) = if plan.current {
        let (c, s) = current_errors(&run.state, &fields, kin, tests)?;
        (Some(c), s)
    } else {
        (None, None)
    };

    let sg_distance = match on {
        Some(on) => {
            let off_run = evolve(cfg, mode, &initial, &fields, false)?;
            let off = pair_marginals(&husimi_of(&off_run.state)?, battery)?;
            Some(on.iter().zip(&off).map(|(a, b)| (a - b).abs()).sum::<f64>() / on.len() as f64)
        }
        None => None,
    };

    Ok(HbarRow {
        hbar,
        grid_points: cfg.points(i),
        xi_points,
        members: initial.len(),
        dt: cfg.quantum_dt(hbar),
        steps: run.steps,
        errors,
        aggregate,
        mass_error,
        husimi_min,
        l75_max: run.l75_max,
        energy_drift: run.energy_drift,
        charge_drift: run.charge_drift,
        tails,
        grad_energy,
        sg_distance,
        current_error,
        spin_curl,
    })
}

/// Mean `|⟨J^ħ − J_kin, ψ⟩|` over tests and components, and the mean
/// magnitude of `ħ⟨∇×s, ψ⟩`.
fn current_errors(
    state: &MixedState,
    fields: &FieldSet,
    kin: &ParticleEnsemble,
    tests: &[PositionTest],
) -> Result<(f64, Option<f64>)> {
    let d = state.grid().dim();
    let parts = current_parts(state, fields)?;
    let j = parts.total();
    let mut err = 0.0;
    for psi in tests {
        let q = pair_field(&j, psi);
        let k = pair_particle_current(kin, psi);
        err += (0..d).map(|a| (q[a] - k[a]).abs()).sum::<f64>();
    }
    let err = err / (tests.len() * d) as f64;
    let spin = parts.spin_curl.as_ref().map(|sc| {
        tests
            .iter()
            .map(|psi| {
                let v = pair_field(sc, psi);
                parts.hbar * v.iter().map(|x| x * x).sum::<f64>().sqrt()
            })
            .sum::<f64>()
            / tests.len() as f64
    });
    Ok((err, spin))
}
