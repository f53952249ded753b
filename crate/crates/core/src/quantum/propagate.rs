//! Time stepping: linear propagators and the self-consistent Pauli–Poisson loop.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{self, FieldSet};
use crate::par;
use crate::spectral::{fft, Grid, SpinorField};

use super::hamiltonian::{flatten, unflatten, Hamiltonian};
use super::krylov::{expm_apply, KrylovOptions};
use super::observables::{charge_energy, current_parts, density_values, lp_norm, Observables};
use super::state::MixedState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    #[default]
    Krylov,
    /// Strang splitting, only valid for `A ≡ 0`.
    Strang,
}

/// Propagation settings shared by the linear and self-consistent drivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorOptions {
    pub stepper: Stepper,
    pub krylov: KrylovOptions,
    /// Keep the Stern–Gerlach coupling (switched off only in ablation runs).
    pub stern_gerlach: bool,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            stepper: Stepper::Krylov,
            krylov: KrylovOptions::default(),
            stern_gerlach: true,
        }
    }
}

/// Advances one spinor by `exp(−i dt H/ħ)`.
pub fn propagate_member(
    h: &Hamiltonian,
    u: &SpinorField,
    dt: f64,
    opts: &PropagatorOptions,
) -> Result<SpinorField> {
    match opts.stepper {
        Stepper::Krylov => {
            let inv = 1.0 / h.hbar();
            let apply = |x: &[Complex64], o: &mut [Complex64]| {
                h.apply_flat(x, o);
                for v in o.iter_mut() {
                    *v *= inv;
                }
            };
            let (out, _) = expm_apply(apply, &flatten(u), dt, &opts.krylov)?;
            Ok(unflatten(h.grid(), out))
        }
        Stepper::Strang => strang_member(h, u, dt),
    }
}

/// Half potential (with the pointwise spin rotation), full kinetic, half potential.
fn strang_member(h: &Hamiltonian, u: &SpinorField, dt: f64) -> Result<SpinorField> {
    if h.has_vector_potential() {
        return Err(Error::InvalidState(
            "Strang splitting requires A = 0".into(),
        ));
    }
    let grid = *h.grid();
    let hbar = h.hbar();
    let n = grid.size();
    let [mut a, mut b] = u.clone().into_comps();
    let half = |a: &mut [Complex64], b: &mut [Complex64]| {
        let tau = 0.5 * dt / hbar;
        for i in 0..n {
            let phase = Complex64::from_polar(1.0, -tau * h.diag()[i]);
            let (x, y) = (a[i], b[i]);
            let (nx, ny) = match h.stern_gerlach_blocks() {
                Some(sg) => {
                    // exp(−iτ M) for M = [[m, c], [c̄, −m]] = r (n̂·σ)
                    let (m, c) = sg[i];
                    let r = (m * m + c.norm_sqr()).sqrt();
                    if r == 0.0 {
                        (x, y)
                    } else {
                        let (cs, sn) = ((tau * r).cos(), (tau * r).sin());
                        let f = Complex64::new(0.0, -sn / r);
                        (
                            cs * x + f * (m * x + c * y),
                            cs * y + f * (c.conj() * x - m * y),
                        )
                    }
                }
                None => (x, y),
            };
            a[i] = phase * nx;
            b[i] = phase * ny;
        }
    };
    half(&mut a, &mut b);
    let k2 = h.spectral().k_squared();
    for c in [&mut a, &mut b] {
        fft::forward(c, grid.shape());
        for (v, &kk) in c.iter_mut().zip(k2) {
            *v *= Complex64::from_polar(1.0, -0.5 * hbar * kk * dt);
        }
        fft::inverse(c, grid.shape());
    }
    half(&mut a, &mut b);
    SpinorField::new(grid, a, b)
}

/// Advances every member with the frozen potential `v`.
pub fn propagate_step(
    state: &MixedState,
    fields: &FieldSet,
    v: &[f64],
    dt: f64,
    opts: &PropagatorOptions,
) -> Result<MixedState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::TimeStep(format!("dt = {dt}")));
    }
    let h = Hamiltonian::new(fields, v, state.hbar(), opts.stern_gerlach)?;
    advance(state, &h, dt, opts)
}

fn advance(
    state: &MixedState,
    h: &Hamiltonian,
    dt: f64,
    opts: &PropagatorOptions,
) -> Result<MixedState> {
    let members = par::map(state.members(), |u| propagate_member(h, u, dt, opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(state.with_members(members))
}

/// Settings of a Pauli–Poisson run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    pub propagator: PropagatorOptions,
    /// Multiplier of the density in the Poisson source (0 gives linear evolution).
    pub coupling: f64,
    /// Relative energy drift that aborts the run; `None` disables the check.
    pub energy_abort: Option<f64>,
    /// Store a full state every this many steps (0 keeps only the endpoints).
    pub snapshot_every: usize,
    /// Record `ρ` and `∇·J` every step for the continuity residual.
    pub track_continuity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt: 0.01,
            t_final: 1.0,
            propagator: PropagatorOptions::default(),
            coupling: 1.0,
            energy_abort: Some(1e-3),
            snapshot_every: 0,
            track_continuity: false,
        }
    }
}

/// Per-step diagnostics row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub charge: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub e_total: f64,
    /// `‖ρ‖_{7/5}`.
    pub rho_l75: f64,
}

/// Output of [`evolve_pauli_poisson`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub records: Vec<StepRecord>,
    /// `(step, state, self-consistent potential)` at snapshot steps.
    pub snapshots: Vec<(usize, MixedState, Vec<f64>)>,
    pub final_state: MixedState,
    /// Self-consistent potential at the final time.
    pub final_potential: Vec<f64>,
    /// Per-step densities (only with `track_continuity`).
    pub densities: Vec<Vec<f64>>,
    /// Per-step `∇·J` (only with `track_continuity`).
    pub current_divergence: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Largest `|E(t) − E(0)| / |E(0)|` over the run.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.records[0].e_total;
        self.records
            .iter()
            .map(|r| (r.e_total - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|Q(t) − Q(0)| / Q(0)`.
    pub fn max_charge_drift(&self) -> f64 {
        let q0 = self.records[0].charge;
        self.records
            .iter()
            .map(|r| (r.charge - q0).abs() / q0)
            .fold(0.0, f64::max)
    }

    /// Continuity residual series from the recorded densities and divergences.
    pub fn continuity_residual(&self, grid: &Grid) -> Result<Vec<f64>> {
        continuity_residual(grid, &self.densities, &self.current_divergence, self.dt)
    }
}

fn self_potential(grid: &Grid, rho: &[f64], coupling: f64) -> Result<Vec<f64>> {
    if coupling == 0.0 {
        return Ok(vec![0.0; grid.size()]);
    }
    let src: Vec<f64> = rho.iter().map(|r| coupling * r).collect();
    fields::solve_poisson_real(grid, &src)
}

fn total_potential(v_self: &[f64], fields: &FieldSet) -> Vec<f64> {
    match fields.v_ext() {
        Some(ext) => v_self.iter().zip(ext).map(|(a, b)| a + b).collect(),
        None => v_self.to_vec(),
    }
}

fn divergence_of_current(state: &MixedState, fields: &FieldSet) -> Result<Vec<f64>> {
    let j = current_parts(state, fields)?.convective;
    let sp = state.grid().spectral();
    let comps: Vec<Vec<Complex64>> = j
        .comps()
        .iter()
        .map(|c| c.iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    Ok(sp.divergence(&comps).iter().map(|z| z.re).collect())
}

fn record(
    step: usize,
    t: f64,
    state: &MixedState,
    fields: &FieldSet,
    v_self: &[f64],
    coupling: f64,
) -> Result<StepRecord> {
    let mut obs: Observables = charge_energy(state, fields, v_self)?;
    if coupling != 0.0 && coupling != 1.0 {
        // the field energy of the coupled system is ½∫|∇V|² / coupling
        let field_part = obs.e_pot - external_energy(fields, &obs.rho_diag, state.grid());
        obs.e_pot = field_part / coupling + external_energy(fields, &obs.rho_diag, state.grid());
        obs.e_total = obs.e_kin + obs.e_pot;
    }
    Ok(StepRecord {
        step,
        t,
        charge: obs.charge,
        e_kin: obs.e_kin,
        e_pot: obs.e_pot,
        e_total: obs.e_total,
        rho_l75: lp_norm(state.grid(), &obs.rho_diag, 1.4),
    })
}

fn external_energy(fields: &FieldSet, rho: &[f64], grid: &Grid) -> f64 {
    match fields.v_ext() {
        Some(v) => v.iter().zip(rho).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume(),
        None => 0.0,
    }
}

/// Self-consistent evolution with a midpoint predictor–corrector for `V`.
///
/// Step `n`: `V_n` from `ρ_n`; a half step with `V_n` predicts `ρ_{n+1/2}` and
/// `V_{n+1/2}`; the full step is then taken from `u_n` with `V_{n+1/2}`.
pub fn evolve_pauli_poisson(
    state: &MixedState,
    fields: &FieldSet,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let dt = opts.dt;
    if !(dt > 0.0 && dt.is_finite()) || !(opts.t_final > 0.0) {
        return Err(Error::TimeStep(format!("dt = {dt}, T = {}", opts.t_final)));
    }
    state.check_admissible()?;
    let grid = *state.grid();
    if fields.grid() != &grid {
        return Err(Error::ShapeMismatch(
            "field grid differs from state grid".into(),
        ));
    }
    let steps = (opts.t_final / dt).round().max(1.0) as usize;
    let hbar = state.hbar();
    let prop = &opts.propagator;

    let mut cur = state.clone();
    let mut rho = density_values(&cur);
    let mut v_self = self_potential(&grid, &rho, opts.coupling)?;
    let mut records = vec![record(0, 0.0, &cur, fields, &v_self, opts.coupling)?];
    let e0 = records[0].e_total;
    let mut snapshots = vec![(0, cur.clone(), v_self.clone())];
    let mut densities = Vec::new();
    let mut divs = Vec::new();
    if opts.track_continuity {
        densities.push(rho.clone());
        divs.push(divergence_of_current(&cur, fields)?);
    }

    for step in 1..=steps {
        let v_mid = if opts.coupling == 0.0 {
            v_self.clone()
        } else {
            let h_pred = Hamiltonian::new(
                fields,
                &total_potential(&v_self, fields),
                hbar,
                prop.stern_gerlach,
            )?;
            let pred = advance(&cur, &h_pred, 0.5 * dt, prop)?;
            self_potential(&grid, &density_values(&pred), opts.coupling)?
        };
        let h = Hamiltonian::new(
            fields,
            &total_potential(&v_mid, fields),
            hbar,
            prop.stern_gerlach,
        )?;
        cur = advance(&cur, &h, dt, prop)?;
        rho = density_values(&cur);
        v_self = self_potential(&grid, &rho, opts.coupling)?;
        let t = step as f64 * dt;
        let rec = record(step, t, &cur, fields, &v_self, opts.coupling)?;
        if let Some(threshold) = opts.energy_abort {
            let drift = (rec.e_total - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
            if drift > threshold {
                return Err(Error::EnergyDrift {
                    drift,
                    threshold,
                    time: t,
                });
            }
        }
        records.push(rec);
        if opts.track_continuity {
            densities.push(rho.clone());
            divs.push(divergence_of_current(&cur, fields)?);
        }
        if step == steps || (opts.snapshot_every > 0 && step % opts.snapshot_every == 0) {
            snapshots.push((step, cur.clone(), v_self.clone()));
        }
    }
    log::debug!("evolved {} members over {steps} steps", cur.len());
    Ok(Trajectory {
        dt,
        records,
        snapshots,
        final_state: cur,
        final_potential: v_self,
        densities,
        current_divergence: divs,
    })
}

/// `r_n = ‖(ρ_{n+1} − ρ_{n−1})/(2dt) + ∇·J_n‖₂ / ‖∇·J_n‖₂` for interior steps.
///
/// When `‖∇·J_n‖₂` is negligible the absolute residual is reported instead.
pub fn continuity_residual(
    grid: &Grid,
    rho: &[Vec<f64>],
    div_j: &[Vec<f64>],
    dt: f64,
) -> Result<Vec<f64>> {
    if rho.len() < 3 || div_j.len() != rho.len() {
        return Err(Error::InvalidState(format!(
            "continuity residual needs >= 3 snapshots with currents, got {}",
            rho.len()
        )));
    }
    let cell = grid.cell_volume();
    Ok((1..rho.len() - 1)
        .map(|n| {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..grid.size() {
                let r = (rho[n + 1][i] - rho[n - 1][i]) / (2.0 * dt) + div_j[n][i];
                num += r * r;
                den += div_j[n][i] * div_j[n][i];
            }
            let (num, den) = ((num * cell).sqrt(), (den * cell).sqrt());
            if den > 1e-10 {
                num / den
            } else {
                num
            }
        })
        .collect())
}
