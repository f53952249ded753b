//! Particle solvers for the Vlasov equation with Lorentz force: pure transport
//! in external fields, and particle-in-cell with a self-consistent Poisson field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::solve_poisson_real;
use crate::spectral::{Grid, Spectral};

use super::deposit::{deposit, deposit_density, interpolate_vec, KineticMoments};
use super::field::KineticField;
use super::particles::ParticleEnsemble;
use super::push::{advance, check_dim, for_each_particle, kick, rotate_drift, step_count};
use super::sampling::{sample_phase_points, GaussianPhaseDensity, SamplingScheme};

/// Time horizon and sampling of a particle run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticOptions {
    pub t_final: f64,
    pub dt: f64,
    pub particles: usize,
    pub scheme: SamplingScheme,
    pub seed: u64,
    /// Multiplies the Poisson source; `0` decouples the self-field.
    pub coupling: f64,
    /// Keep a snapshot every this many steps (`0`: initial and final only).
    pub snapshot_every: usize,
}

impl Default for KineticOptions {
    fn default() -> Self {
        KineticOptions {
            t_final: 1.0,
            dt: 0.05,
            particles: 100_000,
            scheme: SamplingScheme::Halton,
            seed: 0,
            coupling: 1.0,
            snapshot_every: 0,
        }
    }
}

/// Samples `n` equal-weight particles of unit total mass from `f_I`.
pub fn sample_ensemble(
    f: &GaussianPhaseDensity,
    grid: Grid,
    n: usize,
    scheme: SamplingScheme,
    seed: u64,
) -> Result<ParticleEnsemble> {
    if f.dim != grid.dim() {
        return Err(Error::Kinetic(format!(
            "f_I is {}-dimensional, grid is {}-dimensional",
            f.dim,
            grid.dim()
        )));
    }
    if n == 0 {
        return Err(Error::Kinetic("need at least one particle".into()));
    }
    let pts = sample_phase_points(f, n, scheme, seed)?;
    ParticleEnsemble::from_points(grid, &pts, 1.0)
}

/// Samples `f_I` and transports every particle to `t_final` in the external field.
pub fn solve_linear_vlasov(
    f: &GaussianPhaseDensity,
    field: &KineticField,
    grid: Grid,
    opts: &KineticOptions,
) -> Result<ParticleEnsemble> {
    let ens = sample_ensemble(f, grid, opts.particles, opts.scheme, opts.seed)?;
    transport(ens, field, opts.t_final, opts.dt)
}

/// Transports a given ensemble to time `t`.
pub fn transport(
    mut ens: ParticleEnsemble,
    field: &KineticField,
    t: f64,
    dt: f64,
) -> Result<ParticleEnsemble> {
    check_dim(&ens, field)?;
    let (n, h) = step_count(t, dt)?;
    if n > 0 {
        field.check_step(h)?;
        advance(&mut ens, field, h, n);
    }
    Ok(ens)
}

/// Energies and momentum after a particle-in-cell step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicRecord {
    pub step: usize,
    pub t: f64,
    pub kinetic: f64,
    /// `½∫|∇V|²` of the self-consistent field.
    pub field: f64,
    /// `Σ w_i V_ext(x_i)`.
    pub external: f64,
    pub total: f64,
    pub momentum: [f64; 3],
}

/// Particles, moments and self-consistent potential at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct PicSnapshot {
    pub t: f64,
    pub particles: ParticleEnsemble,
    pub moments: KineticMoments,
    pub potential: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicRun {
    pub records: Vec<PicRecord>,
    pub snapshots: Vec<PicSnapshot>,
    /// Steps on which `max|p|·dt` exceeded the grid spacing.
    pub cfl_warnings: usize,
}

impl PicRun {
    pub fn last(&self) -> &PicSnapshot {
        self.snapshots.last().expect("initial snapshot")
    }

    /// `max_t |E(t) − E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.records[0].total;
        let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
        self.records
            .iter()
            .fold(0.0f64, |m, r| m.max((r.total - e0).abs()))
            / scale
    }

    /// `max_t |P(t) − P(0)|`.
    pub fn momentum_drift(&self) -> f64 {
        let p0 = self.records[0].momentum;
        self.records.iter().fold(0.0, |m, r| {
            m.max(
                (0..3)
                    .map(|a| (r.momentum[a] - p0[a]).abs())
                    .fold(0.0, f64::max),
            )
        })
    }
}

/// Self-consistent potential and field on the grid.
struct SelfField {
    v: Vec<f64>,
    e: Vec<Vec<f64>>,
    energy: f64,
}

fn self_field(
    ens: &ParticleEnsemble,
    grid: &Grid,
    sp: &Spectral,
    coupling: f64,
) -> Result<SelfField> {
    let d = grid.dim();
    if coupling == 0.0 {
        return Ok(SelfField {
            v: vec![0.0; grid.size()],
            e: vec![vec![0.0; grid.size()]; d],
            energy: 0.0,
        });
    }
    let rho = deposit_density(ens, grid);
    let src: Vec<f64> = rho.iter().map(|r| coupling * r).collect();
    let v = solve_poisson_real(grid, &src)?;
    let cv: Vec<num_complex::Complex64> = v
        .iter()
        .map(|&x| num_complex::Complex64::new(x, 0.0))
        .collect();
    let e = sp
        .gradient(&cv)
        .into_iter()
        .map(|g| g.into_iter().map(|z| -z.re).collect())
        .collect();
    // ½∫|∇V|²/c = ½∫Vρ
    let energy = 0.5 * v.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume();
    Ok(SelfField { v, e, energy })
}

fn record(
    step: usize,
    t: f64,
    ens: &ParticleEnsemble,
    sf: &SelfField,
    external: &KineticField,
) -> PicRecord {
    let kinetic = ens.kinetic_energy();
    let ext = ens.pair(|x, _| external.potential(x));
    PicRecord {
        step,
        t,
        kinetic,
        field: sf.energy,
        external: ext,
        total: kinetic + sf.energy + ext,
        momentum: ens.momentum(),
    }
}

fn snapshot(t: f64, ens: &ParticleEnsemble, grid: &Grid, sf: &SelfField) -> PicSnapshot {
    PicSnapshot {
        t,
        particles: ens.clone(),
        moments: deposit(ens, grid),
        potential: sf.v.clone(),
    }
}

/// Samples `f_I` and runs the particle-in-cell loop.
pub fn solve_vlasov_poisson(
    f: &GaussianPhaseDensity,
    external: &KineticField,
    grid: Grid,
    opts: &KineticOptions,
) -> Result<PicRun> {
    let ens = sample_ensemble(f, grid, opts.particles, opts.scheme, opts.seed)?;
    run_pic(ens, external, opts)
}

/// Particle-in-cell loop from a given ensemble on its own grid.
///
/// Each step: half kick with `E_ext + E_self`, magnetic gyration with drift,
/// deposit and Poisson solve, half kick with the new field. Deposition and
/// field interpolation share the multilinear stencil and the gradient is an
/// antisymmetric spectral operator, so self-forces cancel in the total momentum.
pub fn run_pic(
    mut ens: ParticleEnsemble,
    external: &KineticField,
    opts: &KineticOptions,
) -> Result<PicRun> {
    check_dim(&ens, external)?;
    let grid = *ens.grid();
    let (n, dt) = step_count(opts.t_final, opts.dt)?;
    external.check_step(dt)?;
    if !(opts.coupling >= 0.0 && opts.coupling.is_finite()) {
        return Err(Error::Kinetic(format!(
            "coupling {} must be non-negative",
            opts.coupling
        )));
    }
    let sp = grid.spectral();
    let hmin = (0..grid.dim())
        .map(|a| grid.spacing(a))
        .fold(f64::INFINITY, f64::min);
    let mut sf = self_field(&ens, &grid, &sp, opts.coupling)?;
    let mut run = PicRun {
        records: vec![record(0, 0.0, &ens, &sf, external)],
        snapshots: vec![snapshot(0.0, &ens, &grid, &sf)],
        cfl_warnings: 0,
    };
    for step in 1..=n {
        let vmax = ens
            .momenta()
            .iter()
            .map(super::field::norm)
            .fold(0.0, f64::max);
        if vmax * dt > hmin {
            if run.cfl_warnings == 0 {
                log::warn!("max|p|·dt = {} exceeds the grid spacing {hmin}", vmax * dt);
            }
            run.cfl_warnings += 1;
        }
        let e_self = &sf.e;
        for_each_particle(&mut ens, |_, x, p| {
            let mut e = external.e(x);
            let es = interpolate_vec(&grid, e_self, x);
            for a in 0..3 {
                e[a] += es[a];
            }
            kick(p, &e, 0.5 * dt);
            rotate_drift(x, p, external, dt);
        });
        sf = self_field(&ens, &grid, &sp, opts.coupling)?;
        let e_self = &sf.e;
        for_each_particle(&mut ens, |_, x, p| {
            let mut e = external.e(x);
            let es = interpolate_vec(&grid, e_self, x);
            for a in 0..3 {
                e[a] += es[a];
            }
            kick(p, &e, 0.5 * dt);
        });
        let t = step as f64 * dt;
        run.records.push(record(step, t, &ens, &sf, external));
        let keep = (opts.snapshot_every > 0 && step % opts.snapshot_every == 0) || step == n;
        if keep {
            run.snapshots.push(snapshot(t, &ens, &grid, &sf));
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Preset, PresetParams};

    fn opts(t: f64, dt: f64, n: usize) -> KineticOptions {
        KineticOptions {
            t_final: t,
            dt,
            particles: n,
            ..Default::default()
        }
    }

    #[test]
    fn initial_marginal_and_free_streaming_variance() {
        let g = Grid::cubic(1, 64, 40.0).unwrap();
        let f = GaussianPhaseDensity::isotropic(1, [20.0, 0.0, 0.0], 1.0, [0.3, 0.0, 0.0], 0.5);
        let field = KineticField::uniform(1, [0.0; 3], [0.0; 3]).unwrap();
        let n = 20_000;
        let tol = 3.0 / (n as f64).sqrt();
        let e0 = solve_linear_vlasov(&f, &field, g, &opts(0.0, 0.1, n)).unwrap();
        let rho = deposit(&e0, &g).rho_values();
        for (i, r) in rho.iter().enumerate() {
            // marginal averaged over a cell against the CIC hat
            let x = g.position(i)[0];
            let h = g.spacing(0);
            let exact: f64 = (-20..=20)
                .map(|k| {
                    let s = x + k as f64 * h / 20.0;
                    (1.0 - (k as f64 / 20.0).abs()) * (-(s - 20.0).powi(2) / 2.0).exp()
                        / (2.0 * std::f64::consts::PI).sqrt()
                })
                .sum::<f64>()
                / 20.0;
            assert!((r - exact).abs() < tol, "{i}: {r} vs {exact}");
        }
        let t = 3.0;
        let e = solve_linear_vlasov(&f, &field, g, &opts(t, 0.1, n)).unwrap();
        let (_, sx, _, _) = e.spread(&[20.0, 0.0, 0.0]);
        let want = 1.0 + t * t * 0.25;
        assert!(
            (sx[0] * sx[0] - want).abs() < tol * want,
            "{} vs {want}",
            sx[0] * sx[0]
        );
        assert_eq!(e.mass(), e0.mass());
    }

    #[test]
    fn momentum_conserved_without_external_fields() {
        let g = Grid::cubic(2, 32, 8.0).unwrap();
        let f = GaussianPhaseDensity::isotropic(2, [3.0, 4.5, 0.0], 1.0, [0.2, -0.1, 0.0], 0.4);
        let field = KineticField::uniform(2, [0.0; 3], [0.0; 3]).unwrap();
        let run = solve_vlasov_poisson(&f, &field, g, &opts(2.0, 0.05, 20_000)).unwrap();
        assert!(run.momentum_drift() < 1e-8, "{}", run.momentum_drift());
        assert!(run.records.last().unwrap().field > 0.0);
        assert_eq!(run.snapshots.len(), 2);
        assert!((run.last().moments.rho.integral().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_charge_matches_transport() {
        let g = Grid::cubic(2, 16, 6.0).unwrap();
        let params = PresetParams {
            amplitude: Some(0.5),
            omega: Some(0.8),
            b0: None,
        };
        let field = KineticField::Preset {
            preset: Preset::from_name("magnetic_trap", &params).unwrap(),
            grid: g,
        };
        let f = GaussianPhaseDensity::isotropic(2, [3.0, 3.0, 0.0], 0.5, [0.3, 0.0, 0.0], 0.3);
        let mut o = opts(1.0, 0.05, 500);
        o.coupling = 0.0;
        let pic = solve_vlasov_poisson(&f, &field, g, &o).unwrap();
        let lin = solve_linear_vlasov(&f, &field, g, &o).unwrap();
        assert_eq!(pic.last().particles, lin);
    }

    #[test]
    fn energy_error_is_second_order() {
        let g = Grid::cubic(2, 32, 2.0 * std::f64::consts::PI).unwrap();
        let f = GaussianPhaseDensity::isotropic(2, [3.1, 3.2, 0.0], 0.8, [0.0; 3], 0.3);
        let params = PresetParams {
            amplitude: Some(0.6),
            omega: Some(0.5),
            b0: None,
        };
        let field = KineticField::Preset {
            preset: Preset::from_name("magnetic_trap", &params).unwrap(),
            grid: g,
        };
        let ens = sample_ensemble(&f, g, 20_000, SamplingScheme::Halton, 1).unwrap();
        let history = |dt: f64| -> Vec<f64> {
            run_pic(ens.clone(), &field, &opts(2.0, dt, 0))
                .unwrap()
                .records
                .iter()
                .map(|r| r.total)
                .collect()
        };
        let (h1, h2, h3) = (history(0.2), history(0.1), history(0.05));
        // differences on the common coarse time levels
        let diff = |c: &[f64], f: &[f64]| {
            c.iter()
                .enumerate()
                .fold(0.0f64, |m, (i, v)| m.max((v - f[2 * i]).abs()))
        };
        let (d1, d2) = (diff(&h1, &h2), diff(&h2, &h3));
        assert!((3.0..5.0).contains(&(d1 / d2)), "{d1:e} {d2:e}");
        // total drift stays small at the coarsest step
        let e0 = h1[0];
        assert!(h1.iter().all(|e| (e - e0).abs() < 1e-4 * e0.abs()));
    }
}
