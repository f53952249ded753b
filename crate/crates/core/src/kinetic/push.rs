//! Integrators for the characteristics `ẋ = p, ṗ = E + p×B`.
//!
//! The main stepper is a kick–gyrate–kick scheme: half electric kick, exact
//! motion in the magnetic field frozen at the predicted midpoint (rotation of
//! `p` by the angle `|B|dt` together with the matching arc of `x`), half
//! electric kick. For a uniform field this reproduces the cyclotron orbit to
//! roundoff, and `|p|` is untouched by the magnetic part.

use crate::error::{Error, Result};
use crate::par;

use super::field::{norm, KineticField};
use super::particles::ParticleEnsemble;

/// Particles per parallel push block.
const BLOCK: usize = 2048;

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0 + t.powi(4) / 120.0
    } else {
        t.sin() / t
    }
}

/// `p ← p + h E`.
pub(crate) fn kick(p: &mut [f64; 3], e: &[f64; 3], h: f64) {
    for a in 0..3 {
        p[a] += h * e[a];
    }
}

/// Exact flow of `ẋ = p, ṗ = p×B` for constant `B` over `dt`.
pub fn gyrate(x: &mut [f64; 3], p: &mut [f64; 3], b: &[f64; 3], dt: f64) {
    let w = norm(b);
    if w == 0.0 {
        for a in 0..3 {
            x[a] += p[a] * dt;
        }
        return;
    }
    let bh = [b[0] / w, b[1] / w, b[2] / w];
    let pb = p[0] * bh[0] + p[1] * bh[1] + p[2] * bh[2];
    let par = [pb * bh[0], pb * bh[1], pb * bh[2]];
    let perp = [p[0] - par[0], p[1] - par[1], p[2] - par[2]];
    let pc = cross(&perp, &bh);
    let th = w * dt;
    let (s, c) = th.sin_cos();
    // ∫₀^dt cos(ωt) dt and ∫₀^dt sin(ωt) dt, cancellation-free
    let sx = dt * sinc(th);
    let half = sinc(0.5 * th);
    let cx = dt * 0.5 * th * half * half;
    for a in 0..3 {
        x[a] += par[a] * dt + perp[a] * sx + pc[a] * cx;
        p[a] = par[a] + perp[a] * c + pc[a] * s;
    }
}

/// Magnetic part of a step, with `B` taken at the predicted midpoint.
pub(crate) fn rotate_drift(x: &mut [f64; 3], p: &mut [f64; 3], field: &KineticField, dt: f64) {
    let mut mid = *x;
    for a in 0..3 {
        mid[a] += 0.5 * dt * p[a];
    }
    let b = field.b(&mid);
    gyrate(x, p, &b, dt);
}

/// One full step of a single characteristic (positions not wrapped).
pub fn step_characteristic(x: &mut [f64; 3], p: &mut [f64; 3], field: &KineticField, dt: f64) {
    kick(p, &field.e(x), 0.5 * dt);
    rotate_drift(x, p, field, dt);
    kick(p, &field.e(x), 0.5 * dt);
}

/// Classical RK4 step, for cross-checks.
pub fn rk4_step(x: &mut [f64; 3], p: &mut [f64; 3], field: &KineticField, dt: f64) {
    let rhs = |x: &[f64; 3], p: &[f64; 3]| -> ([f64; 3], [f64; 3]) {
        let e = field.e(x);
        let pb = cross(p, &field.b(x));
        (*p, [e[0] + pb[0], e[1] + pb[1], e[2] + pb[2]])
    };
    let add =
        |u: &[f64; 3], k: &[f64; 3], h: f64| [u[0] + h * k[0], u[1] + h * k[1], u[2] + h * k[2]];
    let (k1x, k1p) = rhs(x, p);
    let (k2x, k2p) = rhs(&add(x, &k1x, 0.5 * dt), &add(p, &k1p, 0.5 * dt));
    let (k3x, k3p) = rhs(&add(x, &k2x, 0.5 * dt), &add(p, &k2p, 0.5 * dt));
    let (k4x, k4p) = rhs(&add(x, &k3x, dt), &add(p, &k3p, dt));
    for a in 0..3 {
        x[a] += dt / 6.0 * (k1x[a] + 2.0 * k2x[a] + 2.0 * k3x[a] + k4x[a]);
        p[a] += dt / 6.0 * (k1p[a] + 2.0 * k2p[a] + 2.0 * k3p[a] + k4p[a]);
    }
}

/// Applies `f` to every particle in parallel blocks, then wraps positions.
pub(crate) fn for_each_particle<F>(ens: &mut ParticleEnsemble, f: F)
where
    F: Fn(usize, &mut [f64; 3], &mut [f64; 3]) + Sync + Send,
{
    let n = ens.len();
    let (xs, ps) = ens.parts_mut();
    let blocks = n.div_ceil(BLOCK);
    let xr: &[[f64; 3]] = xs;
    let pr: &[[f64; 3]] = ps;
    let out = par::map_range(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        let mut xb = xr[lo..hi].to_vec();
        let mut pb = pr[lo..hi].to_vec();
        for (k, (x, p)) in xb.iter_mut().zip(pb.iter_mut()).enumerate() {
            f(lo + k, x, p);
        }
        (xb, pb)
    });
    for (b, (xb, pb)) in out.into_iter().enumerate() {
        let lo = b * BLOCK;
        xs[lo..lo + xb.len()].copy_from_slice(&xb);
        ps[lo..lo + pb.len()].copy_from_slice(&pb);
    }
    ens.wrap();
}

/// One step of every particle in an external field.
pub fn lorentz_step(
    particles: &ParticleEnsemble,
    field: &KineticField,
    dt: f64,
) -> Result<ParticleEnsemble> {
    check_dim(particles, field)?;
    field.check_step(dt)?;
    let mut next = particles.clone();
    advance(&mut next, field, dt, 1);
    Ok(next)
}

pub(crate) fn check_dim(particles: &ParticleEnsemble, field: &KineticField) -> Result<()> {
    if particles.dim() != field.dim() {
        return Err(Error::Kinetic(format!(
            "particles are {}-dimensional, field is {}-dimensional",
            particles.dim(),
            field.dim()
        )));
    }
    Ok(())
}

/// `steps` steps of size `dt` in place (inputs already checked).
pub(crate) fn advance(ens: &mut ParticleEnsemble, field: &KineticField, dt: f64, steps: usize) {
    for _ in 0..steps {
        for_each_particle(ens, |_, x, p| step_characteristic(x, p, field, dt));
    }
}

/// Sampled characteristic with its Hamiltonian `½|p|² + V(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    /// Unwrapped positions.
    pub x: Vec<[f64; 3]>,
    pub p: Vec<[f64; 3]>,
    pub hamiltonian: Vec<f64>,
}

impl FlowTrace {
    pub fn last(&self) -> ([f64; 3], [f64; 3]) {
        (
            *self.x.last().expect("non-empty"),
            *self.p.last().expect("non-empty"),
        )
    }

    /// `max_t |H(t) − H(0)|`.
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = self.hamiltonian[0];
        self.hamiltonian
            .iter()
            .fold(0.0, |m, h| m.max((h - h0).abs()))
    }
}

/// Number of steps and the adjusted step landing exactly on `t`.
pub fn step_count(t: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::TimeStep(format!(
            "final time {t} must be non-negative"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::TimeStep(format!("dt = {dt} must be positive")));
    }
    if t == 0.0 {
        return Ok((0, dt));
    }
    let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
    Ok((n, t / n as f64))
}

/// Integrates one characteristic up to `t` with step close to `dt`.
pub fn flow_map(
    x0: [f64; 3],
    p0: [f64; 3],
    field: &KineticField,
    t: f64,
    dt: f64,
) -> Result<FlowTrace> {
    let (n, h) = step_count(t, dt)?;
    field.check_step(h)?;
    let d = field.dim();
    let (mut x, mut p) = (x0, p0);
    for a in d..3 {
        x[a] = 0.0;
        p[a] = 0.0;
    }
    let ham = |x: &[f64; 3], p: &[f64; 3]| {
        0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) + field.potential(x)
    };
    let mut trace = FlowTrace {
        times: vec![0.0],
        x: vec![x],
        p: vec![p],
        hamiltonian: vec![ham(&x, &p)],
    };
    for k in 1..=n {
        step_characteristic(&mut x, &mut p, field, h);
        trace.times.push(k as f64 * h);
        trace.x.push(x);
        trace.p.push(p);
        trace.hamiltonian.push(ham(&x, &p));
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fields::{Preset, PresetParams};
    use crate::spectral::Grid;

    #[test]
    fn cyclotron_quarter_turn() {
        let f = KineticField::uniform(3, [0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        let tr = flow_map([0.0; 3], [1.0, 0.0, 0.0], &f, 0.5 * PI, 1e-3).unwrap();
        let (x, p) = tr.last();
        assert!(p[0].abs() < 1e-6 && (p[1] + 1.0).abs() < 1e-6);
        assert!((norm(&p) - 1.0).abs() < 1e-12);
        // circle of radius 1 centred at (0, -1)
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_flight_and_uniform_kick() {
        let f = KineticField::uniform(2, [0.0; 3], [0.0; 3]).unwrap();
        let tr = flow_map([0.5, 0.25, 0.0], [1.5, -0.75, 0.0], &f, 2.0, 0.25).unwrap();
        assert_eq!(tr.last().0, [3.5, -1.25, 0.0]);
        assert_eq!(tr.hamiltonian_drift(), 0.0);
        let f = KineticField::uniform(1, [0.5, 0.0, 0.0], [0.0; 3]).unwrap();
        let tr = flow_map([0.0; 3], [1.0, 0.0, 0.0], &f, 2.0, 0.25).unwrap();
        assert_eq!(tr.last().1[0], 2.0);
    }

    #[test]
    fn magnetic_force_does_no_work() {
        let g = Grid::cubic(3, 8, 4.0).unwrap();
        let f = KineticField::Preset {
            preset: Preset::SinusoidalB { amplitude: 1.2 },
            grid: g,
        };
        let tr = flow_map([0.3, 0.1, 0.2], [0.4, 0.9, -0.3], &f, 20.0, 0.05).unwrap();
        let p0 = norm(&tr.p[0]);
        assert!(tr.p.iter().all(|p| (norm(p) - p0).abs() < 1e-12));
    }

    #[test]
    fn hamiltonian_drift_is_second_order() {
        let g = Grid::cubic(1, 8, 20.0).unwrap();
        let f = KineticField::Preset {
            preset: Preset::HarmonicV { omega: 1.0 },
            grid: g,
        };
        let drift = |dt: f64| {
            flow_map([12.0, 0.0, 0.0], [0.5, 0.0, 0.0], &f, 20.0 * PI, dt)
                .unwrap()
                .hamiltonian_drift()
        };
        let (a, b, c) = (drift(0.1), drift(0.05), drift(0.025));
        assert!(a < 1e-2);
        for r in [a / b, b / c] {
            assert!((3.5..4.5).contains(&r), "{r}");
        }
        // one period returns to the start
        let tr = flow_map([12.0, 0.0, 0.0], [0.5, 0.0, 0.0], &f, 2.0 * PI, 1e-3).unwrap();
        let (x, p) = tr.last();
        assert!((x[0] - 12.0).abs() < 1e-6 && (p[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn agrees_with_rk4_in_nonuniform_field() {
        let g = Grid::cubic(2, 8, 5.0).unwrap();
        let params = PresetParams {
            amplitude: Some(0.8),
            omega: Some(0.7),
            b0: None,
        };
        let f = KineticField::Preset {
            preset: Preset::from_name("magnetic_trap", &params).unwrap(),
            grid: g,
        };
        let (x0, p0) = ([1.0, 2.0, 0.0], [0.6, -0.2, 0.0]);
        let tr = flow_map(x0, p0, &f, 5.0, 1e-3).unwrap();
        let (mut x, mut p) = (x0, p0);
        for _ in 0..5000 {
            rk4_step(&mut x, &mut p, &f, 1e-3);
        }
        let (xb, pb) = tr.last();
        for a in 0..2 {
            assert!((xb[a] - x[a]).abs() < 1e-5 && (pb[a] - p[a]).abs() < 1e-5);
        }
        assert!(tr.hamiltonian_drift() < 1e-5);
    }

    #[test]
    fn phase_volume_is_preserved() {
        let g = Grid::cubic(2, 8, 5.0).unwrap();
        let params = PresetParams {
            amplitude: Some(0.8),
            omega: Some(0.7),
            b0: None,
        };
        let f = KineticField::Preset {
            preset: Preset::from_name("magnetic_trap", &params).unwrap(),
            grid: g,
        };
        let base = [1.0, 2.0, 0.6, -0.2];
        let eps = 1e-5;
        let end = |z: [f64; 4]| {
            let tr = flow_map([z[0], z[1], 0.0], [z[2], z[3], 0.0], &f, 3.0, 0.01).unwrap();
            let (x, p) = tr.last();
            [x[0], x[1], p[0], p[1]]
        };
        let z0 = end(base);
        let mut jac = nalgebra::Matrix4::<f64>::zeros();
        for c in 0..4 {
            let mut z = base;
            z[c] += eps;
            let zc = end(z);
            for r in 0..4 {
                jac[(r, c)] = (zc[r] - z0[r]) / eps;
            }
        }
        assert!(
            (jac.determinant() - 1.0).abs() < 1e-3,
            "{}",
            jac.determinant()
        );
    }

    #[test]
    fn rejects_large_rotation() {
        let g = Grid::cubic(2, 8, 8.0).unwrap();
        let e = ParticleEnsemble::new(g, vec![[1.0, 1.0, 0.0]], vec![[1.0, 0.0, 0.0]], vec![1.0])
            .unwrap();
        let f = KineticField::uniform(2, [0.0; 3], [0.0, 0.0, 2.0]).unwrap();
        assert!(lorentz_step(&e, &f, 2.0).is_err());
        let next = lorentz_step(&e, &f, 0.1).unwrap();
        assert!((norm(&next.momenta()[0]) - 1.0).abs() < 1e-15);
        let f1 = KineticField::uniform(1, [0.0; 3], [0.0; 3]).unwrap();
        assert!(lorentz_step(&e, &f1, 0.1).is_err());
    }
}
