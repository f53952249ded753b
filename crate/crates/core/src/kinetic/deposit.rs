//! Cloud-in-cell deposition and the matching multilinear interpolation.

use num_complex::Complex64;

use crate::par;
use crate::spectral::{Grid, ScalarField, VectorField};

use super::particles::ParticleEnsemble;

/// Particles per deposition chunk. Chunk buffers are summed in chunk order,
/// which keeps the result independent of the thread count.
const CHUNK: usize = 4096;

/// Up to eight `(flat index, weight)` pairs; the weights sum to one.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub len: usize,
    pub index: [usize; 8],
    pub weight: [f64; 8],
}

/// Multilinear stencil of `x` on the nodes `x_i = i h` of `grid`.
pub fn stencil(grid: &Grid, x: &[f64; 3]) -> Stencil {
    let d = grid.dim();
    let mut lo = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..d {
        let n = grid.n(a);
        let s = grid.wrap(a, x[a]) / grid.spacing(a);
        let i0 = s.floor();
        frac[a] = s - i0;
        lo[a] = (i0 as usize) % n;
    }
    let len = 1 << d;
    let mut st = Stencil {
        len,
        index: [0; 8],
        weight: [0.0; 8],
    };
    for corner in 0..len {
        let mut idx = [0usize; 3];
        let mut w = 1.0;
        for a in 0..d {
            let up = (corner >> (d - 1 - a)) & 1 == 1;
            idx[a] = if up { (lo[a] + 1) % grid.n(a) } else { lo[a] };
            w *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        st.index[corner] = grid.flat_index(&idx);
        st.weight[corner] = w;
    }
    st
}

/// Interpolates grid samples at `x`.
pub fn interpolate(grid: &Grid, values: &[f64], x: &[f64; 3]) -> f64 {
    let st = stencil(grid, x);
    (0..st.len)
        .map(|c| st.weight[c] * values[st.index[c]])
        .sum()
}

/// Interpolates up to three component arrays at `x`.
pub fn interpolate_vec(grid: &Grid, comps: &[Vec<f64>], x: &[f64; 3]) -> [f64; 3] {
    let st = stencil(grid, x);
    let mut out = [0.0; 3];
    for (o, comp) in out.iter_mut().zip(comps) {
        *o = (0..st.len).map(|c| st.weight[c] * comp[st.index[c]]).sum();
    }
    out
}

/// Deposited charge density and current.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticMoments {
    pub rho: ScalarField,
    pub current: VectorField,
}

impl KineticMoments {
    pub fn rho_values(&self) -> Vec<f64> {
        self.rho.real_parts()
    }
}

/// Cloud-in-cell deposition of `w_i` and `w_i p_i`, divided by the cell volume
/// so that `∫ρ = Σ w_i`.
pub fn deposit(particles: &ParticleEnsemble, grid: &Grid) -> KineticMoments {
    let (rho, current) = deposit_raw(particles, grid, true);
    let rho = ScalarField::new(
        *grid,
        rho.into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
    )
    .expect("grid-sized");
    let current = VectorField::new(*grid, current).expect("grid-sized");
    KineticMoments { rho, current }
}

/// Density only.
pub fn deposit_density(particles: &ParticleEnsemble, grid: &Grid) -> Vec<f64> {
    deposit_raw(particles, grid, false).0
}

fn deposit_raw(
    particles: &ParticleEnsemble,
    grid: &Grid,
    with_current: bool,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = grid.dim();
    let size = grid.size();
    let inv = 1.0 / grid.cell_volume();
    let ncur = if with_current { d } else { 0 };
    let n = particles.len();
    let chunks = n.div_ceil(CHUNK);
    let xs = particles.positions();
    let ps = particles.momenta();
    let ws = particles.weights();
    let partial = par::map_range(chunks, |c| {
        let mut rho = vec![0.0; size];
        let mut cur = vec![vec![0.0; size]; ncur];
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let st = stencil(grid, &xs[i]);
            for k in 0..st.len {
                let m = ws[i] * st.weight[k];
                rho[st.index[k]] += m;
                for (a, ca) in cur.iter_mut().enumerate() {
                    ca[st.index[k]] += m * ps[i][a];
                }
            }
        }
        (rho, cur)
    });
    let mut rho = vec![0.0; size];
    let mut cur = vec![vec![0.0; size]; ncur];
    for (r, c) in partial {
        for (a, b) in rho.iter_mut().zip(&r) {
            *a += b;
        }
        for (ca, cb) in cur.iter_mut().zip(&c) {
            for (a, b) in ca.iter_mut().zip(cb) {
                *a += b;
            }
        }
    }
    for v in rho.iter_mut() {
        *v *= inv;
    }
    for c in cur.iter_mut() {
        for v in c.iter_mut() {
            *v *= inv;
        }
    }
    (rho, cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ensemble(grid: Grid, xs: Vec<[f64; 3]>) -> ParticleEnsemble {
        let n = xs.len();
        let p = (0..n).map(|i| [i as f64, 1.0, 0.0]).collect();
        ParticleEnsemble::new(grid, xs, p, vec![1.0 / n as f64; n]).unwrap()
    }

    #[test]
    fn node_and_mid_cell() {
        let g = Grid::cubic(2, 8, 4.0).unwrap();
        let e = ensemble(g, vec![[1.5, 2.0, 0.0]]);
        let m = deposit(&e, &g);
        let rho = m.rho_values();
        let node = g.flat_index(&[3, 4]);
        assert_eq!(rho[node] * g.cell_volume(), 1.0);
        assert_eq!(rho.iter().filter(|v| **v != 0.0).count(), 1);
        assert!((m.rho.integral().re - 1.0).abs() < 1e-15);
        let e = ensemble(g, vec![[1.75, 2.25, 0.0]]);
        let st = stencil(&g, &e.positions()[0]);
        assert_eq!(st.len, 4);
        assert!(st.weight.iter().take(4).all(|w| (w - 0.25).abs() < 1e-15));
        assert!((st.weight.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // wrap-around corner
        let st = stencil(&g, &[3.9, 0.1, 0.0]);
        assert!(st.index[..4].contains(&g.flat_index(&[0, 0])));
    }

    #[test]
    fn lattice_gives_constant_density() {
        let g = Grid::cubic(2, 16, 3.0).unwrap();
        let mut xs = Vec::new();
        for i in 0..48 {
            for j in 0..48 {
                xs.push([
                    (i as f64 + 0.3) * 3.0 / 48.0,
                    (j as f64 + 0.7) * 3.0 / 48.0,
                    0.0,
                ]);
            }
        }
        let e = ensemble(g, xs);
        let rho = deposit(&e, &g).rho_values();
        let want = 1.0 / 9.0;
        assert!(rho.iter().all(|r| (r - want).abs() < 1e-12));
    }

    #[test]
    fn interpolation_reproduces_linear_data() {
        let g = Grid::cubic(1, 8, 8.0).unwrap();
        let v: Vec<f64> = (0..8).map(|i| 2.0 * i as f64).collect();
        assert!((interpolate(&g, &v, &[2.25, 0.0, 0.0]) - 4.5).abs() < 1e-15);
        // periodic wrap between the last and first node
        assert!((interpolate(&g, &v, &[7.5, 0.0, 0.0]) - 7.0).abs() < 1e-15);
    }
}
