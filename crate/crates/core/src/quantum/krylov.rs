//! Arnoldi approximation of `exp(−iτM) v` for a Hermitian operator `M`.
//!
//! The projected matrix is symmetrised before exponentiation, so every step is
//! unitary up to the orthogonality of the basis (modified Gram–Schmidt, with a
//! second pass after severe cancellation). Convergence is judged with the
//! a-posteriori estimate `β h_{m+1,m} |e_m^T exp(−iτH_m) e_1|`. When the subspace limit is reached the
//! step is split into equal substeps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrylovOptions {
    /// Largest Krylov subspace dimension.
    pub max_dim: usize,
    /// Tolerance on the error estimate, relative to `‖v‖`.
    pub tol: f64,
    /// How many times a step may be halved before giving up.
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_dim: 20,
            tol: 1e-10,
            max_halvings: 6,
        }
    }
}

/// Statistics of one propagation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub applications: usize,
    pub max_estimate: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−iτT)` for Hermitian `T` via its eigendecomposition.
fn expm_hermitian(t: &DMatrix<Complex64>, tau: f64) -> DMatrix<Complex64> {
    let sym = (t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let q = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::from_polar(1.0, -tau * l)),
    );
    q * phases * q.adjoint()
}

/// One attempt over `tau`; `None` when the subspace limit is hit first.
fn attempt<F>(
    apply: &F,
    v: &[Complex64],
    tau: f64,
    opts: &KrylovOptions,
    stats: &mut KrylovStats,
) -> Option<Vec<Complex64>>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = v.len();
    let beta = norm(v);
    if beta == 0.0 {
        return Some(vec![Complex64::default(); n]);
    }
    let m_max = opts.max_dim.max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
    basis.push(v.iter().map(|x| x / beta).collect());
    let mut h = DMatrix::<Complex64>::zeros(m_max + 1, m_max);
    let mut w = vec![Complex64::default(); n];
    for j in 0..m_max {
        apply(&basis[j], &mut w);
        stats.applications += 1;
        let scale = norm(&w);
        let mut hnext = scale;
        // modified Gram–Schmidt, repeated only after heavy cancellation
        for _pass in 0..2 {
            let before = hnext;
            for (i, b) in basis.iter().enumerate() {
                let c = dot(b, &w);
                h[(i, j)] += c;
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            hnext = norm(&w);
            if hnext > 1e-3 * before {
                break;
            }
        }
        let m = j + 1;
        let hm = h.view((0, 0), (m, m)).into_owned();
        let e = expm_hermitian(&hm, tau);
        // happy breakdown: the subspace is invariant and the result exact
        let breakdown = hnext <= 1e-12 * scale;
        let estimate = if breakdown {
            0.0
        } else {
            hnext * e[(m - 1, 0)].norm()
        };
        if breakdown || estimate <= opts.tol {
            stats.max_estimate = stats.max_estimate.max(estimate);
            let mut out = vec![Complex64::default(); n];
            for (i, b) in basis.iter().enumerate().take(m) {
                let c = e[(i, 0)] * beta;
                for (o, x) in out.iter_mut().zip(b) {
                    *o += c * x;
                }
            }
            return Some(out);
        }
        if m == m_max {
            return None;
        }
        h[(m, j)] = Complex64::new(hnext, 0.0);
        basis.push(w.iter().map(|x| x / hnext).collect());
    }
    None
}

/// `exp(−iτM) v` with `M` applied by `apply(input, output)`.
pub fn expm_apply<F>(
    apply: F,
    v: &[Complex64],
    tau: f64,
    opts: &KrylovOptions,
) -> Result<(Vec<Complex64>, KrylovStats)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let mut stats = KrylovStats::default();
    let mut pieces = 1usize;
    for _ in 0..=opts.max_halvings {
        let sub = tau / pieces as f64;
        let mut cur = v.to_vec();
        let mut ok = true;
        for _ in 0..pieces {
            match attempt(&apply, &cur, sub, opts, &mut stats) {
                Some(next) => cur = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            stats.substeps = pieces;
            return Ok((cur, stats));
        }
        pieces *= 2;
    }
    Err(Error::KrylovNotConverged {
        estimate: f64::INFINITY,
        dim: opts.max_dim,
    })
}
