//! Phase-space calculus for mixed spinor states.

pub mod moments;
pub mod pairing;
pub mod pdo;
pub mod phase;
pub mod transform;

pub use moments::{husimi, moment_current, moment_density};
pub use pairing::{oscillatory_tail, oscillatory_tails, pair_against, pair_shifted, TestFunction};
pub use pdo::{
    apply_theta, apply_theta_fn, apply_theta_matrix, momentum_derivative, pauli_wigner_operator,
    pauli_wigner_residual,
};
pub use phase::PhaseGrid;
pub use transform::{wigner_matrix, wigner_transform, WignerFunction, WignerMatrix};
