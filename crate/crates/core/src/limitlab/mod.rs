//! ħ sweeps comparing Husimi functions of the quantum evolution with the
//! kinetic solution, plus Stern–Gerlach ablation and current convergence.

pub mod config;
pub mod measure;
pub mod report;
pub mod sweep;

pub use config::{auto_grid_points, DtPolicy, Mode, Spin, SweepConfig};
pub use measure::{
    default_battery, default_position_tests, pair_field, pair_particle_current,
    pair_position_marginal, symbol_eigenvalue, weak_error, PositionTest,
};
pub use report::{
    fit_order, strictly_decreasing, ConvergenceReport, HbarRow, RunMetadata, StageFailure,
};
pub use sweep::{current_convergence, run_hbar_sweep, run_sweep, sg_ablation, SweepPlan};
