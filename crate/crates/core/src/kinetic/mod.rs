//! Limit dynamics: characteristics of the Vlasov equation with Lorentz force,
//! transport of sampled initial data, and particle-in-cell for the
//! self-consistent problem.
pub mod deposit;
pub mod field;
pub mod particles;
pub mod push;
pub mod sampling;
pub mod vlasov;

pub use deposit::{
    deposit, deposit_density, interpolate, interpolate_vec, stencil, KineticMoments, Stencil,
};
pub use field::KineticField;
pub use particles::ParticleEnsemble;
pub use push::{
    flow_map, gyrate, lorentz_step, rk4_step, step_characteristic, step_count, FlowTrace,
};
pub use sampling::{sample_phase_points, GaussianPhaseDensity, PhasePoint, SamplingScheme};
pub use vlasov::{
    run_pic, sample_ensemble, solve_linear_vlasov, solve_vlasov_poisson, transport, KineticOptions,
    PicRecord, PicRun, PicSnapshot,
};
