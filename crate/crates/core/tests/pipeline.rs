use num_complex::Complex64;
use pwlab::fields::{preset_by_name, PresetParams};
use pwlab::io::{load_spinor, load_wigner, save_spinor, save_wigner, Provenance};
use pwlab::kinetic::{GaussianPhaseDensity, SamplingScheme};
use pwlab::quantum::{build_mixed_state, evolve_pauli_poisson, EnsembleSpec, EvolveOptions};
use pwlab::spectral::Grid;
use pwlab::wigner::{moment_density, wigner_transform, PhaseGrid};

fn spec(dim: usize, seed: u64) -> EnsembleSpec {
    EnsembleSpec {
        density: GaussianPhaseDensity::isotropic(dim, [0.0; 3], 0.6, [0.0; 3], 0.5),
        scheme: SamplingScheme::Halton,
        seed,
        spin: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        width: None,
    }
}

#[test]
fn evolve_then_transform_then_dump() {
    let grid = Grid::cubic(1, 64, 8.0).unwrap();
    let fields = preset_by_name(grid, "cosine_well", &PresetParams::default()).unwrap();
    let hbar = 0.25;
    let state = build_mixed_state(&grid, &fields, hbar, 1.0, &spec(1, 3)).unwrap();
    let opts = EvolveOptions {
        dt: 0.01,
        t_final: 0.1,
        ..EvolveOptions::default()
    };
    let traj = evolve_pauli_poisson(&state, &fields, &opts).unwrap();
    let first = traj.records.first().unwrap();
    let last = traj.records.last().unwrap();
    assert!((first.charge - last.charge).abs() < 1e-10);

    let pg = PhaseGrid::aligned_for_width(grid, hbar, hbar.sqrt()).unwrap();
    let f = wigner_transform(&traj.final_state, &pg).unwrap();
    let marg = moment_density(&f).real_parts();
    let rho = pwlab::quantum::density(&traj.final_state).real_parts();
    let err = rho
        .iter()
        .zip(&marg)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "marginal error {err}");

    let dir = tempfile::tempdir().unwrap();
    let meta = Provenance::new("abc");
    let pw = dir.path().join("w.pwps");
    save_wigner(&pw, &f, &meta).unwrap();
    assert_eq!(load_wigner(&pw).unwrap().max_diff(&f), 0.0);
    let u = &traj.final_state.members()[0];
    let pu = dir.path().join("u.pwps");
    save_spinor(&pu, u, &meta).unwrap();
    assert_eq!(load_spinor(&pu).unwrap().max_diff(u), 0.0);
}

#[test]
fn seed_decides_the_state() {
    let grid = Grid::cubic(2, 32, 4.0).unwrap();
    let fields = preset_by_name(grid, "magnetic_trap", &PresetParams::default()).unwrap();
    let build = |seed| build_mixed_state(&grid, &fields, 0.5, 1.0, &spec(2, seed)).unwrap();
    let (a, b, c) = (build(3), build(3), build(4));
    assert_eq!(a.members().len(), b.members().len());
    for (u, v) in a.members().iter().zip(b.members()) {
        assert_eq!(u.max_diff(v), 0.0);
    }
    assert!(a.members()[0].max_diff(&c.members()[0]) > 1e-6);
}
