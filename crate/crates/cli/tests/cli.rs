use std::path::Path;
use std::process::{Command, Output};

const TINY_SWEEP: &str = r#"
kind = "sweep"
seed = 11

[grid]
dim = 2
length = 4.0
points = 32

[initial]
x_mean = [1.25, 2.0]
p_mean = [0.4, 0.0]

[time]
t_final = 0.2
dt = 0.05

[quantum]
hbars = [0.5, 0.25]

[kinetic]
particles = 2000
grid_points = 16
"#;

fn pwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

/// Particle data of a dump, without the header and its metadata.
fn payload(bytes: &[u8]) -> &[u8] {
    let n = 2000 * 5 * 8;
    &bytes[bytes.len() - n..]
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_SWEEP);
    let out = dir.path().join("out");
    let o = pwlab(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--dry-run",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn misspelt_key_fails_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[quantum]\nhbarr = [0.5]\n");
    let o = pwlab(&["sweep", "--config", &cfg, "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hbarr"), "{}", stderr(&o));
}

#[test]
fn ladder_must_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[quantum]\nhbars = [0.25, 0.25]\n");
    let o = pwlab(&["sweep", "--config", &cfg, "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("decreasing"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_reports_the_fields_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[fields]\npreset = \"no_such_field\"\n");
    let o = pwlab(&[
        "evolve",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("[fields]"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = pwlab(&["sweep", "--config", "/nonexistent/run.toml", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_report_has_one_row_per_hbar_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_SWEEP);
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = pwlab(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let json = std::fs::read(out.join("sweep.json")).unwrap();
        let csv = std::fs::read(out.join("sweep.csv")).unwrap();
        let run_json = std::fs::read(out.join("run.json")).unwrap();
        bytes.push((json, csv, run_json));
    }
    assert_eq!(bytes[0], bytes[1]);
    let report: serde_json::Value = serde_json::from_slice(&bytes[0].0).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    let hash = report["metadata"]["config_hash"].as_str().unwrap();
    assert!(String::from_utf8_lossy(&bytes[0].1)
        .starts_with(&format!("# pwlab {}", env!("CARGO_PKG_VERSION"))));
    assert!(String::from_utf8_lossy(&bytes[0].1).contains(hash));
}

#[test]
fn seed_flag_reseeds_random_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY_SWEEP.replace(
        "grid_points = 16",
        "grid_points = 16\nsampling = \"random\"",
    );
    let cfg = write_config(dir.path(), &body);
    let read = |run: &str, seed: &str| {
        let out = dir.path().join(run);
        let o = pwlab(&[
            "vlasov",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out.join("particles.pwps")).unwrap()
    };
    let a = read("a", "1");
    let b = read("b", "1");
    let c = read("c", "2");
    assert_eq!(a, b);
    let (pa, pc) = (payload(&a), payload(&c));
    assert_eq!(pa.len(), pc.len());
    assert_ne!(pa, pc);
}

#[test]
fn evolve_and_wigner_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[grid]
dim = 1
length = 8.0
points = 64

[initial]
x_mean = [4.0]
p_mean = [0.3]

[time]
t_final = 0.1
dt = 0.05

[fields]
preset = "cosine_well"

[quantum]
hbar = 0.25
"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("ev");
    let o = pwlab(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("evolve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 3);
    assert!(out.join("density.pwps").exists());
    assert!(out.join("member_0000.pwps").exists());

    let out = dir.path().join("wig");
    let o = pwlab(&["wigner", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("wigner.json")).unwrap()).unwrap();
    assert!(s["husimi_min"].as_f64().unwrap() >= -1e-12);
    assert!(s["marginal_error"].as_f64().unwrap() <= 1e-8);
    let dump = pwlab::io::load_wigner(&out.join("wigner.pwps")).unwrap();
    assert!((dump.mass() - s["mass"].as_f64().unwrap()).abs() < 1e-12);
}
