//! Convergence reports and their JSON/CSV forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{Mode, SweepConfig};
use super::measure::PositionTest;
use crate::error::Error;
use crate::wigner::TestFunction;

/// Provenance of a run; embedded in every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl RunMetadata {
    pub fn new(config_hash: String, seed: u64) -> Self {
        RunMetadata {
            tool: "pwlab".into(),
            version: crate::VERSION.into(),
            config_hash,
            seed,
        }
    }

    /// `# pwlab <version> config=<hash> seed=<seed>`.
    pub fn comment_line(&self) -> String {
        format!(
            "# {} {} config={} seed={}",
            self.tool, self.version, self.config_hash, self.seed
        )
    }
}

/// Results for one `ħ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HbarRow {
    pub hbar: f64,
    pub grid_points: usize,
    pub xi_points: usize,
    pub members: usize,
    pub dt: f64,
    pub steps: usize,
    /// `e_φ(ħ)` per test function.
    pub errors: Vec<f64>,
    /// Mean of `errors`.
    pub aggregate: f64,
    /// `|∫f̃ − M|`.
    pub mass_error: f64,
    pub husimi_min: f64,
    /// `max_t ‖ρ(t)‖_{7/5}`.
    pub l75_max: f64,
    pub energy_drift: f64,
    pub charge_drift: f64,
    /// Tail masses at the configured radii.
    pub tails: Vec<f64>,
    /// `ħ² Σλ‖∇u‖²` at the final time.
    pub grad_energy: f64,
    /// Mean distance between the position marginals of the Stern–Gerlach on
    /// and off Husimi functions, paired with the battery.
    pub sg_distance: Option<f64>,
    /// Mean `|⟨J^ħ − J_kin, ψ⟩|` over position tests and components.
    pub current_error: Option<f64>,
    /// Mean `ħ|⟨∇×s, ψ⟩|`.
    pub spin_curl: Option<f64>,
}

/// A failed stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub hbar: Option<f64>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub metadata: RunMetadata,
    pub mode: Mode,
    pub config: SweepConfig,
    pub battery: Vec<TestFunction>,
    pub position_tests: Vec<PositionTest>,
    /// Kinetic mass `M`.
    pub kinetic_mass: f64,
    /// `2‖ρ_I‖_{7/5}` of the initial `x`-marginal.
    pub l75_bound: f64,
    pub rows: Vec<HbarRow>,
    /// Least-squares slope of `log aggregate` against `log ħ`.
    pub order: Option<f64>,
    pub sg_order: Option<f64>,
    pub current_order: Option<f64>,
    pub spin_curl_slope: Option<f64>,
    pub failure: Option<StageFailure>,
}

/// Least-squares slope of `log y` against `log x` over positive pairs;
/// `None` with fewer than two.
pub fn fit_order(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// True when every entry is strictly below its predecessor.
pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl ConvergenceReport {
    pub fn hbars(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.hbar).collect()
    }

    pub fn aggregates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.aggregate).collect()
    }

    pub fn sg_distances(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.sg_distance).collect()
    }

    pub fn current_errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.current_error).collect()
    }

    pub fn spin_curls(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.spin_curl).collect()
    }

    /// Fills in the fitted orders from the rows.
    pub fn refit(&mut self) {
        let h = self.hbars();
        let pick = |v: Vec<f64>| {
            if v.len() == h.len() {
                fit_order(&h, &v)
            } else {
                None
            }
        };
        self.order = fit_order(&h, &self.aggregates());
        self.sg_order = pick(self.sg_distances());
        self.current_order = pick(self.current_errors());
        self.spin_curl_slope = pick(self.spin_curls());
    }

    /// `Err` carrying the stage tag when a stage failed.
    pub fn check(&self) -> Result<(), Error> {
        match &self.failure {
            None => Ok(()),
            Some(f) => Err(Error::Sweep {
                stage: stage_tag(&f.stage),
                source: Box::new(Error::InvalidState(f.message.clone())),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    /// One line per `ħ`, preceded by a provenance comment.
    pub fn to_csv(&self) -> String {
        let mut s = self.metadata.comment_line();
        s.push('\n');
        let nb = self.battery.len();
        s.push_str("hbar,grid_points,xi_points,members,dt,steps,aggregate");
        for k in 0..nb {
            let _ = write!(s, ",e{k}");
        }
        s.push_str(",mass_error,husimi_min,l75_max,energy_drift,charge_drift");
        for r in &self.config.tail_radii {
            let _ = write!(s, ",tail_r{r}");
        }
        s.push_str(",grad_energy,sg_distance,current_error,spin_curl\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = write!(
                s,
                "{},{},{},{},{},{},{:e}",
                r.hbar, r.grid_points, r.xi_points, r.members, r.dt, r.steps, r.aggregate
            );
            for e in &r.errors {
                let _ = write!(s, ",{e:e}");
            }
            let _ = write!(
                s,
                ",{:e},{:e},{:e},{:e},{:e}",
                r.mass_error, r.husimi_min, r.l75_max, r.energy_drift, r.charge_drift
            );
            for t in &r.tails {
                let _ = write!(s, ",{t:e}");
            }
            let _ = writeln!(
                s,
                ",{:e},{},{},{}",
                r.grad_energy,
                opt(r.sg_distance),
                opt(r.current_error),
                opt(r.spin_curl)
            );
        }
        s
    }
}

/// Maps a free-form stage name onto the static tags used by [`Error::stage`].
pub fn stage_tag(stage: &str) -> &'static str {
    match stage {
        "spectral" => "spectral",
        "fields" => "fields",
        "quantum" => "quantum",
        "wigner" => "wigner",
        "kinetic" => "kinetic",
        "io" => "io",
        "config" => "config",
        _ => "limitlab",
    }
}
