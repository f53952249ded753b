//! `pwlab`: batch front end for the Pauli–Poisson semiclassical lab.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{parse_config, ConfigError, Kind, RunConfig};
use pwlab::selftest::Profile;

#[derive(Parser, Debug)]
#[command(
    name = "pwlab",
    version,
    about = "Semiclassical limits of mixed-state Pauli-Poisson dynamics"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Validate the configuration and exit without computing or writing.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Verb {
    /// Mixed-state Pauli(-Poisson) evolution at one ħ.
    Evolve,
    /// Wigner and Husimi functions of the initial mixed state.
    Wigner,
    /// Particle solution of the classical limit.
    Vlasov,
    /// ħ ladder with weak errors against the kinetic solution.
    Sweep,
    /// Stern-Gerlach on/off distances across the ladder.
    AblateSg,
    /// Current pairing across the ladder.
    Current,
    /// Acceptance checks.
    Selftest {
        #[arg(long, value_enum, default_value_t = ProfileArg::Quick)]
        profile: ProfileArg,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ProfileArg {
    Quick,
    Full,
}

impl Verb {
    fn kind(self) -> Option<Kind> {
        Some(match self {
            Verb::Evolve => Kind::Evolve,
            Verb::Wigner => Kind::Wigner,
            Verb::Vlasov => Kind::Vlasov,
            Verb::Sweep => Kind::Sweep,
            Verb::AblateSg => Kind::Ablation,
            Verb::Current => Kind::Current,
            Verb::Selftest { .. } => return None,
        })
    }
}

/// Exit code of a failed stage.
fn exit_code(stage: &str) -> u8 {
    match stage {
        "config" => 2,
        "fields" => 3,
        "quantum" => 4,
        "wigner" => 5,
        "kinetic" => 6,
        "limitlab" => 7,
        "io" => 8,
        "spectral" => 9,
        _ => 1,
    }
}

/// Stage tag of a failure; sweep failures report the stage that broke.
fn stage_of(e: &pwlab::Error) -> &'static str {
    match e {
        pwlab::Error::Sweep { stage, source } => match *stage {
            "limitlab" => source.stage(),
            s => s,
        },
        other => other.stage(),
    }
}

fn fail(stage: &str, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("pwlab: [{stage}] {msg}");
    ExitCode::from(exit_code(stage))
}

fn load(cli: &Cli, kind: Option<Kind>) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(k) = kind {
        cfg.kind = k;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        pwlab::par::set_jobs(j);
    }
    let cfg = match load(&cli, cli.verb.kind()) {
        Ok(c) => c,
        Err(ConfigError::Core(e)) => return fail(stage_of(&e), e),
        Err(e) => return fail("config", e),
    };
    if cli.dry_run {
        println!("config ok ({})", cfg.hash());
        return ExitCode::SUCCESS;
    }
    let outcome = match cli.verb {
        Verb::Selftest { profile } => {
            let p = match profile {
                ProfileArg::Quick => Profile::Quick,
                ProfileArg::Full => Profile::Full,
            };
            run::selftest(&cfg, p)
        }
        _ => run::experiment(&cfg),
    };
    match outcome {
        Ok(run::Outcome { files, passed }) => {
            for f in files {
                println!("{}", f.display());
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(stage_of(&e), e),
    }
}
