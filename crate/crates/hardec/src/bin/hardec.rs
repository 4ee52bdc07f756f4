use clap::{Parser, Subcommand};
use hardec::config::ExperimentConfig;
use hardec::decoder::DecoderMode;
use hardec::experiments::{run_experiment, verify};
use hardec::threshold::TieMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hardec",
    version,
    about = "Effective logical noise channels, hard-decoding recovery optimization, and threshold experiments for stabilizer codes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid points (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory for CSV and manifest files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override the config's tie handling: first | exhaustive.
    #[arg(long, global = true)]
    ties: Option<String>,
    /// Override the config's decoder: symmetric | opt-all | opt-pauli.
    #[arg(long, global = true)]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Effective logical channel report for one noise point.
    Channel,
    /// Infidelity sweep over a parameter grid.
    Sweep,
    /// Threshold search for a one-parameter noise family.
    Threshold,
    /// Rotation-angle threshold contour over an axis grid.
    Contour,
    /// Bare vs Pauli-twirled threshold comparison.
    Twirl,
    /// Perturbation-robustness study of pre-optimized recovery maps.
    Perturb,
    /// Run the oracle-equivalence, sign-consistency, and closed-form suites.
    Verify {
        /// Codes to check (default: all built-ins).
        codes: Vec<String>,
        /// Inject a known corruption as a negative control.
        #[arg(long)]
        corrupt: bool,
    },
}

impl Cmd {
    fn expected_tag(&self) -> Option<&'static str> {
        match self {
            Cmd::Channel => Some("channel"),
            Cmd::Sweep => Some("sweep"),
            Cmd::Threshold => Some("threshold"),
            Cmd::Contour => Some("contour"),
            Cmd::Twirl => Some("twirl"),
            Cmd::Perturb => Some("perturb"),
            Cmd::Verify { .. } => None,
        }
    }
}

fn parse_ties(s: &str) -> hardec::Result<TieMode> {
    match s {
        "first" => Ok(TieMode::First),
        "exhaustive" => Ok(TieMode::Exhaustive),
        other => Err(hardec::Error::Config {
            field: "ties".into(),
            reason: format!("unknown tie mode '{other}'"),
        }),
    }
}

fn run(cli: Cli) -> hardec::Result<bool> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| hardec::Error::Config {
                field: "workers".into(),
                reason: e.to_string(),
            })?;
    }
    if let Cmd::Verify { codes, corrupt } = &cli.cmd {
        let report = verify(codes, *corrupt);
        for c in &report.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            println!("{tag} {} — {}", c.name, c.detail);
        }
        return Ok(report.all_passed());
    }
    let tag = cli.cmd.expected_tag().expect("experiment subcommand");
    let path = cli.config.ok_or_else(|| hardec::Error::Config {
        field: "config".into(),
        reason: "--config <file> is required for experiment subcommands".into(),
    })?;
    let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path)?)?;
    if cfg.kind.tag() != tag {
        return Err(hardec::Error::Config {
            field: "experiment".into(),
            reason: format!("config declares '{}', subcommand is '{tag}'", cfg.kind.tag()),
        });
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(t) = &cli.ties {
        cfg.ties = parse_ties(t)?;
    }
    if let Some(m) = &cli.mode {
        cfg.mode = DecoderMode::parse(m)?;
    }
    let out = run_experiment(&cfg, &cli.out)?;
    println!("wrote {} ({} rows)", out.csv_path.display(), out.rows);
    println!("wrote {}", out.manifest_path.display());
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
