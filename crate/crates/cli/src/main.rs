use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landau_cli::artifacts::num;
use landau_cli::{dispatch, dump_radial, output_dir, parse_config, CliError, Kind, RunConfig};

#[derive(Parser)]
#[command(
    name = "landau",
    version,
    about = "Landau–Coulomb solver and verification battery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Artifact directory (overrides `output` and $LANDAU_OUTPUT_ROOT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve an initial condition and record the trajectory.
    Run(Common),
    /// Coefficient identities on the configured initial data.
    VerifyCoefficients(Common),
    /// Weighted-bound battery on a computed or stored trajectory.
    VerifyEstimates(Common),
    /// Fit a blow-up rate to a (t, norm) CSV.
    Classify(Common),
    /// 1D Euler preset with entropy diagnostics.
    Hydro(Common),
    /// Scaling-symmetry residual of the solver.
    Symmetry(Common),
    /// Radial profiles of a and the eigenvalues of A for a stored snapshot.
    DumpRadial {
        snapshot: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(kind: Kind, common: &Common) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = parse_config(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", common.config.display())))?;
    if cfg.kind != kind {
        return Err(CliError::Usage(format!(
            "{} has kind = \"{}\" but the subcommand is `{}`",
            common.config.display(),
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::DumpRadial { snapshot, out } => {
            let dir = out.clone().unwrap_or_else(|| {
                let root = std::env::var_os(landau_cli::OUTPUT_ROOT_ENV)
                    .map_or_else(|| PathBuf::from("landau-out"), PathBuf::from);
                root.join("dump-radial")
            });
            dump_radial(snapshot, &dir)
        }
        command => {
            let (kind, common) = match command {
                Command::Run(c) => (Kind::Run, c),
                Command::VerifyCoefficients(c) => (Kind::VerifyCoefficients, c),
                Command::VerifyEstimates(c) => (Kind::VerifyEstimates, c),
                Command::Classify(c) => (Kind::Classify, c),
                Command::Hydro(c) => (Kind::Hydro, c),
                Command::Symmetry(c) => (Kind::Symmetry, c),
                Command::DumpRadial { .. } => unreachable!(),
            };
            load(kind, common).and_then(|cfg| {
                let dir = output_dir(&cfg, common.out.as_deref());
                let started = std::time::Instant::now();
                let outcome = dispatch(&cfg, &dir);
                log::info!("{} finished in {:.1?}", kind.name(), started.elapsed());
                outcome
            })
        }
    };
    match result {
        Ok(outcome) => {
            for c in &outcome.manifest.checks {
                println!(
                    "{} {}: {} (limit {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    num(c.value),
                    num(c.threshold)
                );
            }
            println!("{} -> {}", outcome.manifest.status, outcome.dir.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
