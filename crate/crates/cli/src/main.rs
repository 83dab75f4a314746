use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use photonkin_cli::config::{CommandKind, ExperimentConfig};
use photonkin_cli::error::Result;
use photonkin_cli::validate::validate;

/// Numerical photon experiments: counting statistics, momentum-space
/// holonomy, and positive-energy wave packets.
#[derive(Parser)]
#[command(name = "photonkin", version, about)]
struct Cli {
    /// Flat key = value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the Monte Carlo estimators.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: TopCommand,
}

#[derive(Subcommand)]
enum TopCommand {
    #[command(flatten)]
    Experiment(ExperimentCmd),
    /// Run the command named in the config file.
    Run,
    /// Dry-run precondition checks; prints a JSON list of diagnostics.
    Validate {
        #[command(subcommand)]
        target: Option<ExperimentCmd>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Photon distribution of a displaced number state.
    PhotonDist(PhotonDistArgs),
    /// Drive the mode with a Gaussian classical current and compare against
    /// the closed-form displaced state.
    Drive(DriveArgs),
    /// Second-order correlation g²(0) of a standard source.
    G2(G2Args),
    /// Two-particle correlation scan C₂(q) with Monte Carlo errors.
    Hbt(HbtArgs),
    /// Geometric phase of a closed momentum loop via translation cocycles.
    BerryLoop(LoopArgs),
    /// Spin-1 holonomy matrix of a closed momentum loop.
    Holonomy(LoopArgs),
    /// Positive-energy wave-packet evolution and reconstruction.
    Wavepacket(WavepacketArgs),
    /// Photon distributions of the displaced vacuum and one-photon states at
    /// |z|² = 49.
    ReproduceFig1(Fig1Args),
    /// Split Gaussian packet densities at t = 0 and t = 10 for k₀a = 0.5.
    ReproduceFig2(Fig2Args),
}

#[derive(Args)]
struct PhotonDistArgs {
    #[arg(long)]
    z_re: Option<f64>,
    #[arg(long)]
    z_im: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args)]
struct DriveArgs {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    psi0_m: Option<usize>,
    #[arg(long)]
    drive_samples: Option<usize>,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Args)]
struct G2Args {
    /// fock | coherent | thermal
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    n: Option<i64>,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    sampled: Option<bool>,
    #[arg(long)]
    n_samples: Option<usize>,
}

#[derive(Args)]
struct HbtArgs {
    /// chaotic | coherent
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    q_max: Option<f64>,
    #[arg(long)]
    n_q: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
}

#[derive(Args)]
struct LoopArgs {
    /// octant | latitude
    #[arg(long = "loop")]
    loop_kind: Option<String>,
    #[arg(long)]
    theta_deg: Option<f64>,
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long)]
    two_lambda: Option<i32>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct WavepacketArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    peak_fraction: Option<f64>,
}

#[derive(Args)]
struct Fig1Args {
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args)]
struct Fig2Args {}

impl ExperimentCmd {
    fn kind(&self) -> CommandKind {
        match self {
            ExperimentCmd::PhotonDist(_) => CommandKind::PhotonDist,
            ExperimentCmd::Drive(_) => CommandKind::Drive,
            ExperimentCmd::G2(_) => CommandKind::G2,
            ExperimentCmd::Hbt(_) => CommandKind::Hbt,
            ExperimentCmd::BerryLoop(_) => CommandKind::BerryLoop,
            ExperimentCmd::Holonomy(_) => CommandKind::Holonomy,
            ExperimentCmd::Wavepacket(_) => CommandKind::Wavepacket,
            ExperimentCmd::ReproduceFig1(_) => CommandKind::ReproduceFig1,
            ExperimentCmd::ReproduceFig2(_) => CommandKind::ReproduceFig2,
        }
    }

    fn apply_flags(&self, cfg: &mut ExperimentConfig) {
        fn set<T: ToString>(cfg: &mut ExperimentConfig, key: &str, v: &Option<T>) {
            if let Some(v) = v {
                cfg.set(key, v.to_string());
            }
        }
        match self {
            ExperimentCmd::PhotonDist(a) => {
                set(cfg, "z_re", &a.z_re);
                set(cfg, "z_im", &a.z_im);
                set(cfg, "m", &a.m);
                set(cfg, "n_max", &a.n_max);
            }
            ExperimentCmd::Drive(a) => {
                set(cfg, "omega", &a.omega);
                set(cfg, "tau", &a.tau);
                set(cfg, "amplitude", &a.amplitude);
                set(cfg, "t_start", &a.t_start);
                set(cfg, "t_end", &a.t_end);
                set(cfg, "dim", &a.dim);
                set(cfg, "psi0_m", &a.psi0_m);
                set(cfg, "drive_samples", &a.drive_samples);
                set(cfg, "max_step", &a.max_step);
            }
            ExperimentCmd::G2(a) => {
                set(cfg, "source", &a.source);
                set(cfg, "n", &a.n);
                set(cfg, "mean", &a.mean);
                set(cfg, "n_max", &a.n_max);
                set(cfg, "sampled", &a.sampled);
                set(cfg, "n_samples", &a.n_samples);
            }
            ExperimentCmd::Hbt(a) => {
                set(cfg, "source", &a.source);
                set(cfg, "radius", &a.radius);
                set(cfg, "q_max", &a.q_max);
                set(cfg, "n_q", &a.n_q);
                set(cfg, "n_samples", &a.n_samples);
            }
            ExperimentCmd::BerryLoop(a) | ExperimentCmd::Holonomy(a) => {
                set(cfg, "loop", &a.loop_kind);
                set(cfg, "theta_deg", &a.theta_deg);
                set(cfg, "segments", &a.segments);
                set(cfg, "two_lambda", &a.two_lambda);
                set(cfg, "radius", &a.radius);
            }
            ExperimentCmd::Wavepacket(a) => {
                set(cfg, "a", &a.a);
                set(cfg, "k0", &a.k0);
                set(cfg, "t", &a.t);
                set(cfg, "n_points", &a.n_points);
                set(cfg, "x_min", &a.x_min);
                set(cfg, "x_max", &a.x_max);
                set(cfg, "peak_fraction", &a.peak_fraction);
            }
            ExperimentCmd::ReproduceFig1(a) => {
                set(cfg, "n_max", &a.n_max);
            }
            ExperimentCmd::ReproduceFig2(_) => {}
        }
    }
}

fn build_config(cli: &Cli, cmd: &ExperimentCmd) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(cmd.kind(), cli.out.clone(), cli.seed);
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cmd.apply_flags(&mut cfg);
    // explicit flags win over config-file values
    cfg.out_dir = cli.out.clone();
    cfg.seed = cli.seed;
    if let Some(path) = &cli.config {
        for (k, v) in photonkin_cli::config::parse_ini(path)? {
            if k == "out" && cli.out == PathBuf::from("out") {
                cfg.out_dir = PathBuf::from(v);
            } else if k == "seed" && cli.seed == 42 {
                cfg.seed = v.parse().map_err(|_| {
                    photonkin_cli::error::CliError::Config(format!("bad seed '{v}'"))
                })?;
            }
        }
    }
    Ok(cfg)
}

fn cap_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("PHOTONKIN_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    cap_threads();
    match &cli.command {
        TopCommand::Experiment(cmd) => {
            let cfg = build_config(&cli, cmd)?;
            let artifacts = photonkin_cli::execute(&cfg)?;
            for a in &artifacts {
                println!("{}", a.display());
            }
            Ok(true)
        }
        TopCommand::Run => {
            let Some(path) = &cli.config else {
                return Err(photonkin_cli::error::CliError::Config(
                    "run requires --config <file> with a 'command = ...' line".into(),
                ));
            };
            let Some(kind) = photonkin_cli::config::command_from_file(path)? else {
                return Err(photonkin_cli::error::CliError::Config(
                    "config file has no 'command = ...' line".into(),
                ));
            };
            let mut cfg = ExperimentConfig::new(kind, cli.out.clone(), cli.seed);
            cfg.apply_file(path)?;
            let artifacts = photonkin_cli::execute(&cfg)?;
            for a in &artifacts {
                println!("{}", a.display());
            }
            Ok(true)
        }
        TopCommand::Validate { target } => {
            let diags = match target {
                Some(cmd) => {
                    let cfg = build_config(&cli, cmd)?;
                    validate(&cfg)
                }
                None => {
                    let Some(path) = &cli.config else {
                        return Err(photonkin_cli::error::CliError::Config(
                            "validate needs a subcommand or --config with a command line".into(),
                        ));
                    };
                    let Some(kind) = photonkin_cli::config::command_from_file(path)? else {
                        return Err(photonkin_cli::error::CliError::Config(
                            "config file has no 'command = ...' line".into(),
                        ));
                    };
                    let mut cfg = ExperimentConfig::new(kind, cli.out.clone(), cli.seed);
                    cfg.apply_file(path)?;
                    validate(&cfg)
                }
            };
            println!("{}", serde_json::to_string_pretty(&diags).unwrap());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
