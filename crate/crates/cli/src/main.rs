//! `spa`: grow spatial preferential attachment graphs and measure their
//! clustering and degree statistics.
//!
//! Exit status: 0 on success, 1 on a domain or usage error, 2 on an I/O or
//! file-format error, 3 when `verify` finds a disagreement. The worker pool
//! width is read from `SPA_THREADS`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use spa_core::config::RunConfig;
use spa_core::SpaError;

#[derive(Parser, Debug)]
#[command(name = "spa", version, about = "Spatial preferential attachment graphs: generation and clustering statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grow one graph file per replica and write a manifest.
    Generate {
        #[command(flatten)]
        run: RunArgs,
        /// Gzip the graph files.
        #[arg(long)]
        gz: bool,
    },
    /// Clustering curves, degree census, exponent fit, trajectory checks and scatter for graph files.
    Stats {
        /// Graph files; several files are also pooled.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Smallest degree in the exponent fit.
        #[arg(long, default_value_t = 10)]
        d_min: u32,
    },
    /// Clustering curves across link probabilities with A2 = 10(1-p)/p.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated link probabilities.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
        ps: Vec<f64>,
    },
    /// Compare indexed and naive generation, and clustering against brute force.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Largest accepted n.
        #[arg(long, default_value_t = spa_core::verify::VERIFY_GUARD)]
        guard: usize,
    },
    /// Degree trajectories against k(t/n)^{pA1}.
    Trajectory {
        file: PathBuf,
        /// 1-based vertex ids; all recorded vertices when omitted.
        #[arg(long = "vertex", value_delimiter = ',')]
        vertices: Vec<usize>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Per-vertex (degree, clustering) pairs.
    Scatter {
        file: PathBuf,
        /// directed, undirected, old, new or all.
        #[arg(long, default_value = "all")]
        variant: String,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
}

/// Flags mirroring the run configuration; they override `--config`.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    a1: Option<String>,
    #[arg(long)]
    a2: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// l2 or linf.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    /// Comma-separated replica seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// log or half.
    #[arg(long)]
    split: Option<String>,
    /// loglog, logloglog or a positive number.
    #[arg(long)]
    omega_mode: Option<String>,
    /// Trajectory recording: none, all or top:K.
    #[arg(long)]
    track: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("p", &self.p),
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("n", &self.n),
            ("dimension", &self.dim),
            ("norm", &self.norm),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("replicas", &self.replicas),
            ("delta", &self.delta),
            ("omega", &self.omega_mode),
            ("split", &self.split),
            ("tracking", &self.track),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        if let (Some(seeds), None) = (&config.seeds, &self.replicas) {
            if self.seeds.is_some() {
                config.replicas = seeds.len();
            }
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

/// Analysis options for commands that read graph files.
#[derive(Args, Debug)]
struct AnalysisArgs {
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// log or half.
    #[arg(long, default_value = "half")]
    split: String,
    /// loglog, logloglog or a positive number.
    #[arg(long, default_value = "loglog")]
    omega_mode: String,
    /// Output directory; standard output when omitted (trajectory and scatter only).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Raised by `verify` when the oracles disagree.
#[derive(Debug)]
struct VerificationFailed(usize);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed for {} run(s)", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 3;
    }
    match err.downcast_ref::<SpaError>() {
        Some(SpaError::Io(_)) | Some(SpaError::Parse { .. }) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(width) = std::env::var("SPA_THREADS") {
        let width: usize = width
            .parse()
            .map_err(|_| SpaError::Usage(format!("SPA_THREADS must be a positive integer, got `{width}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(width).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Generate { run, gz } => commands::generate(&run.resolve()?, gz),
        Command::Stats { files, analysis, d_min } => commands::stats(&files, &analysis.options()?, d_min),
        Command::Sweep { run, ps } => commands::sweep(&run.resolve()?, &ps),
        Command::Verify { mut run, guard } => {
            if run.n.is_none() && run.config.is_none() {
                run.n = Some("2000".into());
            }
            commands::verify(&run.resolve()?, guard)
        }
        Command::Trajectory { file, vertices, analysis } => commands::trajectory(&file, &vertices, &analysis.options()?),
        Command::Scatter { file, variant, analysis } => commands::scatter(&file, &variant, &analysis.options()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

impl AnalysisArgs {
    fn options(&self) -> Result<commands::Options> {
        spa_core::clustering::check_delta(self.delta)?;
        let omega = self.omega_mode.parse()?;
        Ok(commands::Options {
            delta: self.delta,
            split: spa_core::SplitPolicy::parse(&self.split, omega)?,
            omega,
            out: self.out.clone(),
        })
    }
}
