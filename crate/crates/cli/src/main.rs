use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use invq::harness::{self, ExperimentConfig, ExperimentKind, Report};
use invq::oracle_sim::QueryCircuit;
use invq::par::{self, Exec};

/// Forward-only vs inverse-access query experiments.
#[derive(Parser)]
#[command(name = "invq", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Biased Fourier transform and phase-mean checks.
    VerifyLemmas(Common),
    /// Advantage of forward-only and inverse-using circuit families.
    Separation(Common),
    /// Success rates of the distinguishers.
    Endtoend(Common),
    /// Normalized-trace concentration tables.
    Concentration(Common),
    /// Advantage of a single circuit file.
    CircuitRun {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults to the built-in grid.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (also INVQ_OUT). Without it the table goes to stdout.
    #[arg(long, env = "INVQ_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (also INVQ_JOBS); 1 runs sequentially.
    #[arg(long, env = "INVQ_JOBS")]
    jobs: Option<usize>,
    /// Histogram key cap.
    #[arg(long)]
    cap: Option<usize>,
}

impl Common {
    fn config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default_for(kind),
        };
        if cfg.kind != kind && kind != ExperimentKind::CircuitRun {
            bail!("config is for {}, not {}", cfg.kind.name(), kind.name());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.cap {
            cfg.cap = c;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn exec(&self) -> Exec {
        match self.jobs {
            Some(1) => Exec::Sequential,
            Some(n) => {
                par::set_threads(n);
                Exec::Parallel
            }
            None => Exec::Parallel,
        }
    }
}

fn emit(report: &Report) -> Result<()> {
    match &report.config.output {
        Some(dir) => {
            for p in report.write(dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", report.to_csv()?),
    }
    for row in report.failures() {
        eprintln!(
            "FAIL {} q={:?} d={:?} n={:?} eps={:?}: measured {} vs bound {:?} ({:?})",
            row.check, row.q, row.d, row.n, row.eps, row.measured, row.bound, row.relation
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let report = match &cli.cmd {
        Cmd::VerifyLemmas(c) => harness::cmd_verify_lemmas(&c.config(ExperimentKind::VerifyLemmas)?, c.exec())?,
        Cmd::Separation(c) => harness::cmd_separation(&c.config(ExperimentKind::Separation)?, c.exec())?,
        Cmd::Endtoend(c) => harness::cmd_endtoend(&c.config(ExperimentKind::Endtoend)?, c.exec())?,
        Cmd::Concentration(c) => harness::cmd_concentration(&c.config(ExperimentKind::Concentration)?, c.exec())?,
        Cmd::CircuitRun { file, common } => {
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let circuit = QueryCircuit::from_text(&text)?;
            harness::circuit_run(&circuit, &common.config(ExperimentKind::CircuitRun)?, common.exec())?
        }
    };
    emit(&report)?;
    Ok(report.passed())
}
