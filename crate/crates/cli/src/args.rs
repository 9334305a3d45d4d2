//! Command-line parsing and dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use scopt::channel::{Detector, DEFAULT_CHUNK_SIZE, NOISE_VARIANCE};

use crate::analytic::cmd_analytic;
use crate::compare::cmd_compare;
use crate::error::{CliError, Result};
use crate::grid::SnrGrid;
use crate::info::info;
use crate::simulate::cmd_simulate;
use crate::sweep::{Family, Format, SweepSpec};
use crate::verify::{cmd_verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(
    name = "scopt",
    version,
    about = "Permutation constellation laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parameter table for one constellation.
    Info(InfoArgs),
    /// Closed-form error probabilities and energy losses over an SNR grid.
    Analytic(SweepArgs),
    /// Monte Carlo error rates over an SNR grid.
    Simulate(SweepArgs),
    /// Sphere-packing vs permutation curves plus a gnuplot script.
    Compare(CompareArgs),
    /// Runs every cross-check; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub q: usize,
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "scopt")]
    pub family: Family,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    /// Spectral efficiency; for scopt it selects K = 2^((rf-2)/2).
    #[arg(long)]
    pub rf: Option<f64>,
    /// Signal duration; for scopt an alternative to --q.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long = "snr-db", default_value = "-10:30:0.25")]
    pub snr_db: SnrGrid,
    /// Comma-separated error targets for the energy-loss table.
    #[arg(long, value_delimiter = ',')]
    pub pdem: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "threshold")]
    pub detector: Detector,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long = "chunk-size", default_value_t = DEFAULT_CHUNK_SIZE)]
    pub chunk_size: u64,
    /// Output file; sibling files share its stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "snr-db", default_value = "-10:30:0.25")]
    pub snr_db: SnrGrid,
    /// Output directory.
    #[arg(long, default_value = "compare")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "inject-noise-variance", hide = true)]
    pub inject_noise_variance: Option<f64>,
}

impl SweepArgs {
    pub fn into_spec(self, default_out: &str) -> SweepSpec {
        let out = self
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{default_out}.{}", self.format.extension())));
        SweepSpec {
            family: self.family,
            k: self.k,
            q: self.q,
            rf: self.rf,
            n: self.n,
            grid: self.snr_db,
            pdem: self.pdem,
            trials: self.trials,
            seed: self.seed,
            detector: self.detector,
            workers: self.workers,
            chunk_size: self.chunk_size,
            noise_variance: NOISE_VARIANCE,
            out,
            format: self.format,
        }
    }
}

fn print_files(files: &[PathBuf], manifest: &Path) {
    for f in files {
        println!("wrote {}", f.display());
    }
    println!("wrote {}", manifest.display());
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Info(a) => {
            print!("{}", info(a.k, a.q)?.render(a.format));
        }
        Command::Analytic(a) => {
            let out = cmd_analytic(&a.into_spec("analytic"))?;
            print_files(&out.files, &out.manifest);
        }
        Command::Simulate(a) => {
            let out = cmd_simulate(&a.into_spec("simulate"))?;
            print_files(&out.files, &out.manifest);
        }
        Command::Compare(a) => {
            let out = cmd_compare(&a.out, &a.snr_db)?;
            for s in &out.summaries {
                let crossing = s
                    .crossing_db
                    .map_or_else(|| "none".to_string(), |c| format!("{c} dB"));
                println!(
                    "{}: limit {:.2} dB, crosses 1e-3 at {crossing}",
                    s.curve, s.rho_s0_db
                );
            }
            print_files(&out.files, &out.manifest);
        }
        Command::Verify(a) => {
            let opts = VerifyOptions {
                noise_variance: a.inject_noise_variance.unwrap_or(NOISE_VARIANCE),
                mc_trials: a.trials,
                seed: a.seed,
                workers: a.workers,
            };
            let report = cmd_verify(&opts)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            if let Some(path) = &a.out {
                std::fs::write(path, &json).map_err(|e| CliError::io(path, e))?;
            }
            print!("{json}");
            let failed: Vec<_> = report.failures().map(|c| c.name).collect();
            if !failed.is_empty() {
                return Err(CliError::Check(failed.join(", ")));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
