//! The `ising` command line.

mod commands;
pub mod config;
pub mod format;
mod rngtest;
mod selftest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;

pub use commands::{bench, simulate, validate, BenchReport, ScalingRow, ValidateReport, ValidateRow};
pub use config::{temperature_range, RawConfig, SimConfig};
pub use format::{format_g, g9, write_csv, CSV_HEADER};
pub use rngtest::{read_bit_file, rngtest, RngSource, RngTestOptions, ROWS_HEADER};
pub use selftest::{selftest, CheckResult};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "ISING_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ising",
    version,
    about = "Multi-spin coded 2D Ising Monte Carlo",
    after_help = "Configuration files hold `key = value` lines with `#` comments. \
                  Every key has a flag of the same name (`measure_interval` or \
                  `--measure-interval`); flags win over the file.\n\n\
                  Environment:\n  ISING_THREADS  worker threads (0 = one per core, 1 = no pool); \
                  overrides the config file, overridden by --threads"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run simulations and write the measurement trajectory as CSV.
    Simulate(ConfigArgs),
    /// Compare post-equilibration <|M|> with the exact curve and locate Tc.
    Validate(ConfigArgs),
    /// Measure flips per nanosecond and the sweep period.
    Bench(ConfigArgs),
    /// Run the randomness battery on the internal generator or a file.
    Rngtest(RngArgs),
    /// Fast internal consistency checks.
    Selftest(SelftestArgs),
}

/// `measure_interval` is also accepted as a flag spelling of `--measure-interval`.
fn underscore_alias(key: &'static str) -> Option<&'static str> {
    key.contains('_').then_some(key)
}

macro_rules! config_args {
    ($( $(#[$doc:meta])* $field:ident ),* $(,)?) => {
        #[derive(Debug, Clone, Default, Args)]
        pub struct ConfigArgs {
            /// Configuration file.
            #[arg(long)]
            pub config: Option<PathBuf>,
            $(
                $(#[$doc])*
                #[arg(long, alias = underscore_alias(stringify!($field)), value_name = "VALUE")]
                pub $field: Option<String>,
            )*
            /// Worker threads, 0 for one per core.
            #[arg(long, env = "ISING_THREADS", value_name = "VALUE")]
            pub threads: Option<String>,
        }

        impl ConfigArgs {
            fn flags(&self) -> Vec<(&'static str, &String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push((stringify!($field), v));
                    }
                )*
                if let Some(v) = &self.threads {
                    out.push(("threads", v));
                }
                out
            }
        }
    };
}

config_args!(
    /// Lattice extent along the cell axis (multiple of 4).
    m,
    /// Lattice extent along the memory axis (multiple of 32).
    n,
    /// Comma-separated temperature list.
    temperatures,
    /// Range start (with t_stop and t_step).
    t_start,
    /// Range end, inclusive.
    t_stop,
    /// Range step.
    t_step,
    /// Coupling constant.
    j,
    /// Sweeps per simulation.
    sweeps,
    /// Sweeps between measurements.
    measure_interval,
    /// Replicas per temperature.
    n_sim,
    /// Master seed.
    seed,
    /// Initial state: random, up, down or checkerboard.
    init,
    /// Output path; stdout when absent or `-`.
    output,
    /// validate: allowed |<|M|> - exact| below the critical window.
    tolerance,
    /// validate: half-width of the ungraded window around Tc.
    critical_window,
    /// validate: largest <|M|> accepted above the window.
    above_tc_limit,
    /// bench: untimed sweeps before timing.
    warmup,
);

impl ConfigArgs {
    /// File values first, then flags on top.
    pub fn resolve(&self) -> Result<SimConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        for (key, value) in self.flags() {
            raw.set_flag(key, value.clone());
        }
        raw.resolve()
    }
}

#[derive(Debug, Clone, Args)]
pub struct RngArgs {
    /// Bits to test from the internal generator.
    #[arg(long, default_value_t = 6_400_000)]
    pub bits: usize,
    /// Test this file instead: ASCII 0/1 text, or raw bytes read MSB first.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Shaped floats for the frequency histograms.
    #[arg(long, default_value_t = 1_000_000)]
    pub floats: usize,
    /// Floats thresholded at their median for a second battery run.
    #[arg(long, default_value_t = 1 << 23)]
    pub median_floats: usize,
    /// Also write one CSV row per check to this file.
    #[arg(long, value_name = "PATH")]
    pub rows: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Run a parsed command, writing its report to `out`. Returns whether all
/// checks passed.
pub fn execute(command: &Command, out: &mut dyn Write) -> Result<bool> {
    match command {
        Command::Simulate(args) => simulate(&args.resolve()?, out).map(|_| true),
        Command::Validate(args) => validate(&args.resolve()?, out).map(|r| r.passed),
        Command::Bench(args) => bench(&args.resolve()?, out).map(|r| r.passed),
        Command::Rngtest(args) => {
            let source = match &args.file {
                Some(p) => RngSource::File(p.clone()),
                None => RngSource::Internal { seed: args.seed },
            };
            let options = RngTestOptions {
                bits: args.bits,
                floats: args.floats,
                median_floats: args.median_floats,
                rows: args.rows.clone(),
            };
            rngtest(&source, &options, out)
        }
        Command::Selftest(args) => {
            let results = selftest(args.seed, args.inject_fault, out)?;
            Ok(results.iter().all(|r| r.passed))
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli.command, &mut out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn every_key_has_a_flag() {
        use clap::CommandFactory;
        let cmd = Cli::command();
        let sim = cmd.find_subcommand("simulate").unwrap();
        for key in config::KEYS {
            let long = key.replace('_', "-");
            assert!(
                sim.get_arguments().any(|a| a.get_long() == Some(long.as_str())),
                "no flag for {key}"
            );
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "m = 12\nn = 96\nsweeps = 50\nseed = 3\n").unwrap();
        let cli = Cli::try_parse_from([
            "ising",
            "simulate",
            "--config",
            path.to_str().unwrap(),
            "--sweeps",
            "20",
            "--measure_interval",
            "4",
        ])
        .unwrap();
        let Command::Simulate(args) = cli.command else {
            panic!("wrong command")
        };
        let c = args.resolve().unwrap();
        assert_eq!((c.sweeps, c.measure_interval, c.seed, c.dims.m()), (20, 4, 3, 12));
    }
}
