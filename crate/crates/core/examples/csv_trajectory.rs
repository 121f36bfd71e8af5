//! Several replicas at a few temperatures, written as CSV to stdout.

use std::io::stdout;

use ising_multispin::cli::write_csv;
use ising_multispin::engine::{run, RunConfig};
use ising_multispin::{InitMode, LatticeDims};

fn main() -> ising_multispin::Result<()> {
    let config = RunConfig {
        dims: LatticeDims::new(16, 64)?,
        temperatures: vec![1.8, 1.8, 2.6, 2.6],
        j: 1.0,
        seed: 2,
        init: InitMode::Random,
        sweeps: 200,
        measure_interval: 50,
        threads: 0,
    };
    let result = run(&config)?;
    write_csv(&mut stdout().lock(), &result.trajectory).expect("stdout");
    eprintln!("{} attempts, {} flips", result.attempts, result.flips);
    Ok(())
}
