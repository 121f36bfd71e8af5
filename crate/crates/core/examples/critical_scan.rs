//! Locate Tc from where <|M|> falls through 0.5.

use ising_multispin::cli::temperature_range;
use ising_multispin::engine::{run, RunConfig};
use ising_multispin::observables::{crossing, summarize};
use ising_multispin::{InitMode, LatticeDims, CRITICAL_TEMPERATURE};

fn main() -> ising_multispin::Result<()> {
    let temperatures = temperature_range(2.0, 2.6, 0.05)?;
    let config = RunConfig {
        dims: LatticeDims::new(64, 64)?,
        temperatures: temperatures.clone(),
        j: 1.0,
        seed: 11,
        init: InitMode::AllUp,
        sweeps: 4000,
        measure_interval: 20,
        threads: 0,
    };
    let result = run(&config)?;
    let mut curve = Vec::new();
    for t in temperatures {
        let mean = summarize(&result.trajectory, t)?.mean;
        println!("T = {t:.2}  <|M|> = {mean:.4}");
        curve.push((t, mean));
    }
    match crossing(&curve, 0.5) {
        Some(tc) => println!("crossing at {tc:.4}, exact {CRITICAL_TEMPERATURE:.4}"),
        None => println!("no crossing in range"),
    }
    Ok(())
}
