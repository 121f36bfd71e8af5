//! Mean |M| against the exact spontaneous magnetization.
//!
//! `cargo run --release --example onsager`

use ising_multispin::engine::{run, RunConfig};
use ising_multispin::observables::summarize;
use ising_multispin::{InitMode, LatticeDims};

fn main() -> ising_multispin::Result<()> {
    let temperatures = vec![1.5, 1.8, 2.0, 2.1, 3.0, 4.0];
    let config = RunConfig {
        dims: LatticeDims::new(64, 64)?,
        temperatures: temperatures.clone(),
        j: 1.0,
        seed: 7,
        init: InitMode::AllUp,
        sweeps: 5000,
        measure_interval: 10,
        threads: 0,
    };
    let result = run(&config)?;
    println!("{:>5} {:>9} {:>9} {:>9} {:>7}", "T", "<|M|>", "err", "exact", "n_eff");
    for t in temperatures {
        let s = summarize(&result.trajectory, t)?;
        println!(
            "{t:>5} {:>9.5} {:>9.5} {:>9.5} {:>7.1}",
            s.mean, s.std_error, s.onsager, s.n_eff
        );
    }
    Ok(())
}
