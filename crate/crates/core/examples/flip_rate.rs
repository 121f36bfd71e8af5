//! Flip attempts per nanosecond on this machine, for 1 to 8 simulations.
//!
//! `cargo run --release --example flip_rate`

use std::time::Instant;

use ising_multispin::{Ensemble, InitMode, LatticeDims};

fn main() -> ising_multispin::Result<()> {
    let dims = LatticeDims::new(256, 256)?;
    let sweeps = 200;
    for sims in [1, 2, 4, 8] {
        let mut ensemble = Ensemble::new(dims, &vec![2.3; sims], 1.0, 1, &InitMode::Random)?;
        ensemble.sweeps(10);
        let start = Instant::now();
        ensemble.sweeps(sweeps);
        let ns = start.elapsed().as_secs_f64() * 1e9;
        let attempts = (dims.spins() * sims) as f64 * sweeps as f64;
        println!(
            "{sims} x {dims}: {:.4} flips/ns, {:.3} ms per sweep, {} attempts counted",
            attempts / ns,
            ns / 1e6 / sweeps as f64,
            ensemble.attempts()
        );
    }
    Ok(())
}
