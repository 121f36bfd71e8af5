//! Find where a quench from a random state settles down.

use ising_multispin::observables::detect_equilibration;
use ising_multispin::{InitMode, LatticeDims, Simulation};

fn main() -> ising_multispin::Result<()> {
    let dims = LatticeDims::new(32, 32)?;
    let mut sim = Simulation::new(dims, 1.8, 1.0, 5, 0, &InitMode::Random)?;
    let mut series = Vec::new();
    for _ in 0..600 {
        sim.sweeps(5);
        series.push(sim.energy() / dims.spins() as f64);
    }
    let eq = detect_equilibration(&series)?;
    println!(
        "{} samples: drop the first {}, g = {:.2}, {:.1} independent samples",
        series.len(),
        eq.t0,
        eq.g,
        eq.n_eff
    );
    let tail = &series[eq.t0..];
    println!("mean energy per spin {:.4}", tail.iter().sum::<f64>() / tail.len() as f64);
    Ok(())
}
