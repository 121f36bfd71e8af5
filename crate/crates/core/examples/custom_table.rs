//! Swap the acceptance table: a constant one turns the sweep into a coin flip.

use ising_multispin::{ExpTable, InitMode, LatticeDims, Simulation};

fn main() -> ising_multispin::Result<()> {
    let dims = LatticeDims::new(16, 64)?;
    let mut sim = Simulation::new(dims, 2.0, 1.0, 8, 0, &InitMode::AllUp)?;
    println!("acceptance table at T = 2: {:?}", sim.table().entries());
    sim.set_table(ExpTable::constant(0.5));
    sim.sweeps(100);
    println!(
        "after 100 sweeps at p = 0.5: {:.3} of attempts flipped, M = {:.3}",
        sim.flips() as f64 / sim.attempts() as f64,
        sim.magnetization()
    );
    Ok(())
}
