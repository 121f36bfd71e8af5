//! Replay the engine's random numbers through a plain checkerboard sweep and
//! compare the two lattices spin for spin.

use ising_multispin::reference::{checkerboard_sweep, record_engine_randoms};
use ising_multispin::{InitMode, LatticeDims, Simulation};

fn main() -> ising_multispin::Result<()> {
    let dims = LatticeDims::new(12, 96)?;
    let (t, j, sweeps) = (2.0, 1.0, 500);
    let mut sim = Simulation::new(dims, t, j, 42, 0, &InitMode::Random)?;
    let mut plain = sim.lattice();

    let randoms = record_engine_randoms(&mut sim, sweeps);
    let mut flips = 0;
    for sweep in 0..sweeps {
        flips += checkerboard_sweep(&mut plain, t, j, &randoms, sweep)?;
    }

    let engine = sim.lattice();
    let differ = (0..dims.spins()).filter(|&i| engine.get(i) != plain.get(i)).count();
    println!("{} random numbers replayed over {sweeps} sweeps", randoms.len());
    println!("flips: engine {}, plain {flips}", sim.flips());
    println!("spins that differ: {differ}");
    Ok(())
}
