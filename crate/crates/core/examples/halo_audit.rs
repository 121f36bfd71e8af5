//! Watch every boundary update and check each halo word against its source.

use ising_multispin::engine::{audit_halos, SweepObserver};
use ising_multispin::{Color, InitMode, LatticeDims, PackedArrays, Simulation};

#[derive(Default)]
struct Audit {
    updates: usize,
    mismatches: usize,
}

impl SweepObserver for Audit {
    fn after_boundary(&mut self, arrays: &PackedArrays, color: Color) {
        self.updates += 1;
        self.mismatches += audit_halos(arrays, color).len();
    }
}

fn main() -> ising_multispin::Result<()> {
    let dims = LatticeDims::new(12, 96)?;
    let mut sim = Simulation::new(dims, 2.27, 1.0, 3, 0, &InitMode::Random)?;
    let mut audit = Audit::default();
    for _ in 0..200 {
        sim.sweep_observed(&mut audit);
    }
    println!(
        "{} boundary updates on {dims}, {} halo words disagree with their source",
        audit.updates, audit.mismatches
    );
    Ok(())
}
