//! Frequency tests on the generator's bits and shaped floats.

use ising_multispin::rng::{
    frequency_histogram, generator_bits, median_threshold_bits, run_battery, unit_floats,
};
use ising_multispin::GeneratorState;

fn main() -> ising_multispin::Result<()> {
    let bits = generator_bits(&mut GeneratorState::new(1, 0), 1_000_000);
    for report in run_battery(&bits)? {
        println!("{report}");
    }

    let floats = unit_floats(&mut GeneratorState::new(1, 1), 1_000_000);
    for width in [0.01, 0.1] {
        let h = frequency_histogram(&floats, width)?;
        println!("bin {width}: spread {:.2}%", 100.0 * h.spread);
    }

    // bits from floats compared with their median
    let bits = median_threshold_bits(&floats)?;
    let failed = run_battery(&bits)?.into_iter().filter(|r| !r.passed).count();
    println!("median-thresholded floats: {failed} failures");
    Ok(())
}
