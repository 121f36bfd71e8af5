use std::io::Write;
use std::time::Instant;

use crate::bitkernels::add4_word;
use crate::engine::{audit_halos, InitMode, Simulation, SweepObserver};
use crate::error::{Error, Result};
use crate::lattice::{Color, LatticeDims, PackedArrays, PlainLattice};
use crate::reference::{audit_flip_codes, audit_neighbors, checkerboard_sweep, record_engine_randoms};
use crate::rng::GeneratorState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn pack_round_trip(seed: u64) -> CheckResult {
    let mut rng = GeneratorState::new(seed, 0);
    let mut lattices = 0;
    let mut bad = 0;
    for (m, n) in [(4, 32), (12, 96), (16, 64), (8, 128)] {
        let dims = LatticeDims::new(m, n).expect("valid dims");
        for _ in 0..25 {
            let lattice = PlainLattice::random(dims, &mut rng);
            let packed = PackedArrays::pack(&lattice);
            if packed.unpack() != lattice || packed.up_count() != lattice.up_count() as u64 {
                bad += 1;
            }
            lattices += 1;
        }
    }
    check("pack round trip", bad == 0, format!("{lattices} lattices, {bad} mismatches"))
}

fn adder_exhaustive() -> CheckResult {
    let mut bad = 0;
    for combo in 0u16..16 {
        let lane = |k: u16| if combo >> k & 1 == 1 { 0xFFFF } else { 0 };
        let (o, t, f) = add4_word(lane(0), lane(1), lane(2), lane(3));
        for p in 0..16 {
            let sum = (o >> p & 1) + 2 * (t >> p & 1) + 4 * (f >> p & 1);
            if sum != combo.count_ones() as u16 {
                bad += 1;
            }
        }
    }
    check("adder exhaustive", bad == 0, format!("16 input patterns x 16 lanes, {bad} wrong"))
}

fn neighbor_audit(seed: u64) -> Result<CheckResult> {
    let dims = LatticeDims::new(12, 96)?;
    let mut states = 0;
    let mut bad = 0;
    for k in 0..50 {
        let sim = Simulation::new(dims, 2.0, 1.0, seed, k, &InitMode::Random)?;
        bad += audit_neighbors(sim.arrays()).len();
        bad += audit_flip_codes(sim.arrays())?.len();
        states += 1;
    }
    Ok(check(
        "neighbor audit 12x96",
        bad == 0,
        format!("{states} states, {bad} discrepancies"),
    ))
}

struct HaloAudit {
    updates: usize,
    bad: usize,
}

impl SweepObserver for HaloAudit {
    fn after_boundary(&mut self, arrays: &PackedArrays, color: Color) {
        self.updates += 1;
        self.bad += audit_halos(arrays, color).len();
    }
}

fn halo_audit(seed: u64) -> Result<CheckResult> {
    let mut audit = HaloAudit { updates: 0, bad: 0 };
    for (m, n) in [(12, 96), (4, 32)] {
        let dims = LatticeDims::new(m, n)?;
        let mut sim = Simulation::new(dims, 2.2, 1.0, seed, 0, &InitMode::Random)?;
        audit.bad += audit_halos(sim.arrays(), Color::Red).len();
        audit.bad += audit_halos(sim.arrays(), Color::Blue).len();
        for _ in 0..50 {
            sim.sweep_observed(&mut audit);
        }
    }
    Ok(check(
        "halo audit",
        audit.bad == 0,
        format!("{} boundary updates on 12x96 and 4x32, {} discrepancies", audit.updates, audit.bad),
    ))
}

fn oracle_equivalence(seed: u64, inject_fault: bool) -> Result<CheckResult> {
    let sweeps = 100;
    let mut mismatched = 0;
    let mut detail = Vec::new();
    for (m, n) in [(12, 96), (4, 32)] {
        let dims = LatticeDims::new(m, n)?;
        let mut sim = Simulation::new(dims, 2.0, 1.0, seed, 0, &InitMode::Random)?;
        if inject_fault {
            sim.inject_fault();
        }
        let mut lattice = sim.lattice();
        let randoms = record_engine_randoms(&mut sim, sweeps);
        for sweep in 0..sweeps {
            checkerboard_sweep(&mut lattice, 2.0, 1.0, &randoms, sweep)?;
        }
        let engine = sim.lattice();
        let diff = (0..dims.spins()).filter(|&i| engine.get(i) != lattice.get(i)).count();
        mismatched += diff;
        detail.push(format!("{dims}: {diff} spins differ"));
    }
    Ok(check(
        "oracle equivalence, 100 sweeps",
        mismatched == 0,
        detail.join(", "),
    ))
}

/// Run the fast invariant suite and print one line per check.
pub fn selftest(seed: u64, inject_fault: bool, out: &mut dyn Write) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let results = vec![
        pack_round_trip(seed),
        adder_exhaustive(),
        neighbor_audit(seed)?,
        halo_audit(seed)?,
        oracle_equivalence(seed, inject_fault)?,
    ];
    let io = |source| Error::Io {
        path: "<report>".into(),
        source,
    };
    for r in &results {
        writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail).map_err(io)?;
    }
    let passed = results.iter().all(|r| r.passed);
    writeln!(out, "selftest {}", if passed { "passed" } else { "FAILED" }).map_err(io)?;
    // timing stays off the report so reruns compare equal
    eprintln!("selftest took {:.1} s", start.elapsed().as_secs_f64());
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes_and_fault_is_caught() {
        let mut out = Vec::new();
        let results = selftest(7, false, &mut out).unwrap();
        assert!(results.iter().all(|r| r.passed), "{}", String::from_utf8_lossy(&out));
        let results = selftest(7, true, &mut Vec::new()).unwrap();
        let eq = results.iter().find(|r| r.name.starts_with("oracle")).unwrap();
        assert!(!eq.passed);
    }
}
