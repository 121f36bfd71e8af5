//! Plain one-spin-at-a-time reference implementation.
//!
//! Works directly on a [`PlainLattice`] with periodic wrap and no bit tricks.
//! Fed the same random numbers as the engine, it must produce the same
//! lattice bit for bit.

use std::collections::HashMap;

use crate::bitkernels::{bitwise_add4, nibble_compact};
use crate::engine::{get_neighbors, quarters, Draw, Phase, Simulation, SweepObserver};
use crate::error::{Error, Result};
use crate::lattice::{
    unclassify, Color, Direction, LatticeDims, PackedArrays, PlainLattice, SpinCoord,
    SPINS_PER_WORD,
};

/// Random numbers keyed by `(sweep, phase, spin index)`.
#[derive(Debug, Clone, Default)]
pub struct RandomMap {
    values: HashMap<(u64, Phase, usize), f32>,
}

impl RandomMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sweep: u64, phase: Phase, idx: usize, value: f32) {
        self.values.insert((sweep, phase, idx), value);
    }

    pub fn get(&self, sweep: u64, phase: Phase, idx: usize) -> Result<f32> {
        self.values
            .get(&(sweep, phase, idx))
            .copied()
            .ok_or(Error::MissingRandom {
                sweep,
                phase: phase.name(),
                index: idx,
            })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Observer that files each engine draw under the spin it decided.
pub struct RandomRecorder {
    dims: LatticeDims,
    pub map: RandomMap,
    pub draws: u64,
}

impl RandomRecorder {
    pub fn new(dims: LatticeDims) -> Self {
        Self {
            dims,
            map: RandomMap::new(),
            draws: 0,
        }
    }
}

impl SweepObserver for RandomRecorder {
    fn on_draw(&mut self, d: Draw) {
        let coord = SpinCoord {
            code: d.code,
            cell: d.cell,
            word: d.word,
            bit: d.bit,
        };
        let idx = unclassify(coord, self.dims).expect("engine draws only for interior spins");
        self.map.insert(d.sweep, d.phase, idx, d.value);
        self.draws += 1;
    }
}

/// Run `sweeps` observed sweeps on `sim` and return every draw it made.
pub fn record_engine_randoms(sim: &mut Simulation, sweeps: u64) -> RandomMap {
    let mut recorder = RandomRecorder::new(sim.dims());
    for _ in 0..sweeps {
        sim.sweep_observed(&mut recorder);
    }
    recorder.map
}

/// Lattice indices of the four neighbors of `idx`, in the order
/// `c + 1`, `c - 1`, `r + 1`, `r - 1`, all periodic.
pub fn neighbor_indices(dims: LatticeDims, idx: usize) -> [usize; 4] {
    let (m, n) = (dims.m(), dims.n());
    let (c, r) = (idx / n, idx % n);
    [
        ((c + 1) % m) * n + r,
        ((c + m - 1) % m) * n + r,
        c * n + (r + 1) % n,
        c * n + (r + n - 1) % n,
    ]
}

/// Number of up neighbors of `idx`.
pub fn neighbor_up_count(lattice: &PlainLattice, idx: usize) -> u32 {
    neighbor_indices(lattice.dims(), idx)
        .iter()
        .filter(|&&k| lattice.get(k) == 1)
        .count() as u32
}

/// Sum of the four neighbor spins of `idx`, in `[-4, 4]`.
pub fn neighbor_sum(lattice: &PlainLattice, idx: usize) -> Result<i32> {
    let dims = lattice.dims();
    if idx >= dims.spins() {
        return Err(Error::OutOfRange {
            what: "spin index",
            value: idx,
            bound: dims.spins(),
        });
    }
    Ok(neighbor_indices(dims, idx)
        .iter()
        .map(|&k| i32::from(lattice.get(k)))
        .sum())
}

/// Acceptance probability for flipping a spin with `n_up` up neighbors,
/// rounded to `f32` exactly as the engine's table is.
pub fn acceptance(temperature: f64, j: f64, spin: i8, n_up: u32) -> f32 {
    let sigma = f64::from(spin);
    let sum = f64::from(2 * n_up as i32 - 4);
    (-(2.0 * j * sigma * sum) / temperature).exp().min(1.0) as f32
}

/// One sequential Metropolis sweep in ascending index order, each site
/// seeing the updates already made before it. `draw` supplies one uniform
/// number per site. Returns the number of accepted flips.
pub fn single_spin_sweep(
    lattice: &mut PlainLattice,
    temperature: f64,
    j: f64,
    mut draw: impl FnMut() -> f32,
) -> u64 {
    let mut flips = 0;
    for idx in 0..lattice.dims().spins() {
        let p = acceptance(temperature, j, lattice.get(idx), neighbor_up_count(lattice, idx));
        if draw() < p {
            lattice.flip(idx);
            flips += 1;
        }
    }
    flips
}

/// One checkerboard Metropolis sweep: red sites in ascending index order,
/// then blue sites. Returns the number of accepted flips.
pub fn checkerboard_sweep(
    lattice: &mut PlainLattice,
    temperature: f64,
    j: f64,
    randoms: &RandomMap,
    sweep: u64,
) -> Result<u64> {
    let dims = lattice.dims();
    let n = dims.n();
    let mut flips = 0;
    for phase in [Phase::Red, Phase::Blue] {
        for idx in 0..dims.spins() {
            if Color::of_site(idx / n, idx % n) != phase.color() {
                continue;
            }
            let spin = lattice.get(idx);
            let p = acceptance(temperature, j, spin, neighbor_up_count(lattice, idx));
            if randoms.get(sweep, phase, idx)? < p {
                lattice.flip(idx);
                flips += 1;
            }
        }
    }
    Ok(flips)
}

/// `sum s_i s_j` over bonds, each bond counted once via its `+1` neighbors.
pub fn bond_sum(lattice: &PlainLattice) -> i64 {
    let dims = lattice.dims();
    (0..dims.spins())
        .map(|idx| {
            let [right, _, up, _] = neighbor_indices(dims, idx);
            let s = i64::from(lattice.get(idx));
            s * i64::from(lattice.get(right)) + s * i64::from(lattice.get(up))
        })
        .sum()
}

pub fn energy(lattice: &PlainLattice, j: f64) -> f64 {
    -j * bond_sum(lattice) as f64
}

pub fn magnetization(lattice: &PlainLattice) -> f64 {
    let total: i64 = lattice.spins().iter().map(|&s| i64::from(s)).sum();
    total as f64 / lattice.dims().spins() as f64
}

/// A neighbor word bit that disagrees with the plain lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborMismatch {
    pub idx: usize,
    pub which: &'static str,
    pub found: i8,
    pub expected: i8,
}

/// Check the four neighbor vectors of every quarter, cell and bit against
/// the unpacked lattice. Lateral neighbors are named in the array's own fold
/// frame: "right" is column `c + 1` for forward arrays and `c - 1` for
/// backward ones. Boundaries of both colors must be current.
pub fn audit_neighbors(arrays: &PackedArrays) -> Vec<NeighborMismatch> {
    let dims = arrays.dims();
    let lattice = arrays.unpack();
    let mut bad = Vec::new();
    for color in [Color::Red, Color::Blue] {
        for quarter in quarters(color) {
            for cell in 1..=dims.cells() {
                let found = get_neighbors(arrays, quarter, cell);
                for word in 1..=dims.words() {
                    for bit in 0..SPINS_PER_WORD as u32 {
                        let coord = SpinCoord {
                            code: quarter.target,
                            cell,
                            word,
                            bit,
                        };
                        let idx = unclassify(coord, dims).expect("interior coordinate");
                        let [cp, cm, rp, rm] = neighbor_indices(dims, idx);
                        let (right, left) = match quarter.target.direction {
                            Direction::Forward => (cp, cm),
                            Direction::Backward => (cm, cp),
                        };
                        let names = ["right", "left", "top", "bottom"];
                        for (k, expected_idx) in [right, left, rp, rm].into_iter().enumerate() {
                            let got = if found[k][word - 1] >> bit & 1 == 1 { 1 } else { -1 };
                            let expected = lattice.get(expected_idx);
                            if got != expected {
                                bad.push(NeighborMismatch {
                                    idx,
                                    which: names[k],
                                    found: got,
                                    expected,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    bad
}

/// A 4-bit flip code that disagrees with the brute-force value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMismatch {
    pub idx: usize,
    pub found: u16,
    pub expected: u16,
}

/// Run the adder and nibble path on every quarter and cell and compare each
/// spin's code, `8 * spin_bit + up_neighbors`, with a direct count on the
/// unpacked lattice. Boundaries of both colors must be current.
pub fn audit_flip_codes(arrays: &PackedArrays) -> Result<Vec<CodeMismatch>> {
    let dims = arrays.dims();
    let lattice = arrays.unpack();
    let mut bad = Vec::new();
    for color in [Color::Red, Color::Blue] {
        for quarter in quarters(color) {
            for cell in 1..=dims.cells() {
                let [r, l, t, b] = get_neighbors(arrays, quarter, cell);
                let (ones, twos, fours) = bitwise_add4(&r, &l, &t, &b)?;
                let spins = &arrays.vector(quarter.target, cell)[1..=dims.words()];
                for i in 0..4 {
                    let codes = nibble_compact(&ones, &twos, &fours, spins, i)?;
                    for (w, &code_word) in codes.iter().enumerate() {
                        for ii in 0..4 {
                            let bit = (4 * ii + i) as u32;
                            let coord = SpinCoord {
                                code: quarter.target,
                                cell,
                                word: w + 1,
                                bit,
                            };
                            let idx = unclassify(coord, dims)?;
                            let up = u16::from(lattice.get(idx) == 1);
                            let expected = 8 * up + neighbor_up_count(&lattice, idx) as u16;
                            let found = code_word >> (4 * ii) & 15;
                            if found != expected {
                                bad.push(CodeMismatch {
                                    idx,
                                    found,
                                    expected,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::InitMode;
    use crate::rng::GeneratorState;

    fn dims(m: usize, n: usize) -> LatticeDims {
        LatticeDims::new(m, n).unwrap()
    }

    #[test]
    fn missing_random_is_an_error() {
        let mut lattice = PlainLattice::filled(dims(4, 32), 1);
        let err = checkerboard_sweep(&mut lattice, 2.0, 1.0, &RandomMap::new(), 0).unwrap_err();
        assert!(matches!(err, Error::MissingRandom { sweep: 0, .. }), "{err}");
    }

    #[test]
    fn neighbor_examples() {
        let d = dims(12, 96);
        // s224 sits at c = 2, r = 32
        assert_eq!(neighbor_indices(d, 224), [320, 128, 225, 223]);
        // corner wraps both ways
        assert_eq!(neighbor_indices(d, 0), [96, 11 * 96, 1, 95]);
    }

    #[test]
    fn neighbor_sum_bounds() {
        let d = dims(12, 96);
        assert_eq!(neighbor_sum(&PlainLattice::filled(d, 1), 500).unwrap(), 4);
        assert_eq!(neighbor_sum(&PlainLattice::filled(d, -1), 0).unwrap(), -4);
        assert_eq!(neighbor_sum(&PlainLattice::checkerboard(d), 7).unwrap(), -4 * PlainLattice::checkerboard(d).get(7) as i32);
        assert!(neighbor_sum(&PlainLattice::filled(d, 1), d.spins()).is_err());

        let mut g = GeneratorState::new(6, 0);
        let lattice = PlainLattice::random(d, &mut g);
        for idx in 0..d.spins() {
            let up = neighbor_up_count(&lattice, idx) as i32;
            assert_eq!(neighbor_sum(&lattice, idx).unwrap(), 2 * up - 4);
        }
    }

    fn map_of(d: LatticeDims, sweeps: u64, value: f32) -> RandomMap {
        let mut map = RandomMap::new();
        for sweep in 0..sweeps {
            for idx in 0..d.spins() {
                let phase = match Color::of_site(idx / d.n(), idx % d.n()) {
                    Color::Red => Phase::Red,
                    Color::Blue => Phase::Blue,
                };
                map.insert(sweep, phase, idx, value);
            }
        }
        map
    }

    #[test]
    fn checkerboard_with_constant_randoms() {
        let d = dims(8, 32);
        let start = PlainLattice::random(d, &mut GeneratorState::new(3, 0));
        let mut lattice = start.clone();
        assert_eq!(checkerboard_sweep(&mut lattice, 2.0, 1.0, &map_of(d, 1, 1.0), 0).unwrap(), 0);
        assert_eq!(lattice, start);
        // zero beats every positive acceptance: both halves flip entirely
        let flips = checkerboard_sweep(&mut lattice, 2.0, 1.0, &map_of(d, 1, 0.0), 0).unwrap();
        assert_eq!(flips, d.spins() as u64);
        assert!((0..d.spins()).all(|i| lattice.get(i) == -start.get(i)));
    }

    #[test]
    fn single_spin_cold_and_forced() {
        let d = dims(4, 32);
        let mut lattice = PlainLattice::filled(d, 1);
        let mut g = GeneratorState::new(1, 0);
        for _ in 0..50 {
            assert_eq!(single_spin_sweep(&mut lattice, 1e-3, 1.0, || g.next_unit_f32()), 0);
        }
        assert_eq!(lattice, PlainLattice::filled(d, 1));

        // one down spin; only its draw is 0, every other draw is 1
        lattice.set(70, -1);
        let mut k = 0;
        let flips = single_spin_sweep(&mut lattice, 2.0, 1.0, || {
            k += 1;
            if k == 71 { 0.0 } else { 1.0 }
        });
        assert_eq!(flips, 1);
        assert_eq!(lattice, PlainLattice::filled(d, 1));
    }

    fn mean_and_error(series: &[f64]) -> (f64, f64) {
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let g = crate::observables::statistical_inefficiency(series).unwrap();
        (mean, (var * g / n).sqrt())
    }

    #[test]
    fn single_spin_agrees_with_engine_statistically() {
        let d = dims(4, 32);
        let (t, sweeps, every, skip) = (2.0, 100_000, 4, 1000);
        let mut g = GeneratorState::new(77, 0);
        let mut lattice = PlainLattice::random(d, &mut g);
        let mut single = Vec::new();
        let mut sim = Simulation::new(d, t, 1.0, 78, 0, &InitMode::Random).unwrap();
        let mut engine = Vec::new();
        for k in 0..sweeps {
            single_spin_sweep(&mut lattice, t, 1.0, || g.next_unit_f32());
            sim.sweep();
            if k >= skip && k % every == 0 {
                single.push(magnetization(&lattice).abs());
                engine.push(sim.magnetization().abs());
            }
        }
        let (a, ea) = mean_and_error(&single);
        let (b, eb) = mean_and_error(&engine);
        let sigma = (ea * ea + eb * eb).sqrt();
        assert!((a - b).abs() <= 3.0 * sigma, "single {a} +/- {ea}, engine {b} +/- {eb}");
    }

    #[test]
    fn energy_two_ways() {
        let d = dims(8, 64);
        let mut g = GeneratorState::new(4, 0);
        for _ in 0..20 {
            let lattice = PlainLattice::random(d, &mut g);
            // every site sees four bonds; halve the full neighbor sum
            let full: i64 = (0..d.spins())
                .map(|i| {
                    let s = i64::from(lattice.get(i));
                    neighbor_indices(d, i)
                        .iter()
                        .map(|&k| s * i64::from(lattice.get(k)))
                        .sum::<i64>()
                })
                .sum();
            assert_eq!(bond_sum(&lattice), full / 2);
        }
        assert_eq!(bond_sum(&PlainLattice::filled(d, -1)), 2 * d.spins() as i64);
        assert_eq!(bond_sum(&PlainLattice::checkerboard(d)), -2 * d.spins() as i64);
    }

    #[test]
    fn engine_energy_and_magnetization_agree() {
        let d = dims(12, 96);
        let mut sim = Simulation::new(d, 2.4, 1.0, 8, 0, &InitMode::Random).unwrap();
        for _ in 0..10 {
            sim.sweep();
            let lattice = sim.lattice();
            assert_eq!(sim.energy(), energy(&lattice, 1.0));
            assert_eq!(sim.magnetization(), magnetization(&lattice));
        }
    }

    #[test]
    fn acceptance_matches_table() {
        let t = crate::engine::ExpTable::build(2.1, 1.0).unwrap();
        for b in 0..2u16 {
            for n_up in 0..=4u32 {
                let spin = if b == 1 { 1 } else { -1 };
                assert_eq!(t.get(8 * b + n_up as u16), acceptance(2.1, 1.0, spin, n_up));
            }
        }
    }

    #[test]
    fn short_run_matches_engine() {
        let d = dims(8, 64);
        let mut sim = Simulation::new(d, 2.0, 1.0, 21, 0, &InitMode::Random).unwrap();
        let mut lattice = sim.lattice();
        let map = record_engine_randoms(&mut sim, 5);
        assert_eq!(map.len(), 5 * d.spins());
        let mut flips = 0;
        for sweep in 0..5 {
            flips += checkerboard_sweep(&mut lattice, 2.0, 1.0, &map, sweep).unwrap();
        }
        assert_eq!(lattice, sim.lattice());
        assert_eq!(flips, sim.flips());
    }

    #[test]
    fn neighbors_audit_clean() {
        let d = dims(12, 96);
        let sim = Simulation::new(d, 2.0, 1.0, 2, 0, &InitMode::Random).unwrap();
        assert!(audit_neighbors(sim.arrays()).is_empty());
        assert!(audit_flip_codes(sim.arrays()).unwrap().is_empty());
    }

    #[test]
    fn audit_catches_corruption() {
        let d = dims(8, 64);
        let mut sim = Simulation::new(d, 2.0, 1.0, 2, 0, &InitMode::Random).unwrap();
        // Break the blue boundary without refreshing it
        let mut arrays = sim.arrays().clone();
        let w = arrays.word(crate::lattice::ArrayCode::BFO, 1, 0);
        arrays.set_word(crate::lattice::ArrayCode::BFO, 1, 0, !w);
        assert!(!audit_flip_codes(&arrays).unwrap().is_empty());
        sim.sweep();
        assert!(audit_flip_codes(sim.arrays()).unwrap().is_empty());
    }
}
