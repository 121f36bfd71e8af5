//! Multi-spin checkerboard Metropolis engine.
//!
//! A [`Simulation`] owns one lattice in packed form, its acceptance table and
//! one random stream per worker cell. An [`Ensemble`] runs many simulations
//! side by side. Results do not depend on the thread count: each cell always
//! draws from its own stream in a fixed order.

pub mod kernel;
mod run;
mod table;

use std::fmt;

use rayon::prelude::*;

use crate::bitkernels::add4_word;
use crate::error::{Error, Result};
use crate::lattice::{
    canonical_halo_source, ArrayCode, Color, LatticeDims, PackedArrays, PlainLattice,
};
use crate::rng::{mix64, shape_unit_float, GeneratorState};

pub use kernel::{boundary_copies, get_neighbors, quarters, BoundaryCopy, Quarter};
pub use run::{effective_threads, run, RunConfig, RunResult};
pub use table::ExpTable;

use kernel::{faulty_add4, flip_cell, Plane, Scratch};

/// Tag mixed into the seed for the streams that draw initial spins, keeping
/// them apart from the flip streams.
const INIT_TAG: u64 = 0x1A17_5EED_0000_0001;

/// Roughly how many spins a rayon task should cover before splitting cells.
const SPINS_PER_TASK: usize = 32 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitMode {
    /// Independent uniformly random spins.
    Random,
    AllUp,
    AllDown,
    Checkerboard,
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "hot" => Ok(Self::Random),
            "up" | "all-up" | "cold" => Ok(Self::AllUp),
            "down" | "all-down" => Ok(Self::AllDown),
            "checkerboard" => Ok(Self::Checkerboard),
            other => Err(Error::Config(format!(
                "unknown init mode `{other}` (random, up, down, checkerboard)"
            ))),
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::AllUp => "up",
            Self::AllDown => "down",
            Self::Checkerboard => "checkerboard",
        })
    }
}

/// Initial lattice of simulation `sim` under `mode`.
pub fn initial_lattice(dims: LatticeDims, mode: &InitMode, seed: u64, sim: u64) -> PlainLattice {
    match mode {
        InitMode::Random => {
            let mut rng = GeneratorState::new(mix64(seed ^ INIT_TAG), sim);
            PlainLattice::random(dims, &mut rng)
        }
        InitMode::AllUp => PlainLattice::filled(dims, 1),
        InitMode::AllDown => PlainLattice::filled(dims, -1),
        InitMode::Checkerboard => PlainLattice::checkerboard(dims),
    }
}

/// Which phase of a sweep a random draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Red,
    Blue,
}

impl Phase {
    pub fn color(self) -> Color {
        match self {
            Phase::Red => Color::Red,
            Phase::Blue => Color::Blue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Red => "red",
            Phase::Blue => "blue",
        }
    }
}

/// One random draw as seen by an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub sweep: u64,
    pub phase: Phase,
    pub code: ArrayCode,
    pub cell: usize,
    pub word: usize,
    pub bit: u32,
    pub value: f32,
}

/// Hooks into an observed sweep. Both methods default to doing nothing.
pub trait SweepObserver {
    fn on_draw(&mut self, _draw: Draw) {}

    /// Called after the boundary of `color` has been refreshed.
    fn after_boundary(&mut self, _arrays: &PackedArrays, _color: Color) {}
}

/// A single observable snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub magnetization: f64,
    pub energy_per_spin: f64,
}

impl Measurement {
    pub fn abs_magnetization(&self) -> f64 {
        self.magnetization.abs()
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    arrays: PackedArrays,
    temperature: f64,
    j: f64,
    table: ExpTable,
    rngs: Vec<GeneratorState>,
    sweeps: u64,
    attempts: u64,
    flips: u64,
    faulty: bool,
}

impl Simulation {
    /// Simulation number `sim` of an ensemble seeded with `seed`.
    pub fn new(
        dims: LatticeDims,
        temperature: f64,
        j: f64,
        seed: u64,
        sim: u64,
        init: &InitMode,
    ) -> Result<Self> {
        let lattice = initial_lattice(dims, init, seed, sim);
        Self::from_lattice(&lattice, temperature, j, seed, sim)
    }

    pub fn from_lattice(
        lattice: &PlainLattice,
        temperature: f64,
        j: f64,
        seed: u64,
        sim: u64,
    ) -> Result<Self> {
        let table = ExpTable::build(temperature, j)?;
        let dims = lattice.dims();
        let cells = dims.cells() as u64;
        let rngs = (0..cells)
            .map(|c| GeneratorState::new(seed, sim * cells + c))
            .collect();
        let mut arrays = PackedArrays::pack(lattice);
        kernel::update_bc(&mut arrays, Color::Red);
        kernel::update_bc(&mut arrays, Color::Blue);
        Ok(Self {
            arrays,
            temperature,
            j,
            table,
            rngs,
            sweeps: 0,
            attempts: 0,
            flips: 0,
            faulty: false,
        })
    }

    /// Replace the acceptance table, e.g. with [`ExpTable::constant`].
    pub fn set_table(&mut self, table: ExpTable) {
        self.table = table;
    }

    /// Switch to a broken adder. Only for checking that the test harness notices.
    #[doc(hidden)]
    pub fn inject_fault(&mut self) {
        self.faulty = true;
    }

    pub fn dims(&self) -> LatticeDims {
        self.arrays.dims()
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn coupling(&self) -> f64 {
        self.j
    }

    pub fn table(&self) -> &ExpTable {
        &self.table
    }

    pub fn arrays(&self) -> &PackedArrays {
        &self.arrays
    }

    pub fn lattice(&self) -> PlainLattice {
        self.arrays.unpack()
    }

    /// Completed sweeps.
    pub fn sweeps_done(&self) -> u64 {
        self.sweeps
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn magnetization(&self) -> f64 {
        let n = self.dims().spins() as f64;
        (2.0 * self.arrays.up_count() as f64 - n) / n
    }

    /// Total energy `-J sum s_i s_j`.
    pub fn energy(&self) -> f64 {
        -self.j * kernel::bond_sum(&self.arrays) as f64
    }

    pub fn measure(&self) -> Measurement {
        Measurement {
            magnetization: self.magnetization(),
            energy_per_spin: self.energy() / self.dims().spins() as f64,
        }
    }

    /// One sweep on the calling thread.
    pub fn sweep(&mut self) {
        self.sweep_with(false, None);
    }

    pub fn sweeps(&mut self, count: u64) {
        for _ in 0..count {
            self.sweep();
        }
    }

    /// One sweep with cells spread over the current rayon pool.
    pub fn sweep_parallel(&mut self) {
        self.sweep_with(true, None);
    }

    /// One sequential sweep reporting every draw and boundary update.
    pub fn sweep_observed(&mut self, observer: &mut dyn SweepObserver) {
        self.sweep_with(false, Some(observer));
    }

    fn sweep_with<'o>(&mut self, parallel: bool, mut observer: Option<&mut (dyn SweepObserver + 'o)>) {
        for (phase, color) in [(Phase::Red, Color::Red), (Phase::Blue, Color::Blue)] {
            let flips = if self.faulty {
                self.flip_color(color, phase, faulty_add4, parallel, observer.as_deref_mut())
            } else {
                self.flip_color(color, phase, add4_word, parallel, observer.as_deref_mut())
            };
            self.flips += flips;
            kernel::update_bc(&mut self.arrays, color);
            if let Some(obs) = observer.as_deref_mut() {
                obs.after_boundary(&self.arrays, color);
            }
        }
        self.attempts += self.dims().spins() as u64;
        self.sweeps += 1;
    }

    fn flip_color<'o, A>(
        &mut self,
        color: Color,
        phase: Phase,
        adder: A,
        parallel: bool,
        observer: Option<&mut (dyn SweepObserver + 'o)>,
    ) -> u64
    where
        A: Fn(u16, u16, u16, u16) -> (u16, u16, u16) + Copy + Send + Sync,
    {
        let dims = self.arrays.dims();
        let stride = self.arrays.cell_stride();
        let cells = dims.cells();
        let table = self.table;
        let sweep = self.sweeps;
        let (mine, other) = self.arrays.split_mut(color);
        let other = Plane {
            words: other,
            len: dims.vector_len(),
        };
        let workers = &mut mine[stride..stride * (cells + 1)];
        if parallel {
            let min_len = (SPINS_PER_TASK / (2 * dims.n())).max(1);
            workers
                .par_chunks_mut(stride)
                .zip(self.rngs.par_iter_mut())
                .enumerate()
                .with_min_len(min_len)
                .map_init(Scratch::default, |scratch, (i, (block, rng))| {
                    flip_cell(
                        color,
                        i + 1,
                        block,
                        other,
                        &table,
                        adder,
                        scratch,
                        &mut || (rng.next_u64() >> 32) as u32,
                        &mut |_, _, _, _| {},
                    )
                })
                .sum()
        } else {
            let mut scratch = Scratch::default();
            let mut flips = 0;
            let mut observer = observer;
            for (i, (block, rng)) in workers.chunks_mut(stride).zip(&mut self.rngs).enumerate() {
                let cell = i + 1;
                let mut draw = || (rng.next_u64() >> 32) as u32;
                flips += match observer.as_deref_mut() {
                    None => flip_cell(
                        color,
                        cell,
                        block,
                        other,
                        &table,
                        adder,
                        &mut scratch,
                        &mut draw,
                        &mut |_, _, _, _| {},
                    ),
                    Some(obs) => flip_cell(
                        color,
                        cell,
                        block,
                        other,
                        &table,
                        adder,
                        &mut scratch,
                        &mut draw,
                        &mut |code, word, bit, raw| {
                            obs.on_draw(Draw {
                                sweep,
                                phase,
                                code,
                                cell,
                                word,
                                bit,
                                value: shape_unit_float(raw),
                            })
                        },
                    ),
                };
            }
            flips
        }
    }
}

/// A halo or moat word that disagrees with the layout rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaloMismatch {
    pub code: ArrayCode,
    pub cell: usize,
    pub element: usize,
    pub found: u16,
    pub expected: u16,
}

impl fmt::Display for HaloMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cell {} element {}: found {:#06x}, expected {:#06x}",
            self.code, self.cell, self.element, self.found, self.expected
        )
    }
}

/// Compare every halo and moat word of `color` with the value it should hold.
pub fn audit_halos(arrays: &PackedArrays, color: Color) -> Vec<HaloMismatch> {
    let dims = arrays.dims();
    let (cells, words) = (dims.cells(), dims.words());
    let mut bad = Vec::new();
    for code in ArrayCode::ALL.into_iter().filter(|c| c.color == color) {
        for cell in 0..=cells + 1 {
            for element in 0..=words + 1 {
                let interior = !dims.is_moat(cell) && (1..=words).contains(&element);
                if interior {
                    continue;
                }
                let expected = canonical_halo_source(code, cell, element, dims)
                    .map_or(0, |w| arrays.word(w.code, w.cell, w.word));
                let found = arrays.word(code, cell, element);
                if found != expected {
                    bad.push(HaloMismatch {
                        code,
                        cell,
                        element,
                        found,
                        expected,
                    });
                }
            }
        }
    }
    bad
}

/// Several simulations advanced together.
pub struct Ensemble {
    sims: Vec<Simulation>,
    pool: Option<rayon::ThreadPool>,
}

impl Ensemble {
    /// One simulation per entry of `temperatures`, numbered in order.
    pub fn new(
        dims: LatticeDims,
        temperatures: &[f64],
        j: f64,
        seed: u64,
        init: &InitMode,
    ) -> Result<Self> {
        if temperatures.is_empty() {
            return Err(Error::Config("at least one temperature is required".into()));
        }
        let sims = temperatures
            .iter()
            .enumerate()
            .map(|(k, &t)| Simulation::new(dims, t, j, seed, k as u64, init))
            .collect::<Result<_>>()?;
        Ok(Self { sims, pool: None })
    }

    /// Run on `threads` worker threads; 0 uses rayon's default, 1 stays on the
    /// calling thread.
    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        self.pool = if threads == 1 {
            None
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
            Some(pool)
        };
        Ok(self)
    }

    pub fn simulations(&self) -> &[Simulation] {
        &self.sims
    }

    pub fn simulations_mut(&mut self) -> &mut [Simulation] {
        &mut self.sims
    }

    pub fn len(&self) -> usize {
        self.sims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sims.is_empty()
    }

    pub fn attempts(&self) -> u64 {
        self.sims.iter().map(Simulation::attempts).sum()
    }

    pub fn flips(&self) -> u64 {
        self.sims.iter().map(Simulation::flips).sum()
    }

    /// Advance every simulation by `count` sweeps.
    pub fn sweeps(&mut self, count: u64) {
        match &self.pool {
            None => self.sims.iter_mut().for_each(|s| s.sweeps(count)),
            Some(pool) => {
                let sims = &mut self.sims;
                pool.install(|| {
                    sims.par_iter_mut().for_each(|s| {
                        for _ in 0..count {
                            s.sweep_parallel();
                        }
                    })
                })
            }
        }
    }

    pub fn measure(&self) -> Vec<Measurement> {
        match &self.pool {
            None => self.sims.iter().map(Simulation::measure).collect(),
            Some(pool) => pool.install(|| self.sims.par_iter().map(Simulation::measure).collect()),
        }
    }

    /// Run `sweeps` sweeps, measuring after every `interval` of them. The
    /// callback gets the sweep count so far and one measurement per simulation.
    pub fn run(&mut self, sweeps: u64, interval: u64, mut on_measure: impl FnMut(u64, &[Measurement])) {
        let interval = interval.max(1);
        let mut done = 0;
        while done < sweeps {
            let step = interval.min(sweeps - done);
            self.sweeps(step);
            done += step;
            if done % interval == 0 {
                on_measure(done, &self.measure());
            }
        }
    }
}
