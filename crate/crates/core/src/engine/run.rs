use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::lattice::LatticeDims;
use crate::observables::{Record, Trajectory};

use super::{Ensemble, InitMode};

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dims: LatticeDims,
    /// Temperature of each simulation.
    pub temperatures: Vec<f64>,
    pub j: f64,
    pub seed: u64,
    pub init: InitMode,
    pub sweeps: u64,
    pub measure_interval: u64,
    /// 0 picks the default pool size, 1 runs on the calling thread.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trajectory: Trajectory,
    /// Wall time spent sweeping, measurements excluded.
    pub sweep_time: Duration,
    pub attempts: u64,
    pub flips: u64,
    pub threads: usize,
}

impl RunResult {
    /// Attempted flips per nanosecond.
    pub fn flip_rate(&self) -> f64 {
        let ns = self.sweep_time.as_secs_f64() * 1e9;
        if ns > 0.0 {
            self.attempts as f64 / ns
        } else {
            0.0
        }
    }

    /// Time for one sweep of every simulation, in milliseconds.
    pub fn iteration_ms(&self, sweeps: u64) -> f64 {
        if sweeps == 0 {
            0.0
        } else {
            self.sweep_time.as_secs_f64() * 1e3 / sweeps as f64
        }
    }
}

pub fn effective_threads(threads: usize) -> usize {
    if threads == 0 {
        rayon::current_num_threads()
    } else {
        threads
    }
}

/// Run every simulation for `sweeps` sweeps, recording `|M|` and the energy
/// per spin of each after every `measure_interval` sweeps.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    if config.measure_interval == 0 {
        return Err(Error::Config("measure_interval must be at least 1".into()));
    }
    let mut ensemble = Ensemble::new(
        config.dims,
        &config.temperatures,
        config.j,
        config.seed,
        &config.init,
    )?
    .with_threads(config.threads)?;
    let mut trajectory = Trajectory::new(
        config.dims,
        config.temperatures.clone(),
        config.j,
        config.seed,
        config.measure_interval,
    );
    let mut sweep_time = Duration::ZERO;
    let mut done = 0;
    while done < config.sweeps {
        let step = config.measure_interval.min(config.sweeps - done);
        let start = Instant::now();
        ensemble.sweeps(step);
        sweep_time += start.elapsed();
        done += step;
        if done % config.measure_interval == 0 {
            for (sim, m) in ensemble.measure().into_iter().enumerate() {
                trajectory.push(Record {
                    sweep: done,
                    sim,
                    abs_magnetization: m.abs_magnetization(),
                    energy_per_spin: m.energy_per_spin,
                })?;
            }
        }
    }
    Ok(RunResult {
        trajectory,
        sweep_time,
        attempts: ensemble.attempts(),
        flips: ensemble.flips(),
        threads: effective_threads(config.threads),
    })
}
