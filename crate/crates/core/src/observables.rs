//! Trajectories, equilibration detection and Onsager comparison.

use crate::error::{Error, Result};
use crate::lattice::{onsager_magnetization, LatticeDims};

/// Fewest samples a statistical inefficiency is computed from.
pub const MIN_STATIONARY: usize = 10;
/// Fewest samples equilibration detection accepts.
pub const MIN_SERIES: usize = 20;
/// Number of candidate origins scanned by [`detect_equilibration`].
pub const GRID_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub sweep: u64,
    pub sim: usize,
    pub abs_magnetization: f64,
    pub energy_per_spin: f64,
}

/// Measurements of an ensemble plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dims: LatticeDims,
    /// Temperature of each simulation, indexed by simulation number.
    pub temperatures: Vec<f64>,
    pub j: f64,
    pub seed: u64,
    pub interval: u64,
    records: Vec<Record>,
}

impl Trajectory {
    pub fn new(dims: LatticeDims, temperatures: Vec<f64>, j: f64, seed: u64, interval: u64) -> Self {
        Self {
            dims,
            temperatures,
            j,
            seed,
            interval,
            records: Vec::new(),
        }
    }

    /// Append a record. Sweeps must increase per simulation and `|M|` lie in `[0, 1]`.
    pub fn push(&mut self, record: Record) -> Result<()> {
        if record.sim >= self.temperatures.len() {
            return Err(Error::OutOfRange {
                what: "simulation index",
                value: record.sim,
                bound: self.temperatures.len(),
            });
        }
        if !(0.0..=1.0).contains(&record.abs_magnetization) {
            return Err(Error::Size(format!(
                "|M| = {} outside [0, 1]",
                record.abs_magnetization
            )));
        }
        if let Some(last) = self.records.iter().rev().find(|r| r.sim == record.sim) {
            if record.sweep <= last.sweep {
                return Err(Error::Size(format!(
                    "sweep {} does not follow {} for simulation {}",
                    record.sweep, last.sweep, record.sim
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn abs_magnetization(&self, sim: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.sim == sim)
            .map(|r| r.abs_magnetization)
            .collect()
    }

    pub fn energy(&self, sim: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.sim == sim)
            .map(|r| r.energy_per_spin)
            .collect()
    }

    /// Distinct temperatures in first-seen order.
    pub fn distinct_temperatures(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &t in &self.temperatures {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    /// Simulations run at temperature `t`.
    pub fn sims_at(&self, t: f64) -> Vec<usize> {
        (0..self.temperatures.len())
            .filter(|&k| self.temperatures[k] == t)
            .collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `g = 1 + 2 sum_k C(k)`, summing normalized autocorrelations until the
/// first non-positive one. A series with no variance has `g = 1`.
pub fn statistical_inefficiency(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < MIN_STATIONARY {
        return Err(Error::TooShort {
            test: "statistical inefficiency",
            min: MIN_STATIONARY,
            len: n,
        });
    }
    let mu = mean(series);
    let dev: Vec<f64> = series.iter().map(|x| x - mu).collect();
    let var = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if var == 0.0 || var <= (1e-12 * mu.abs()).powi(2) {
        return Ok(1.0);
    }
    let mut g = 1.0;
    for k in 1..n - 1 {
        let c = dev[..n - k]
            .iter()
            .zip(&dev[k..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / ((n - k) as f64 * var);
        if c <= 0.0 {
            break;
        }
        g += 2.0 * c;
    }
    Ok(g.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibration {
    /// First sample of the equilibrated segment.
    pub t0: usize,
    /// Statistical inefficiency of that segment.
    pub g: f64,
    /// Effective number of independent samples, `(N - t0) / g`.
    pub n_eff: f64,
}

/// Candidate origins: the segment kept shrinks by a factor `sqrt 2` per step.
pub fn candidate_origins(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(GRID_POINTS);
    for k in 0..GRID_POINTS {
        let kept = (n as f64 * 0.5f64.powf(k as f64 / 2.0)).floor() as usize;
        if kept < MIN_STATIONARY {
            break;
        }
        let t0 = n - kept;
        if out.last() != Some(&t0) {
            out.push(t0);
        }
    }
    out
}

/// Pick the origin that maximizes the effective sample count of the rest.
pub fn detect_equilibration(series: &[f64]) -> Result<Equilibration> {
    if series.len() < MIN_SERIES {
        return Err(Error::TooShort {
            test: "equilibration detection",
            min: MIN_SERIES,
            len: series.len(),
        });
    }
    let mut best: Option<Equilibration> = None;
    for t0 in candidate_origins(series.len()) {
        let g = statistical_inefficiency(&series[t0..])?;
        let n_eff = (series.len() - t0) as f64 / g;
        if best.is_none_or(|b| n_eff > b.n_eff) {
            best = Some(Equilibration { t0, g, n_eff });
        }
    }
    Ok(best.expect("at least one candidate origin"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub temperature: f64,
    pub simulations: usize,
    /// Samples kept after discarding each simulation's transient.
    pub samples: usize,
    pub n_eff: f64,
    pub mean: f64,
    pub std_error: f64,
    pub onsager: f64,
    /// `mean - onsager`.
    pub deviation: f64,
}

/// Post-equilibration `<|M|>` over every simulation at `temperature`.
///
/// Each simulation's transient is detected separately. The standard error
/// uses the pooled variance and the summed effective sample counts.
pub fn summarize(trajectory: &Trajectory, temperature: f64) -> Result<Summary> {
    let sims = trajectory.sims_at(temperature);
    let mut kept = Vec::new();
    let mut n_eff = 0.0;
    for &sim in &sims {
        let series = trajectory.abs_magnetization(sim);
        if series.is_empty() {
            continue;
        }
        let eq = detect_equilibration(&series)?;
        kept.extend_from_slice(&series[eq.t0..]);
        n_eff += eq.n_eff;
    }
    if kept.is_empty() {
        return Err(Error::NoEquilibratedData);
    }
    let mu = mean(&kept);
    let var = kept.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (kept.len() as f64 - 1.0).max(1.0);
    let onsager = onsager_magnetization(temperature, trajectory.j)?;
    Ok(Summary {
        temperature,
        simulations: sims.len(),
        samples: kept.len(),
        n_eff,
        mean: mu,
        std_error: (var / n_eff).sqrt(),
        onsager,
        deviation: mu - onsager,
    })
}

/// Temperature where `curve` first crosses `level` going down, by linear
/// interpolation between neighboring points. Points must be sorted by temperature.
pub fn crossing(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((t1, m1), (t2, m2)) = (w[0], w[1]);
        if m1 >= level && m2 < level {
            Some(t1 + (m1 - level) * (t2 - t1) / (m1 - m2))
        } else {
            None
        }
    })
}
