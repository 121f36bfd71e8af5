//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::engine::{InitMode, RunConfig};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDims, CRITICAL_TEMPERATURE};

/// Every key a config file or flag may set.
pub const KEYS: &[&str] = &[
    "m",
    "n",
    "temperatures",
    "t_start",
    "t_stop",
    "t_step",
    "j",
    "sweeps",
    "measure_interval",
    "n_sim",
    "seed",
    "init",
    "output",
    "threads",
    "tolerance",
    "critical_window",
    "above_tc_limit",
    "warmup",
];

/// Where a value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

/// Raw string values keyed by normalized name.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, (String, Origin)>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl RawConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut raw = Self::default();
        for (k, line) in text.lines().enumerate() {
            let lineno = k + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let key = normalize(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key `{key}`")));
            }
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: lineno,
            };
            raw.values.insert(key, (value.trim().to_string(), origin));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Set `key` from a flag; flags replace file values.
    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize(key), (value.into(), Origin::Flag));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn invalid(&self, key: &str, msg: String) -> Error {
        match self.values.get(key).map(|(_, o)| o) {
            Some(Origin::File { path, line }) => Error::Parse {
                path: path.clone(),
                line: *line,
                msg: format!("{key}: {msg}"),
            },
            _ => Error::Config(format!("--{key}: {msg}")),
        }
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse()
                .map(Some)
                .map_err(|e| self.invalid(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn temperatures(&self) -> Result<Vec<f64>> {
        let range = ["t_start", "t_stop", "t_step"].map(|k| self.contains(k));
        let list = self.contains("temperatures");
        if list && range.iter().any(|&r| r) {
            return Err(Error::Config(
                "give either `temperatures` or `t_start`/`t_stop`/`t_step`, not both".into(),
            ));
        }
        let temps = if list {
            let (text, _) = &self.values["temperatures"];
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| self.invalid("temperatures", format!("`{s}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else if range.iter().all(|&r| r) {
            let start: f64 = self.get("t_start")?.expect("checked");
            let stop: f64 = self.get("t_stop")?.expect("checked");
            let step: f64 = self.get("t_step")?.expect("checked");
            temperature_range(start, stop, step).map_err(|e| self.invalid("t_step", e.to_string()))?
        } else if range.iter().any(|&r| r) {
            return Err(Error::Config(
                "a temperature range needs all of t_start, t_stop and t_step".into(),
            ));
        } else {
            vec![2.0]
        };
        if temps.is_empty() {
            return Err(self.invalid("temperatures", "no temperatures given".into()));
        }
        if let Some(&t) = temps.iter().find(|&&t| t.is_nan() || t <= 0.0 || !t.is_finite()) {
            return Err(Error::NonPositiveTemperature(t));
        }
        Ok(temps)
    }

    pub fn resolve(&self) -> Result<SimConfig> {
        let m = self.get_or("m", 128)?;
        let n = self.get_or("n", 128)?;
        let dims = LatticeDims::new(m, n)?;
        let n_sim = self.get_or("n_sim", 1usize)?;
        if n_sim == 0 {
            return Err(self.invalid("n_sim", "must be at least 1".into()));
        }
        let measure_interval = self.get_or("measure_interval", 100u64)?;
        if measure_interval == 0 {
            return Err(self.invalid("measure_interval", "must be at least 1".into()));
        }
        let output = self
            .values
            .get("output")
            .map(|(v, _)| v.clone())
            .filter(|v| !v.is_empty() && v != "-")
            .map(PathBuf::from);
        Ok(SimConfig {
            dims,
            temperatures: self.temperatures()?,
            j: self.get_or("j", 1.0)?,
            sweeps: self.get_or("sweeps", 1000)?,
            measure_interval,
            n_sim,
            seed: self.get_or("seed", 1)?,
            init: self.get_or("init", InitMode::Random)?,
            output,
            threads: self.get_or("threads", 0)?,
            tolerance: self.get_or("tolerance", 0.02)?,
            critical_window: self.get_or("critical_window", 0.2)?,
            above_tc_limit: self.get_or("above_tc_limit", 0.10)?,
            warmup: self.get_or("warmup", 10)?,
        })
    }
}

/// `start, start + step, ...` up to and including `stop`, computed as
/// `start + k * step` so rounding does not accumulate.
pub fn temperature_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !step.is_finite() {
        return Err(Error::Config(format!("temperature step must be positive, got {step}")));
    }
    if stop < start {
        return Err(Error::Config(format!("t_stop {stop} is below t_start {start}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dims: LatticeDims,
    /// Distinct temperatures; each runs `n_sim` replicas.
    pub temperatures: Vec<f64>,
    pub j: f64,
    pub sweeps: u64,
    pub measure_interval: u64,
    pub n_sim: usize,
    pub seed: u64,
    pub init: InitMode,
    pub output: Option<PathBuf>,
    pub threads: usize,
    /// validate: allowed `| <|M|> - onsager |` below the critical window.
    pub tolerance: f64,
    /// validate: temperatures within this distance of `Tc` are reported but not graded.
    pub critical_window: f64,
    /// validate: largest `<|M|>` accepted above the critical window.
    pub above_tc_limit: f64,
    /// bench: untimed sweeps before measuring.
    pub warmup: u64,
}

impl SimConfig {
    /// Temperature of every simulation: replicas of one temperature are adjacent.
    pub fn simulation_temperatures(&self) -> Vec<f64> {
        self.temperatures
            .iter()
            .flat_map(|&t| std::iter::repeat_n(t, self.n_sim))
            .collect()
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            dims: self.dims,
            temperatures: self.simulation_temperatures(),
            j: self.j,
            seed: self.seed,
            init: self.init.clone(),
            sweeps: self.sweeps,
            measure_interval: self.measure_interval,
            threads: self.threads,
        }
    }

    pub fn critical_temperature(&self) -> f64 {
        CRITICAL_TEMPERATURE * self.j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RawConfig> {
        RawConfig::parse(text, Path::new("test.conf"))
    }

    #[test]
    fn file_and_flags() {
        let mut raw = parse(
            "# lattice\nm = 12\nn=96   # memory axis\n\ntemperatures = 1.5, 2.0\nsweeps = 100\n",
        )
        .unwrap();
        raw.set_flag("sweeps", "7");
        raw.set_flag("measure-interval", "5");
        let c = raw.resolve().unwrap();
        assert_eq!((c.dims.m(), c.dims.n()), (12, 96));
        assert_eq!(c.temperatures, vec![1.5, 2.0]);
        assert_eq!(c.sweeps, 7);
        assert_eq!(c.measure_interval, 5);
        assert_eq!(c.output, None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("m = 12\nbogus = 3\n").unwrap_err().to_string();
        assert!(e.contains("test.conf:2"), "{e}");
        let e = parse("m = 12\nn 96\n").unwrap_err().to_string();
        assert!(e.contains(":2"), "{e}");
        let e = parse("m = 12\nn = 9x6\n").unwrap().resolve().unwrap_err().to_string();
        assert!(e.contains("test.conf:2") && e.contains("9x6"), "{e}");
    }

    #[test]
    fn invalid_dims_quote_rules() {
        let e = parse("m = 10\nn = 96").unwrap().resolve().unwrap_err().to_string();
        assert!(e.contains("multiple of 4") && e.contains("multiple of 32"), "{e}");
    }

    #[test]
    fn ranges() {
        assert_eq!(temperature_range(1.0, 3.0, 0.5).unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(temperature_range(2.0, 2.6, 0.05).unwrap().len(), 13);
        assert_eq!(temperature_range(0.385, 4.145, 0.005).unwrap().len(), 753);
        assert!(temperature_range(1.0, 2.0, 0.0).is_err());
        assert!(temperature_range(1.0, 2.0, -0.1).is_err());
        assert!(temperature_range(3.0, 2.0, 0.1).is_err());
        let c = parse("t_start = 1.0\nt_stop = 3.0\nt_step = 0.5\nn_sim = 2")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c.temperatures.len(), 5);
        assert_eq!(c.simulation_temperatures(), vec![1.0, 1.0, 1.5, 1.5, 2.0, 2.0, 2.5, 2.5, 3.0, 3.0]);
        assert!(parse("t_start = 1.0\nt_stop = 3.0").unwrap().resolve().is_err());
        assert!(parse("temperatures = 2\nt_step = 0.5").unwrap().resolve().is_err());
        assert!(parse("temperatures = 2, -1").unwrap().resolve().is_err());
    }
}
