//! Uniformity and lag-1 independence checks on unit floats.

use super::special::gamma_q;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    pub bin_width: f64,
    pub frequencies: Vec<f64>,
    pub max: f64,
    pub min: f64,
    /// `(max - min) / min`; infinite when some bin is empty.
    pub spread: f64,
}

impl FrequencyReport {
    pub fn within(&self, limit: f64) -> bool {
        self.spread.is_finite() && self.spread <= limit
    }
}

fn bin_count(bin_width: f64) -> Result<usize> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::Config(format!("bin width {bin_width} not in (0, 1]")));
    }
    let bins = (1.0 / bin_width).round();
    if (bins * bin_width - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "bin width {bin_width} does not divide [0, 1) evenly"
        )));
    }
    Ok(bins as usize)
}

#[inline]
fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}

pub fn frequency_histogram(floats: &[f32], bin_width: f64) -> Result<FrequencyReport> {
    if floats.is_empty() {
        return Err(Error::TooShort {
            test: "frequency histogram",
            min: 1,
            len: 0,
        });
    }
    let bins = bin_count(bin_width)?;
    let mut counts = vec![0u64; bins];
    for &x in floats {
        counts[bin_of(x as f64, bins)] += 1;
    }
    let total = floats.len() as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let max = frequencies.iter().cloned().fold(f64::MIN, f64::max);
    let min = frequencies.iter().cloned().fold(f64::MAX, f64::min);
    let spread = if min > 0.0 { (max - min) / min } else { f64::INFINITY };
    Ok(FrequencyReport {
        bin_width,
        frequencies,
        max,
        min,
        spread,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointReport {
    pub bins: usize,
    /// Row-major `bins x bins`, row = `x_k`, column = `x_{k+1}`.
    pub counts: Vec<u64>,
    pub chi_square: f64,
    pub p_value: f64,
}

/// Two-dimensional histogram of consecutive pairs with a chi-square test of
/// uniformity over all cells.
pub fn lag1_joint(floats: &[f32], bins: usize) -> Result<JointReport> {
    if floats.len() < 2 {
        return Err(Error::TooShort {
            test: "lag-1 joint",
            min: 2,
            len: floats.len(),
        });
    }
    if bins == 0 {
        return Err(Error::Config("joint histogram needs at least one bin".into()));
    }
    pairs_joint(floats.windows(2).map(|w| (w[0], w[1])), bins)
}

/// Same statistic over arbitrary pairs (e.g. two separate streams).
pub fn pairs_joint(pairs: impl Iterator<Item = (f32, f32)>, bins: usize) -> Result<JointReport> {
    let mut counts = vec![0u64; bins * bins];
    let mut total = 0u64;
    for (x, y) in pairs {
        counts[bin_of(x as f64, bins) * bins + bin_of(y as f64, bins)] += 1;
        total += 1;
    }
    let cells = (bins * bins) as f64;
    let expected = total as f64 / cells;
    let chi_square: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p_value = if bins * bins > 1 {
        gamma_q((cells - 1.0) / 2.0, chi_square / 2.0)
    } else {
        1.0
    };
    Ok(JointReport {
        bins,
        counts,
        chi_square,
        p_value,
    })
}

/// `bit[i] = floats[i] >= median(floats)`. For an even count the median is
/// the mean of the two middle values.
pub fn median_threshold_bits(floats: &[f32]) -> Result<Vec<u8>> {
    if floats.len() < 100 {
        return Err(Error::TooShort {
            test: "median thresholding",
            min: 100,
            len: floats.len(),
        });
    }
    let mut sorted = floats.to_vec();
    let n = sorted.len();
    let mid = n / 2;
    let (lower, upper, _) = sorted.select_nth_unstable_by(mid, f32::total_cmp);
    let upper = *upper;
    let median = if n % 2 == 1 {
        upper as f64
    } else {
        let below = lower.iter().cloned().fold(f32::MIN, f32::max);
        (below as f64 + upper as f64) / 2.0
    };
    Ok(floats.iter().map(|&x| u8::from(x as f64 >= median)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{monobit_test, runs_test, GeneratorState};

    fn floats(seed: u64, stream: u64, n: usize) -> Vec<f32> {
        let mut g = GeneratorState::new(seed, stream);
        (0..n).map(|_| g.next_unit_f32()).collect()
    }

    #[test]
    fn histogram_of_generator_is_flat() {
        let xs = floats(3, 0, 1_000_000);
        let fine = frequency_histogram(&xs, 0.01).unwrap();
        assert_eq!(fine.frequencies.len(), 100);
        assert!((fine.frequencies.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(fine.within(0.08), "{}", fine.spread);
        let coarse = frequency_histogram(&xs, 0.1).unwrap();
        assert!(coarse.within(0.02), "{}", coarse.spread);
    }

    #[test]
    fn histogram_degenerate_and_errors() {
        let r = frequency_histogram(&[0.5; 1000], 0.01).unwrap();
        assert_eq!(r.frequencies.iter().filter(|&&f| f > 0.0).count(), 1);
        assert!(!r.within(0.08));
        assert!(frequency_histogram(&[], 0.1).is_err());
        assert!(frequency_histogram(&[0.1], 0.3).is_err());
        assert!(frequency_histogram(&[0.1], 0.0).is_err());
    }

    #[test]
    fn joint_of_generator_is_uniform() {
        let xs = floats(5, 0, 1_000_000);
        let r = lag1_joint(&xs, 100).unwrap();
        assert_eq!(r.counts.iter().sum::<u64>(), 999_999);
        assert!(r.p_value >= 0.01, "{}", r.p_value);
    }

    #[test]
    fn joint_of_two_streams_is_uniform() {
        let xs = floats(5, 1, 500_000);
        let ys = floats(5, 2, 500_000);
        let r = pairs_joint(xs.iter().cloned().zip(ys.iter().cloned()), 50).unwrap();
        assert!(r.p_value >= 0.01, "{}", r.p_value);
    }

    #[test]
    fn joint_detects_repetition() {
        let xs: Vec<f32> = floats(5, 3, 10_000).into_iter().flat_map(|x| [x, x]).collect();
        let r = lag1_joint(&xs, 10).unwrap();
        assert!(r.p_value < 1e-10);
        let constant = vec![0.25f32; 10_000];
        assert!(lag1_joint(&constant, 10).unwrap().p_value < 1e-10);
        assert!(lag1_joint(&[0.1], 10).is_err());
    }

    #[test]
    fn median_thresholding() {
        let ramp: Vec<f32> = (0..1000).map(|i| i as f32 / 1000.0).collect();
        let bits = median_threshold_bits(&ramp).unwrap();
        assert!(bits[..500].iter().all(|&b| b == 0));
        assert!(bits[500..].iter().all(|&b| b == 1));
        assert!(!runs_test(&bits).unwrap().passed);

        let constant = vec![0.3f32; 1000];
        let bits = median_threshold_bits(&constant).unwrap();
        assert!(bits.iter().all(|&b| b == 1));
        assert!(!monobit_test(&bits).unwrap().passed);

        let odd: Vec<f32> = (0..101).map(|i| i as f32).collect();
        let bits = median_threshold_bits(&odd).unwrap();
        assert_eq!(bits.iter().filter(|&&b| b == 1).count(), 51);

        assert!(median_threshold_bits(&ramp[..99]).is_err());
    }
}
