//! A subset of the NIST SP 800-22 battery: frequency, block frequency, runs,
//! longest run of ones and cumulative sums. Bits are bytes holding 0 or 1.

use std::fmt;

use super::special::{erfc, gamma_q, normal_cdf};
use crate::error::{Error, Result};

pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub p_value: f64,
    pub passed: bool,
    pub len: usize,
}

impl TestReport {
    fn new(name: impl Into<String>, p_value: f64, len: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            name: name.into(),
            p_value,
            passed: p_value >= SIGNIFICANCE,
            len,
        }
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} n={:<10} p={:.6}  {}",
            self.name,
            self.len,
            self.p_value,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

fn require(test: &'static str, bits: &[u8], min: usize) -> Result<()> {
    if bits.len() < min {
        return Err(Error::TooShort {
            test,
            min,
            len: bits.len(),
        });
    }
    Ok(())
}

#[inline]
fn one(b: u8) -> bool {
    b != 0
}

pub fn monobit_test(bits: &[u8]) -> Result<TestReport> {
    require("monobit", bits, 100)?;
    let n = bits.len();
    let s: i64 = bits.iter().map(|&b| if one(b) { 1 } else { -1 }).sum();
    let s_obs = (s.abs() as f64) / (n as f64).sqrt();
    Ok(TestReport::new(
        "monobit",
        erfc(s_obs / std::f64::consts::SQRT_2),
        n,
    ))
}

/// Block size satisfying `M >= 20`, `M > n / 100` and fewer than 100 blocks.
pub fn default_block_size(n: usize) -> usize {
    (n / 99 + 1).max(20)
}

pub fn block_frequency_test(bits: &[u8], block: usize) -> Result<TestReport> {
    require("block frequency", bits, 100)?;
    if block == 0 || block > bits.len() {
        return Err(Error::Config(format!(
            "block size {block} invalid for {} bits",
            bits.len()
        )));
    }
    let blocks = bits.len() / block;
    let chi2: f64 = bits
        .chunks_exact(block)
        .map(|c| {
            let pi = c.iter().filter(|&&b| one(b)).count() as f64 / block as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * block as f64;
    Ok(TestReport::new(
        "block frequency",
        gamma_q(blocks as f64 / 2.0, chi2 / 2.0),
        bits.len(),
    ))
}

pub fn runs_test(bits: &[u8]) -> Result<TestReport> {
    require("runs", bits, 100)?;
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| one(b)).count() as f64 / n;
    // frequency prerequisite
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(TestReport::new("runs", 0.0, bits.len()));
    }
    let v = 1 + bits.windows(2).filter(|w| one(w[0]) != one(w[1])).count();
    let num = (v as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Ok(TestReport::new("runs", erfc(num / den), bits.len()))
}

struct LongestRunParams {
    block: usize,
    min_class: usize,
    probs: &'static [f64],
}

const LR_8: LongestRunParams = LongestRunParams {
    block: 8,
    min_class: 1,
    probs: &[0.2148, 0.3672, 0.2305, 0.1875],
};
const LR_128: LongestRunParams = LongestRunParams {
    block: 128,
    min_class: 4,
    probs: &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124],
};
const LR_10K: LongestRunParams = LongestRunParams {
    block: 10_000,
    min_class: 10,
    probs: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

pub fn longest_run_test(bits: &[u8]) -> Result<TestReport> {
    require("longest run", bits, 128)?;
    let n = bits.len();
    let params = if n < 6272 {
        &LR_8
    } else if n < 750_000 {
        &LR_128
    } else {
        &LR_10K
    };
    let k = params.probs.len();
    let mut counts = vec![0usize; k];
    let blocks = n / params.block;
    for chunk in bits.chunks_exact(params.block) {
        let (mut run, mut best) = (0usize, 0usize);
        for &b in chunk {
            if one(b) {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        let class = best.clamp(params.min_class, params.min_class + k - 1) - params.min_class;
        counts[class] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(params.probs)
        .map(|(&v, &p)| {
            let e = blocks as f64 * p;
            (v as f64 - e).powi(2) / e
        })
        .sum();
    Ok(TestReport::new(
        "longest run",
        gamma_q((k - 1) as f64 / 2.0, chi2 / 2.0),
        n,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CusumMode {
    Forward,
    Backward,
}

/// p-value of the cumulative sums statistic `z` over `n` bits. Summation
/// bounds use truncating integer division, as the reference code does.
pub(crate) fn cusum_p_value(n: usize, z: usize) -> f64 {
    let (n_i, z_i) = (n as i64, z as i64);
    let nf = n as f64;
    let zf = z as f64;
    let sqn = nf.sqrt();
    let mut sum1 = 0.0;
    let mut k = (-n_i / z_i + 1) / 4;
    while k <= (n_i / z_i - 1) / 4 {
        let kf = k as f64;
        sum1 += normal_cdf((4.0 * kf + 1.0) * zf / sqn);
        sum1 -= normal_cdf((4.0 * kf - 1.0) * zf / sqn);
        k += 1;
    }
    let mut sum2 = 0.0;
    let mut k = (-n_i / z_i - 3) / 4;
    while k <= (n_i / z_i - 1) / 4 {
        let kf = k as f64;
        sum2 += normal_cdf((4.0 * kf + 3.0) * zf / sqn);
        sum2 -= normal_cdf((4.0 * kf + 1.0) * zf / sqn);
        k += 1;
    }
    1.0 - sum1 + sum2
}

pub fn cusum_test(bits: &[u8], mode: CusumMode) -> Result<TestReport> {
    require("cumulative sums", bits, 100)?;
    let step = |b: &u8| if one(*b) { 1i64 } else { -1 };
    let z = {
        let (mut s, mut z) = (0i64, 0i64);
        let mut visit = |b: &u8| {
            s += step(b);
            z = z.max(s.abs());
        };
        match mode {
            CusumMode::Forward => bits.iter().for_each(&mut visit),
            CusumMode::Backward => bits.iter().rev().for_each(&mut visit),
        }
        z as usize
    };
    let name = match mode {
        CusumMode::Forward => "cusum (forward)",
        CusumMode::Backward => "cusum (backward)",
    };
    Ok(TestReport::new(name, cusum_p_value(bits.len(), z), bits.len()))
}

/// All implemented tests, cumulative sums in both directions.
pub fn run_battery(bits: &[u8]) -> Result<Vec<TestReport>> {
    Ok(vec![
        monobit_test(bits)?,
        block_frequency_test(bits, default_block_size(bits.len()))?,
        runs_test(bits)?,
        longest_run_test(bits)?,
        cusum_test(bits, CusumMode::Forward)?,
        cusum_test(bits, CusumMode::Backward)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GeneratorState;

    /// First 100 binary digits of pi.
    const PI_100: &str = "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn reference_examples_pi() {
        let e = bits(PI_100);
        let mono = monobit_test(&e).unwrap();
        assert!(close(mono.p_value, 0.109599, 1e-6), "{}", mono.p_value);
        assert!(close(
            mono.p_value,
            erfc(1.6 / std::f64::consts::SQRT_2),
            1e-14
        ));
        let bf = block_frequency_test(&e, 10).unwrap();
        assert!(close(bf.p_value, 0.706438, 1e-6), "{}", bf.p_value);
        let runs = runs_test(&e).unwrap();
        assert!(close(runs.p_value, 0.500798, 1e-6), "{}", runs.p_value);
        let fwd = cusum_test(&e, CusumMode::Forward).unwrap();
        assert!(close(fwd.p_value, 0.219194, 1e-6), "{}", fwd.p_value);
        let bwd = cusum_test(&e, CusumMode::Backward).unwrap();
        assert!(close(bwd.p_value, 0.114866, 1e-6), "{}", bwd.p_value);
    }

    #[test]
    fn cusum_short_example() {
        // 1011010111: partial sums peak at 4
        assert!(close(cusum_p_value(10, 4), 0.411_658_8, 1e-6));
    }

    #[test]
    fn longest_run_against_direct_chi_square() {
        let mut g = GeneratorState::new(11, 0);
        let e: Vec<u8> = (0..8 * 200).map(|_| g.next_bool() as u8).collect();
        let report = longest_run_test(&e).unwrap();
        // independent: count classes by string search and use statrs' Q
        let mut counts = [0f64; 4];
        for block in e.chunks_exact(8) {
            let s: String = block.iter().map(|b| (b'0' + b) as char).collect();
            let longest = (1..=8).rev().find(|&l| s.contains(&"1".repeat(l))).unwrap_or(0);
            counts[longest.clamp(1, 4) - 1] += 1.0;
        }
        let probs = [0.2148, 0.3672, 0.2305, 0.1875];
        let chi2: f64 = counts
            .iter()
            .zip(probs)
            .map(|(v, p)| (v - 200.0 * p).powi(2) / (200.0 * p))
            .sum();
        let p = statrs::function::gamma::gamma_ur(1.5, chi2 / 2.0);
        assert!(close(report.p_value, p, 1e-10));
    }

    #[test]
    fn preconditions() {
        let short = vec![1u8; 99];
        for err in [
            monobit_test(&short).unwrap_err(),
            runs_test(&short).unwrap_err(),
            cusum_test(&short, CusumMode::Forward).unwrap_err(),
            longest_run_test(&[0; 127]).unwrap_err(),
        ] {
            let msg = err.to_string();
            assert!(msg.contains("at least"), "{msg}");
        }
        assert!(block_frequency_test(&[0; 200], 0).is_err());
    }

    #[test]
    fn alternating_is_balanced_but_not_random() {
        let e: Vec<u8> = (0..1_000_000).map(|i| (i % 2) as u8).collect();
        let mono = monobit_test(&e).unwrap();
        assert!(mono.p_value > 0.999 && mono.passed);
        let runs = runs_test(&e).unwrap();
        assert!(runs.p_value < 1e-10 && !runs.passed);
    }

    #[test]
    fn all_zeros_fail() {
        let e = vec![0u8; 10_000];
        assert!(!monobit_test(&e).unwrap().passed);
        assert!(run_battery(&e).unwrap().iter().all(|r| !r.passed));
    }

    #[test]
    fn block_size_constraints() {
        for n in [100, 1000, 6_400_000, 8_388_608] {
            let m = default_block_size(n);
            assert!(m >= 20 && m * 100 > n && n / m < 100, "n={n} m={m}");
        }
    }

    #[test]
    fn pass_flag_follows_threshold() {
        let r = TestReport::new("x", 0.01, 10);
        assert!(r.passed);
        let r = TestReport::new("x", 0.009_999, 10);
        assert!(!r.passed);
    }
}
