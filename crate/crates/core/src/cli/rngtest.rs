use std::io::Write;
use std::path::{Path, PathBuf};

use super::format::g9;
use crate::error::{Error, Result};
use crate::rng::{
    frequency_histogram, generator_bits, lag1_joint, median_threshold_bits, run_battery,
    unit_floats, GeneratorState, TestReport, SIGNIFICANCE,
};

/// Spread limits for the float histograms, keyed by bin width.
pub const SPREAD_LIMITS: [(f64, f64); 2] = [(0.01, 0.08), (0.1, 0.02)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RngSource {
    Internal { seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RngTestOptions {
    pub bits: usize,
    pub floats: usize,
    pub median_floats: usize,
    /// Also write one CSV row per check here.
    pub rows: Option<PathBuf>,
}

pub const ROWS_HEADER: &str = "sample,check,n,value,limit,passed";

/// One machine-readable result row. `value` is a p-value for the battery
/// tests and a relative spread for the histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sample: String,
    pub check: String,
    pub n: usize,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

fn battery_rows(sample: &str, reports: &[TestReport]) -> Vec<Row> {
    reports
        .iter()
        .map(|r| Row {
            sample: sample.into(),
            check: r.name.clone(),
            n: r.len,
            value: r.p_value,
            limit: SIGNIFICANCE,
            passed: r.passed,
        })
        .collect()
}

fn write_rows(path: &Path, rows: &[Row]) -> Result<()> {
    let mut text = format!("{ROWS_HEADER}\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.sample,
            r.check,
            r.n,
            g9(r.value),
            g9(r.limit),
            r.passed
        ));
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a bit sequence. Text files of `0`, `1` and whitespace give one bit
/// per digit; anything that is not text is taken as raw bytes, most
/// significant bit first.
pub fn read_bit_file(path: &Path) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_text = bytes
        .iter()
        .all(|&b| b.is_ascii_graphic() || b.is_ascii_whitespace());
    if !is_text {
        return Ok(bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |k| b >> k & 1))
            .collect());
    }
    let mut bits = Vec::with_capacity(bytes.len());
    for (k, line) in bytes.split(|&b| b == b'\n').enumerate() {
        for (col, &b) in line.iter().enumerate() {
            match b {
                b'0' => bits.push(0),
                b'1' => bits.push(1),
                b if b.is_ascii_whitespace() => {}
                other => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: k + 1,
                        msg: format!(
                            "column {}: expected 0 or 1, found `{}`",
                            col + 1,
                            other as char
                        ),
                    })
                }
            }
        }
    }
    Ok(bits)
}

fn write_battery(out: &mut dyn Write, title: &str, reports: &[TestReport]) -> std::io::Result<bool> {
    writeln!(out, "{title}")?;
    for r in reports {
        writeln!(out, "  {r}")?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

/// Run the battery and, for the internal generator, the float checks.
/// Returns whether everything passed.
pub fn rngtest(source: &RngSource, options: &RngTestOptions, out: &mut dyn Write) -> Result<bool> {
    let io = |source| Error::Io {
        path: "<report>".into(),
        source,
    };
    let mut ok = true;
    let mut rows = Vec::new();
    match source {
        RngSource::File(path) => {
            let bits = read_bit_file(path)?;
            let reports = run_battery(&bits)?;
            let title = format!("{}: {} bits, significance {SIGNIFICANCE}", path.display(), bits.len());
            ok &= write_battery(out, &title, &reports).map_err(io)?;
            rows.extend(battery_rows("file", &reports));
        }
        RngSource::Internal { seed } => {
            let mut rng = GeneratorState::new(*seed, 0);
            let bits = generator_bits(&mut rng, options.bits);
            let reports = run_battery(&bits)?;
            let title = format!(
                "internal generator (seed {seed}): {} bits, significance {SIGNIFICANCE}",
                bits.len()
            );
            ok &= write_battery(out, &title, &reports).map_err(io)?;
            rows.extend(battery_rows("bits", &reports));

            let mut rng = GeneratorState::new(*seed, 1);
            let floats = unit_floats(&mut rng, options.floats);
            writeln!(out, "shaped floats: {}", floats.len()).map_err(io)?;
            for (width, limit) in SPREAD_LIMITS {
                let h = frequency_histogram(&floats, width)?;
                let pass = h.within(limit);
                ok &= pass;
                rows.push(Row {
                    sample: "floats".into(),
                    check: format!("spread bin {width}"),
                    n: floats.len(),
                    value: h.spread,
                    limit,
                    passed: pass,
                });
                writeln!(
                    out,
                    "  frequency spread, bin {width}: {:.2}% (limit {:.0}%)  {}",
                    100.0 * h.spread,
                    100.0 * limit,
                    if pass { "PASS" } else { "FAIL" }
                )
                .map_err(io)?;
            }
            let joint = lag1_joint(&floats, 10)?;
            let pass = joint.p_value >= SIGNIFICANCE;
            ok &= pass;
            rows.push(Row {
                sample: "floats".into(),
                check: "lag-1 pairs".into(),
                n: floats.len(),
                value: joint.p_value,
                limit: SIGNIFICANCE,
                passed: pass,
            });
            writeln!(
                out,
                "  lag-1 pairs, 10x10 bins: chi2 = {:.2}, p = {:.6}  {}",
                joint.chi_square,
                joint.p_value,
                if pass { "PASS" } else { "FAIL" }
            )
            .map_err(io)?;

            let mut rng = GeneratorState::new(*seed, 2);
            let floats = unit_floats(&mut rng, options.median_floats);
            let bits = median_threshold_bits(&floats)?;
            let reports = run_battery(&bits)?;
            let title = format!("{} floats thresholded at their median", floats.len());
            ok &= write_battery(out, &title, &reports).map_err(io)?;
            rows.extend(battery_rows("median floats", &reports));
        }
    }
    if let Some(path) = &options.rows {
        write_rows(path, &rows)?;
    }
    writeln!(out, "overall: {}", if ok { "PASS" } else { "FAIL" }).map_err(io)?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_text_and_binary() {
        let dir = tempfile::tempdir().unwrap();
        let text = dir.path().join("bits.txt");
        std::fs::write(&text, "0101 1\n\n 10\n").unwrap();
        assert_eq!(read_bit_file(&text).unwrap(), vec![0, 1, 0, 1, 1, 1, 0]);
        let bin = dir.path().join("bits.bin");
        std::fs::write(&bin, [0xA5u8, 0x00, 0xFF]).unwrap();
        let bits = read_bit_file(&bin).unwrap();
        assert_eq!(&bits[..8], &[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(bits.len(), 24);
    }

    #[test]
    fn bad_digit_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bits.txt");
        std::fs::write(&path, "0101\n0120\n").unwrap();
        let e = read_bit_file(&path).unwrap_err().to_string();
        assert!(e.contains(":2:") && e.contains("column 3"), "{e}");
    }

    #[test]
    fn all_zero_file_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.txt");
        std::fs::write(&path, "0".repeat(20_000)).unwrap();
        let mut out = Vec::new();
        let rows = dir.path().join("rows.csv");
        let opts = RngTestOptions {
            rows: Some(rows.clone()),
            ..Default::default()
        };
        assert!(!rngtest(&RngSource::File(path), &opts, &mut out).unwrap());
        let text = String::from_utf8(out).unwrap();
        assert!(text.lines().any(|l| l.contains("monobit") && l.ends_with("FAIL")), "{text}");
        let rows = std::fs::read_to_string(rows).unwrap();
        let mut lines = rows.lines();
        assert_eq!(lines.next(), Some(ROWS_HEADER));
        assert!(lines.next().unwrap().starts_with("file,monobit,20000,"), "{rows}");
        assert_eq!(rows.lines().count(), 7);
    }
}
