use std::io::{self, Write};

use crate::observables::Trajectory;

pub const CSV_HEADER: &str = "sweep,sim,temperature,abs_magnetization,energy_per_spin";

/// `x` with `digits` significant digits in the style of C's `%g`: fixed
/// notation for decimal exponents in `[-5, digits)`, scientific otherwise,
/// trailing zeros removed. Always uses `.` as the decimal separator.
pub fn format_g(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn g9(x: f64) -> String {
    format_g(x, 9)
}

pub fn write_csv<W: Write + ?Sized>(out: &mut W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in trajectory.records() {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.sweep,
            r.sim,
            g9(trajectory.temperatures[r.sim]),
            g9(r.abs_magnetization),
            g9(r.energy_per_spin)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_printf() {
        // reference strings from printf("%.9g")
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (2.05, "2.05"),
            (0.1 + 0.2, "0.3"),
            (-1.9921875, "-1.9921875"),
            (0.986_503_010_1, "0.98650301"),
            (2.269_185_314_213_022, "2.26918531"),
            (123_456_789.0, "123456789"),
            (1_234_567_890.0, "1.23456789e+09"),
            (0.000_123_456_789_12, "0.000123456789"),
            (0.000_012_345_678_912, "1.23456789e-05"),
            (1e-300, "1e-300"),
            (999_999_999.5, "1e+09"),
            (0.999_999_999_7, "1"),
            (-2.0, "-2"),
            (100.0, "100"),
        ];
        for (x, want) in cases {
            assert_eq!(g9(x), want, "{x}");
        }
        assert_eq!(format_g(1.23456, 3), "1.23");
    }
}
