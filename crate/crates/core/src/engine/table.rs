use crate::error::{Error, Result};

const MANTISSA_MASK: u32 = 0x007F_FFFF;
const MANTISSA_SCALE: f64 = 8_388_608.0;

/// Metropolis acceptance ratios indexed by `8 * spin_bit + neighbor_up_count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTable {
    entries: [f32; 16],
    thresholds: [u32; 16],
}

impl ExpTable {
    /// `min(1, exp(-dE / T))` with `dE = 2 J s (2 n_up - 4)`, `s = 2 b - 1`.
    /// Codes with `n_up > 4` cannot occur and are left at zero.
    pub fn build(temperature: f64, j: f64) -> Result<Self> {
        if temperature.is_nan() || temperature <= 0.0 {
            return Err(Error::NonPositiveTemperature(temperature));
        }
        let mut entries = [0f32; 16];
        for b in 0..2 {
            let sigma = 2 * b - 1;
            for n_up in 0..=4 {
                let delta_e = 2.0 * j * f64::from(sigma) * f64::from(2 * n_up - 4);
                entries[(8 * b + n_up) as usize] = (-delta_e / temperature).exp().min(1.0) as f32;
            }
        }
        Ok(Self::from_entries(entries))
    }

    fn from_entries(entries: [f32; 16]) -> Self {
        // A shaped float is `u / 2^23` with `u` the low 23 bits of the raw
        // draw, so `u / 2^23 < p` exactly when `u < ceil(p * 2^23)`.
        let thresholds = entries.map(|p| (f64::from(p) * MANTISSA_SCALE).ceil() as u32);
        Self { entries, thresholds }
    }

    /// A table with every entry set to `p`; used to force or forbid flips.
    pub fn constant(p: f32) -> Self {
        Self::from_entries([p; 16])
    }

    #[inline(always)]
    pub fn get(&self, code: u16) -> f32 {
        self.entries[(code & 15) as usize]
    }

    /// Whether a raw 32-bit draw, shaped to a unit float, falls below the entry
    /// for `code`. Same answer as `shape_unit_float(raw) < self.get(code)`.
    #[inline(always)]
    pub fn accepts(&self, code: u16, raw: u32) -> bool {
        raw & MANTISSA_MASK < self.thresholds[(code & 15) as usize]
    }

    pub fn entries(&self) -> &[f32; 16] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::shape_unit_float;

    #[test]
    fn known_entries() {
        let t = ExpTable::build(2.0, 1.0).unwrap();
        assert!((t.get(8 + 4) as f64 - (-4f64).exp()).abs() < 1e-8);
        assert!((t.get(8 + 4) as f64 - 0.018316).abs() < 1e-6);
        assert!((t.get(8 + 3) as f64 - (-2f64).exp()).abs() < 1e-7);
        assert!((t.get(1) as f64 - (-2f64).exp()).abs() < 1e-7);
        assert!((t.get(0) as f64 - (-4f64).exp()).abs() < 1e-8);
        for temp in [0.1, 1.0, 2.269, 10.0] {
            let t = ExpTable::build(temp, 1.0).unwrap();
            assert_eq!(t.get(8 + 2), 1.0);
            assert_eq!(t.get(4), 1.0);
            for n_up in 2..=4 {
                assert_eq!(t.get(n_up), 1.0);
            }
            for n_up in 0..=2 {
                assert_eq!(t.get(8 + n_up), 1.0);
            }
            for unused in [5, 6, 7, 13, 14, 15] {
                assert_eq!(t.get(unused), 0.0);
            }
        }
    }

    #[test]
    fn integer_threshold_matches_float_compare() {
        let mut g = crate::rng::GeneratorState::new(77, 0);
        let mut tables: Vec<ExpTable> = [0.3, 1.0, 1.7, 2.269, 3.3, 50.0]
            .iter()
            .map(|&t| ExpTable::build(t, 1.0).unwrap())
            .collect();
        tables.extend([0.0, 1.0, 0.5, 1e-9].map(ExpTable::constant));
        for table in &tables {
            for code in 0..16u16 {
                let p = table.get(code);
                let edge = (f64::from(p) * MANTISSA_SCALE) as u32;
                let mut raws: Vec<u32> = (0..2000).map(|_| g.next_u64() as u32).collect();
                for u in edge.saturating_sub(2)..=edge + 2 {
                    raws.push(u.min(MANTISSA_MASK) | (g.next_u64() as u32 & !MANTISSA_MASK));
                }
                for raw in raws {
                    assert_eq!(
                        table.accepts(code, raw),
                        shape_unit_float(raw) < p,
                        "p={p} raw={raw:#x}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        assert!(ExpTable::build(0.0, 1.0).is_err());
        assert!(ExpTable::build(-2.0, 1.0).is_err());
        assert!(ExpTable::build(f64::NAN, 1.0).is_err());
    }
}
