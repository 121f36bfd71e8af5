//! Random bit generation, unit-float shaping and randomness-quality tests.
//!
//! The generator is xoshiro256++ seeded through splitmix64. Every stream is
//! identified by a `(master seed, stream index)` lineage so that each cell of
//! each simulation owns an independent, reproducible stream.

mod floats;
mod nist;
pub mod special;

pub use floats::{
    frequency_histogram, lag1_joint, median_threshold_bits, pairs_joint, FrequencyReport,
    JointReport,
};
pub use nist::{
    block_frequency_test, cusum_test, default_block_size, longest_run_test, monobit_test,
    run_battery, runs_test, CusumMode, TestReport, SIGNIFICANCE,
};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The splitmix64 sequence, used only to expand seeds.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }
}

/// xoshiro256++ state plus the lineage it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorState {
    s: [u64; 4],
    master: u64,
    stream: u64,
}

impl GeneratorState {
    /// Stream `stream` of master seed `master`.
    pub fn new(master: u64, stream: u64) -> Self {
        let mut outer = SplitMix64::new(master);
        let key = outer.next_u64() ^ mix64(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        let mut inner = SplitMix64::new(key);
        let mut s = [0u64; 4];
        for w in &mut s {
            *w = inner.next_u64();
        }
        if s == [0; 4] {
            s[0] = GOLDEN_GAMMA;
        }
        Self { s, master, stream }
    }

    /// Raw state, bypassing seeding. The all-zero state is rejected.
    pub fn from_state(s: [u64; 4]) -> Result<Self> {
        if s == [0; 4] {
            return Err(Error::Config("xoshiro256++ state must not be all zero".into()));
        }
        Ok(Self {
            s,
            master: 0,
            stream: 0,
        })
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// The top `k` bits of the next output.
    pub fn next_bits(&mut self, k: u32) -> Result<u64> {
        if !(1..=64).contains(&k) {
            return Err(Error::OutOfRange {
                what: "bit count",
                value: k as usize,
                bound: 65,
            });
        }
        Ok(self.next_u64() >> (64 - k))
    }

    #[inline]
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// A unit float built from the top 32 bits of the next output.
    #[inline]
    pub fn next_unit_f32(&mut self) -> f32 {
        shape_unit_float((self.next_u64() >> 32) as u32)
    }

    /// Advance by 2^128 steps.
    pub fn jump(&mut self) {
        const JUMP: [u64; 4] = [
            0x180e_c6d3_3cfd_0aba,
            0xd5a6_1266_f0c9_392c,
            0xa958_2618_e03f_c9aa,
            0x39ab_dc45_29b1_661c,
        ];
        let mut acc = [0u64; 4];
        for word in JUMP {
            for b in 0..64 {
                if word >> b & 1 == 1 {
                    for (a, s) in acc.iter_mut().zip(self.s.iter()) {
                        *a ^= *s;
                    }
                }
                self.next_u64();
            }
        }
        self.s = acc;
    }
}

/// `count` bits from successive outputs, most significant bit first.
pub fn generator_bits(rng: &mut GeneratorState, count: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word = rng.next_u64();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|k| (word >> (63 - k) & 1) as u8));
    }
    bits
}

pub fn unit_floats(rng: &mut GeneratorState, count: usize) -> Vec<f32> {
    (0..count).map(|_| rng.next_unit_f32()).collect()
}

/// Keep the low 23 bits as a mantissa, set the exponent of 1.0 and subtract
/// 1.0. The result lies in `[0, 1)` on a grid of `2^-23`.
#[inline]
pub fn shape_unit_float(raw: u32) -> f32 {
    f32::from_bits((raw & 0x007F_FFFF) | 0x3F80_0000) - 1.0
}
