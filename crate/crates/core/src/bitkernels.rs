//! Word-level primitives of the flip kernel.
//!
//! The `*_word` functions are what the engine calls in its inner loop; the
//! vector forms map them over a whole [`WordVector`] (halo words included) and
//! exist for inspection and testing.

use crate::error::{Error, Result};

/// A cell column: 16-bit words, halo words at both ends.
pub type WordVector = [u16];

/// Masks selecting every fourth bit, offset by the mask index.
pub const NIBBLE_MASKS: [u16; 4] = [0x1111, 0x2222, 0x4444, 0x8888];

/// Bit `t` of the result is the spin one row above bit `t` of `mid`: bits
/// `0..15` come from `mid`, bit 15 from bit 0 of `above`.
#[inline(always)]
pub fn bit_above_word(mid: u16, above: u16) -> u16 {
    (above << 15) | (mid >> 1)
}

/// Mirror of [`bit_above_word`]: bit 0 comes from bit 15 of `below`.
#[inline(always)]
pub fn bit_below_word(below: u16, mid: u16) -> u16 {
    (below >> 15) | (mid << 1)
}

/// Per-bit sum of four one-bit inputs as ones, twos and fours place values.
#[inline(always)]
pub fn add4_word(a: u16, b: u16, c: u16, d: u16) -> (u16, u16, u16) {
    let s1 = a ^ b;
    let c1 = a & b;
    let s2 = c ^ d;
    let c2 = c & d;
    let ones = s1 ^ s2;
    let c3 = s1 & s2;
    let twos = c1 ^ c2 ^ c3;
    let fours = (c1 & c2) | (c1 & c3) | (c2 & c3);
    (ones, twos, fours)
}

/// Gathers the bits at positions `4 ii + i` into nibble `ii`: bits 0..2 hold
/// the neighbor up-count, bit 3 the spin itself.
#[inline(always)]
pub fn compact_word(ones: u16, twos: u16, fours: u16, spin: u16, i: usize) -> u16 {
    let mask = NIBBLE_MASKS[i];
    ((ones & mask) >> i)
        + (((twos & mask) >> i) << 1)
        + (((fours & mask) >> i) << 2)
        + (((spin & mask) >> i) << 3)
}

fn check_len(v: &WordVector) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::Size(format!(
            "word vector needs at least 3 elements, got {}",
            v.len()
        )));
    }
    Ok(())
}

/// Neighbors one row up for every interior element; length `L - 2`.
pub fn get_bit_above(v: &WordVector) -> Result<Vec<u16>> {
    check_len(v)?;
    Ok(v[1..]
        .windows(2)
        .map(|w| bit_above_word(w[0], w[1]))
        .collect())
}

/// Neighbors one row down for every interior element; length `L - 2`.
pub fn get_bit_below(v: &WordVector) -> Result<Vec<u16>> {
    check_len(v)?;
    Ok(v[..v.len() - 1]
        .windows(2)
        .map(|w| bit_below_word(w[0], w[1]))
        .collect())
}

pub type PlaceValues = (Vec<u16>, Vec<u16>, Vec<u16>);

pub fn bitwise_add4(a: &[u16], b: &[u16], c: &[u16], d: &[u16]) -> Result<PlaceValues> {
    let n = a.len();
    if b.len() != n || c.len() != n || d.len() != n {
        return Err(Error::Size(format!(
            "adder inputs differ in length: {}, {}, {}, {}",
            n,
            b.len(),
            c.len(),
            d.len()
        )));
    }
    let mut out = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let (o, t, f) = add4_word(a[k], b[k], c[k], d[k]);
        out.0.push(o);
        out.1.push(t);
        out.2.push(f);
    }
    Ok(out)
}

pub fn nibble_compact(
    ones: &[u16],
    twos: &[u16],
    fours: &[u16],
    spins: &[u16],
    i: usize,
) -> Result<Vec<u16>> {
    if i >= 4 {
        return Err(Error::OutOfRange {
            what: "mask index",
            value: i,
            bound: 4,
        });
    }
    let n = ones.len();
    if twos.len() != n || fours.len() != n || spins.len() != n {
        return Err(Error::Size("nibble inputs differ in length".into()));
    }
    Ok((0..n)
        .map(|k| compact_word(ones[k], twos[k], fours[k], spins[k], i))
        .collect())
}
