//! Per-cell flip kernels and boundary updates.

use crate::bitkernels::{bit_above_word, bit_below_word, compact_word};
use crate::lattice::{ArrayCode, Color, LatticeDims, PackedArrays};

use super::ExpTable;

/// One quarter of a color update: the target array, the lateral partner
/// `a`, the vertical partner `b`, and the two orientation flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quarter {
    pub target: ArrayCode,
    pub lateral: ArrayCode,
    pub vertical: ArrayCode,
    pub up: bool,
    pub right: bool,
}

const fn q(target: ArrayCode, lateral: ArrayCode, vertical: ArrayCode, up: bool, right: bool) -> Quarter {
    Quarter {
        target,
        lateral,
        vertical,
        up,
        right,
    }
}

pub const FLIP_RED: [Quarter; 4] = [
    q(ArrayCode::RFE, ArrayCode::BFE, ArrayCode::BFO, false, false),
    q(ArrayCode::RBO, ArrayCode::BBO, ArrayCode::BBE, true, false),
    q(ArrayCode::RBE, ArrayCode::BBE, ArrayCode::BBO, false, true),
    q(ArrayCode::RFO, ArrayCode::BFO, ArrayCode::BFE, true, true),
];

pub const FLIP_BLUE: [Quarter; 4] = [
    q(ArrayCode::BFE, ArrayCode::RFE, ArrayCode::RFO, false, true),
    q(ArrayCode::BBO, ArrayCode::RBO, ArrayCode::RBE, true, true),
    q(ArrayCode::BBE, ArrayCode::RBE, ArrayCode::RBO, false, false),
    q(ArrayCode::BFO, ArrayCode::RFO, ArrayCode::RFE, true, false),
];

pub fn quarters(color: Color) -> &'static [Quarter; 4] {
    match color {
        Color::Red => &FLIP_RED,
        Color::Blue => &FLIP_BLUE,
    }
}

/// One boundary-update entry: the array, its fold partner, and the flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryCopy {
    pub array: ArrayCode,
    pub partner: ArrayCode,
    pub up: bool,
    pub right: bool,
}

const fn bc(array: ArrayCode, partner: ArrayCode, up: bool, right: bool) -> BoundaryCopy {
    BoundaryCopy {
        array,
        partner,
        up,
        right,
    }
}

pub const UPDATE_RED_BC: [BoundaryCopy; 4] = [
    bc(ArrayCode::RFE, ArrayCode::RBE, true, true),
    bc(ArrayCode::RBO, ArrayCode::RFO, false, true),
    bc(ArrayCode::RBE, ArrayCode::RFE, true, false),
    bc(ArrayCode::RFO, ArrayCode::RBO, false, false),
];

pub const UPDATE_BLUE_BC: [BoundaryCopy; 4] = [
    bc(ArrayCode::BFE, ArrayCode::BBE, true, false),
    bc(ArrayCode::BBO, ArrayCode::BFO, false, false),
    bc(ArrayCode::BBE, ArrayCode::BFE, true, true),
    bc(ArrayCode::BFO, ArrayCode::BBO, false, true),
];

pub fn boundary_copies(color: Color) -> &'static [BoundaryCopy; 4] {
    match color {
        Color::Red => &UPDATE_RED_BC,
        Color::Blue => &UPDATE_BLUE_BC,
    }
}

/// A deliberately broken adder that drops the third carry term.
pub(crate) fn faulty_add4(a: u16, b: u16, c: u16, d: u16) -> (u16, u16, u16) {
    let s1 = a ^ b;
    let c1 = a & b;
    let s2 = c ^ d;
    let c2 = c & d;
    (s1 ^ s2, c1 ^ c2, c1 & c2)
}

/// Read-only view of the other color's plane.
#[derive(Clone, Copy)]
pub(crate) struct Plane<'a> {
    pub words: &'a [u16],
    pub len: usize,
}

impl<'a> Plane<'a> {
    #[inline(always)]
    pub fn vector(&self, code: ArrayCode, cell: usize) -> &'a [u16] {
        let o = (cell * 4 + code.slot()) * self.len;
        &self.words[o..o + self.len]
    }
}

/// Right, left, top and bottom neighbor words of interior element `k` (0-based).
#[inline(always)]
fn neighbor_words(right: &[u16], left: &[u16], vertical: &[u16], up: bool, k: usize) -> [u16; 4] {
    let (top, bottom) = if up {
        (bit_above_word(vertical[k + 1], vertical[k + 2]), vertical[k + 1])
    } else {
        (vertical[k + 1], bit_below_word(vertical[k], vertical[k + 1]))
    };
    [right[k + 1], left[k + 1], top, bottom]
}

/// Lateral partner vectors `(right, left)` for a cell.
#[inline(always)]
fn lateral_pair<'a>(other: Plane<'a>, quarter: &Quarter, cell: usize) -> (&'a [u16], &'a [u16]) {
    if quarter.right {
        (other.vector(quarter.lateral, cell + 1), other.vector(quarter.lateral, cell))
    } else {
        (other.vector(quarter.lateral, cell), other.vector(quarter.lateral, cell - 1))
    }
}

/// The four neighbor vectors (interior length) of `quarter.target` at `cell`.
pub fn get_neighbors(arrays: &PackedArrays, quarter: &Quarter, cell: usize) -> [Vec<u16>; 4] {
    let dims = arrays.dims();
    let other = Plane {
        words: arrays.plane(quarter.lateral.color),
        len: dims.vector_len(),
    };
    let (right, left) = lateral_pair(other, quarter, cell);
    let vertical = other.vector(quarter.vertical, cell);
    let mut out: [Vec<u16>; 4] = Default::default();
    for k in 0..dims.words() {
        let w = neighbor_words(right, left, vertical, quarter.up, k);
        for (o, v) in out.iter_mut().zip(w) {
            o.push(v);
        }
    }
    out
}

/// Flip one quarter of one cell. Random numbers are drawn in the order
/// mask index `i`, then nibble `ii`, then word; `observe` sees each raw draw.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn flip_quarter<A, R, O>(
    target: &mut [u16],
    right: &[u16],
    left: &[u16],
    vertical: &[u16],
    up: bool,
    table: &ExpTable,
    adder: A,
    scratch: &mut Scratch,
    draw: &mut R,
    observe: &mut O,
) -> u64
where
    A: Fn(u16, u16, u16, u16) -> (u16, u16, u16),
    R: FnMut() -> u32,
    O: FnMut(usize, u32, u32),
{
    let words = target.len() - 2;
    scratch.resize(words);
    for k in 0..words {
        let [r, l, t, b] = neighbor_words(right, left, vertical, up, k);
        let (o, tw, f) = adder(r, l, t, b);
        scratch.ones[k] = o;
        scratch.twos[k] = tw;
        scratch.fours[k] = f;
    }
    let interior = &mut target[1..=words];
    let mut flips = 0u64;
    for i in 0..4 {
        for (k, &spins) in interior.iter().enumerate() {
            scratch.sum[k] = compact_word(scratch.ones[k], scratch.twos[k], scratch.fours[k], spins, i);
        }
        let sums = &scratch.sum[..words];
        for ii in 0..4 {
            let shift = 4 * ii + i;
            for (k, (word, &sum)) in interior.iter_mut().zip(sums).enumerate() {
                let raw = draw();
                observe(k + 1, shift as u32, raw);
                let accept = u16::from(table.accepts(sum >> (4 * ii), raw));
                *word ^= accept << shift;
                flips += u64::from(accept);
            }
        }
    }
    flips
}

#[derive(Debug, Default)]
pub(crate) struct Scratch {
    ones: Vec<u16>,
    twos: Vec<u16>,
    fours: Vec<u16>,
    sum: Vec<u16>,
}

impl Scratch {
    fn resize(&mut self, words: usize) {
        if self.sum.len() != words {
            self.ones.resize(words, 0);
            self.twos.resize(words, 0);
            self.fours.resize(words, 0);
            self.sum.resize(words, 0);
        }
    }
}

/// Flip every spin of `color` in worker cell `cell`. `block` is that cell's
/// four same-color vectors; `other` is the full opposite-color plane.
#[allow(clippy::too_many_arguments)]
pub(crate) fn flip_cell<A, R, O>(
    color: Color,
    cell: usize,
    block: &mut [u16],
    other: Plane<'_>,
    table: &ExpTable,
    adder: A,
    scratch: &mut Scratch,
    draw: &mut R,
    observe: &mut O,
) -> u64
where
    A: Fn(u16, u16, u16, u16) -> (u16, u16, u16) + Copy,
    R: FnMut() -> u32,
    O: FnMut(ArrayCode, usize, u32, u32),
{
    let len = other.len;
    let mut flips = 0;
    for quarter in quarters(color) {
        let slot = quarter.target.slot();
        let target = &mut block[slot * len..(slot + 1) * len];
        let (right, left) = lateral_pair(other, quarter, cell);
        let vertical = other.vector(quarter.vertical, cell);
        flips += flip_quarter(
            target,
            right,
            left,
            vertical,
            quarter.up,
            table,
            adder,
            scratch,
            draw,
            &mut |word, bit, r| observe(quarter.target, word, bit, r),
        );
    }
    flips
}

/// Sum of `s_i s_j` over all bonds. Every bond has exactly one red end, so
/// each is counted once by scanning the four neighbors of every red word.
/// Needs current blue halos and moats.
pub(crate) fn bond_sum(arrays: &PackedArrays) -> i64 {
    let dims = arrays.dims();
    let len = dims.vector_len();
    let blue = Plane {
        words: arrays.plane(Color::Blue),
        len,
    };
    let mut total = 0i64;
    for quarter in &FLIP_RED {
        for cell in 1..=dims.cells() {
            let spins = arrays.vector(quarter.target, cell);
            let (right, left) = lateral_pair(blue, quarter, cell);
            let vertical = blue.vector(quarter.vertical, cell);
            for k in 0..dims.words() {
                for nb in neighbor_words(right, left, vertical, quarter.up, k) {
                    let agree = (!(spins[k + 1] ^ nb)).count_ones() as i64;
                    total += 2 * agree - 16;
                }
            }
        }
    }
    total
}

/// Boundary update for one color: vertical wrap of halo words in every
/// worker cell, then the moat copies from the fold partner.
pub(crate) fn update_bc(arrays: &mut PackedArrays, color: Color) {
    let dims: LatticeDims = arrays.dims();
    let len = dims.vector_len();
    let cells = dims.cells();
    let plane = arrays.plane_mut(color);
    let at = |code: ArrayCode, cell: usize| (cell * 4 + code.slot()) * len;
    for copy in boundary_copies(color) {
        for cell in 1..=cells {
            let o = at(copy.array, cell);
            if copy.up {
                plane[o + len - 1] = plane[o + 1];
            } else {
                plane[o] = plane[o + len - 2];
            }
        }
        let (moat, source) = if copy.right {
            (cells + 1, cells)
        } else {
            (0, 1)
        };
        let src = at(copy.partner, source);
        let dst = at(copy.array, moat);
        plane.copy_within(src + 1..src + len - 1, dst + 1);
    }
}
