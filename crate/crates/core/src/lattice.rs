//! Lattice geometry and the eight-array packed representation.
//!
//! Spins live on an `m x n` periodic lattice. The cell axis (`c`, extent `m`) is
//! distributed across worker cells; the memory axis (`r`, extent `n`) is held in
//! each cell's word vectors. The linear spin index is `idx = c * n + r`.
//!
//! The packed form splits the lattice by checkerboard color, row parity and fold
//! direction into eight arrays. Each array is a row of `m/4 + 2` cell columns
//! (the first and last are moats) and every column is a vector of `n/32 + 2`
//! 16-bit words (the first and last are halo words). Bit `t` of interior word
//! `w` holds row `r = 32 (w - 1) + 2 t + p`, with `p = 1` for odd arrays.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::GeneratorState;

/// Spins per packed word.
pub const SPINS_PER_WORD: usize = 16;

/// Critical temperature of the infinite square lattice, in units of `J`.
pub const CRITICAL_TEMPERATURE: f64 = 2.269_185_314_213_022;

/// Lattice extents. `m` runs along the cell axis, `n` along the memory axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeDims {
    m: usize,
    n: usize,
}

impl LatticeDims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(4) || n < 32 || !n.is_multiple_of(32) {
            return Err(Error::InvalidDims { m, n });
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spins(&self) -> usize {
        self.m * self.n
    }

    /// Worker cells, `m / 4`.
    pub fn cells(&self) -> usize {
        self.m / 4
    }

    /// Cell columns including both moats, `m / 4 + 2`.
    pub fn cell_columns(&self) -> usize {
        self.m / 4 + 2
    }

    /// Interior words per cell vector, `n / 32`.
    pub fn words(&self) -> usize {
        self.n / 32
    }

    /// Full vector length including both halo words, `n / 32 + 2`.
    pub fn vector_len(&self) -> usize {
        self.n / 32 + 2
    }

    pub fn is_moat(&self, cell: usize) -> bool {
        cell == 0 || cell == self.cells() + 1
    }
}

impl fmt::Display for LatticeDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
        }
    }

    /// Checkerboard color of lattice site `(c, r)`.
    pub fn of_site(c: usize, r: usize) -> Self {
        if (c + r).is_multiple_of(2) {
            Color::Red
        } else {
            Color::Blue
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// One of the eight packed arrays, e.g. `RFE` (red, forward, even).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayCode {
    pub color: Color,
    pub direction: Direction,
    pub parity: Parity,
}

macro_rules! code {
    ($c:ident, $d:ident, $p:ident) => {
        ArrayCode {
            color: Color::$c,
            direction: Direction::$d,
            parity: Parity::$p,
        }
    };
}

impl ArrayCode {
    pub const RFE: ArrayCode = code!(Red, Forward, Even);
    pub const RBO: ArrayCode = code!(Red, Backward, Odd);
    pub const RBE: ArrayCode = code!(Red, Backward, Even);
    pub const RFO: ArrayCode = code!(Red, Forward, Odd);
    pub const BFE: ArrayCode = code!(Blue, Forward, Even);
    pub const BBO: ArrayCode = code!(Blue, Backward, Odd);
    pub const BBE: ArrayCode = code!(Blue, Backward, Even);
    pub const BFO: ArrayCode = code!(Blue, Forward, Odd);

    /// All codes, in the order the flip kernels visit them: the four red
    /// arrays, then the four blue arrays.
    pub const ALL: [ArrayCode; 8] = [
        Self::RFE,
        Self::RBO,
        Self::RBE,
        Self::RFO,
        Self::BFE,
        Self::BBO,
        Self::BBE,
        Self::BFO,
    ];

    /// Position within [`ArrayCode::ALL`].
    pub fn index(self) -> usize {
        let color = match self.color {
            Color::Red => 0,
            Color::Blue => 4,
        };
        let rest = match (self.direction, self.parity) {
            (Direction::Forward, Parity::Even) => 0,
            (Direction::Backward, Parity::Odd) => 1,
            (Direction::Backward, Parity::Even) => 2,
            (Direction::Forward, Parity::Odd) => 3,
        };
        color + rest
    }

    /// Position among the four arrays of the same color.
    pub fn slot(self) -> usize {
        self.index() % 4
    }

    pub fn from_slot(color: Color, slot: usize) -> Self {
        let base = match color {
            Color::Red => 0,
            Color::Blue => 4,
        };
        Self::ALL[base + slot]
    }

    /// The same color and parity on the other side of the fold.
    pub fn fold_partner(self) -> Self {
        let direction = match self.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        };
        Self { direction, ..self }
    }

    /// Parity of the lattice column `c` for every spin in this array.
    fn column_parity(self) -> usize {
        let blue = usize::from(self.color == Color::Blue);
        blue ^ self.parity.offset()
    }

    /// Parity of the column counted along this array's own fold direction.
    fn frame_parity(self) -> usize {
        match self.direction {
            Direction::Forward => self.column_parity(),
            // m is even, so m - 1 - c flips the parity
            Direction::Backward => 1 - self.column_parity(),
        }
    }

    /// True when readers in cell `g` take this array from cells `g` and
    /// `g + 1`; false when they take it from `g` and `g - 1`.
    pub fn read_from_next_cell(self) -> bool {
        self.frame_parity() == 0
    }
}

impl fmt::Display for ArrayCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.color {
            Color::Red => 'R',
            Color::Blue => 'B',
        };
        let d = match self.direction {
            Direction::Forward => 'F',
            Direction::Backward => 'B',
        };
        let p = match self.parity {
            Parity::Even => 'E',
            Parity::Odd => 'O',
        };
        write!(f, "{c}{d}{p}")
    }
}

impl FromStr for ArrayCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        let bad = || Error::Config(format!("unknown array code {s:?}"));
        if b.len() != 3 {
            return Err(bad());
        }
        let color = match b[0] {
            b'R' => Color::Red,
            b'B' => Color::Blue,
            _ => return Err(bad()),
        };
        let direction = match b[1] {
            b'F' => Direction::Forward,
            b'B' => Direction::Backward,
            _ => return Err(bad()),
        };
        let parity = match b[2] {
            b'E' => Parity::Even,
            b'O' => Parity::Odd,
            _ => return Err(bad()),
        };
        Ok(ArrayCode {
            color,
            direction,
            parity,
        })
    }
}

/// Location of one interior word: array, 1-based cell, 1-based word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordCoord {
    pub code: ArrayCode,
    pub cell: usize,
    pub word: usize,
}

/// Location of one spin inside the packed arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinCoord {
    pub code: ArrayCode,
    pub cell: usize,
    pub word: usize,
    pub bit: u32,
}

impl SpinCoord {
    pub fn word_coord(&self) -> WordCoord {
        WordCoord {
            code: self.code,
            cell: self.cell,
            word: self.word,
        }
    }
}

/// Locate spin `idx` in the packed arrays.
pub fn classify(idx: usize, dims: LatticeDims) -> Result<SpinCoord> {
    if idx >= dims.spins() {
        return Err(Error::OutOfRange {
            what: "spin index",
            value: idx,
            bound: dims.spins(),
        });
    }
    let (m, n) = (dims.m, dims.n);
    let c = idx / n;
    let r = idx % n;
    let color = Color::of_site(c, r);
    let parity = if r.is_multiple_of(2) { Parity::Even } else { Parity::Odd };
    let (direction, cell) = if c < m / 2 {
        (Direction::Forward, c / 2 + 1)
    } else {
        (Direction::Backward, (m - 1 - c) / 2 + 1)
    };
    Ok(SpinCoord {
        code: ArrayCode {
            color,
            direction,
            parity,
        },
        cell,
        word: r / 32 + 1,
        bit: ((r % 32) / 2) as u32,
    })
}

/// Inverse of [`classify`].
pub fn unclassify(coord: SpinCoord, dims: LatticeDims) -> Result<usize> {
    let cells = dims.cells();
    if coord.cell == 0 || coord.cell > cells {
        return Err(Error::OutOfRange {
            what: "cell",
            value: coord.cell,
            bound: cells + 1,
        });
    }
    if coord.word == 0 || coord.word > dims.words() {
        return Err(Error::OutOfRange {
            what: "word",
            value: coord.word,
            bound: dims.words() + 1,
        });
    }
    if coord.bit as usize >= SPINS_PER_WORD {
        return Err(Error::OutOfRange {
            what: "bit",
            value: coord.bit as usize,
            bound: SPINS_PER_WORD,
        });
    }
    Ok(site_index(coord.code, coord.cell, coord.word, coord.bit, dims))
}

/// Unchecked coordinate to index map; the cell may be a moat, in which case
/// the column is taken from the array's own fold frame and wrapped periodically.
fn site_index(code: ArrayCode, cell: usize, word: usize, bit: u32, dims: LatticeDims) -> usize {
    let m = dims.m as isize;
    let frame = 2 * (cell as isize - 1) + code.frame_parity() as isize;
    let c = match code.direction {
        Direction::Forward => frame,
        Direction::Backward => m - 1 - frame,
    }
    .rem_euclid(m) as usize;
    let r = 32 * (word - 1) + 2 * bit as usize + code.parity.offset();
    c * dims.n + r
}

/// Where a halo or moat word of a boundary-updated array takes its data from.
///
/// Interior words of worker cells map to themselves. Top halos of even arrays
/// wrap to the first interior word and bottom halos of odd arrays wrap to the
/// last one. Moat columns hold the column that lies one step past the array's
/// edge, taken from whichever array owns it (the fold partner, or the partner
/// across the periodic edge), but only on the side the flip kernels read.
/// Everything else is never read and holds zero.
pub fn canonical_halo_source(
    code: ArrayCode,
    cell: usize,
    element: usize,
    dims: LatticeDims,
) -> Option<WordCoord> {
    let words = dims.words();
    let cells = dims.cells();
    assert!(cell <= cells + 1 && element <= words + 1);
    let halo = element == 0 || element == words + 1;
    match (dims.is_moat(cell), halo) {
        (false, false) => Some(WordCoord {
            code,
            cell,
            word: element,
        }),
        (true, true) => None,
        (false, true) => match (code.parity, element == 0) {
            (Parity::Even, false) => Some(WordCoord {
                code,
                cell,
                word: 1,
            }),
            (Parity::Odd, true) => Some(WordCoord {
                code,
                cell,
                word: words,
            }),
            _ => None,
        },
        (true, false) => {
            let read = if cell == 0 {
                !code.read_from_next_cell()
            } else {
                code.read_from_next_cell()
            };
            if !read {
                return None;
            }
            let idx = site_index(code, cell, element, 0, dims);
            let source = classify(idx, dims).expect("wrapped index is in range");
            debug_assert_eq!(source.bit, 0);
            Some(source.word_coord())
        }
    }
}

/// Plain `±1` lattice, indexed by `idx = c * n + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainLattice {
    dims: LatticeDims,
    spins: Vec<i8>,
}

impl PlainLattice {
    pub fn filled(dims: LatticeDims, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        Self {
            dims,
            spins: vec![spin; dims.spins()],
        }
    }

    pub fn from_fn(dims: LatticeDims, mut f: impl FnMut(usize) -> i8) -> Self {
        let spins = (0..dims.spins())
            .map(|i| {
                let s = f(i);
                assert!(s == 1 || s == -1, "spin must be +1 or -1");
                s
            })
            .collect();
        Self { dims, spins }
    }

    pub fn from_spins(dims: LatticeDims, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != dims.spins() {
            return Err(Error::Size(format!(
                "expected {} spins, got {}",
                dims.spins(),
                spins.len()
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Size("spins must be +1 or -1".into()));
        }
        Ok(Self { dims, spins })
    }

    /// Uniformly random spins, one random bit per site in index order.
    pub fn random(dims: LatticeDims, rng: &mut GeneratorState) -> Self {
        Self::from_fn(dims, |_| if rng.next_bool() { 1 } else { -1 })
    }

    /// Perfect checkerboard: red sites up, blue sites down.
    pub fn checkerboard(dims: LatticeDims) -> Self {
        let n = dims.n;
        Self::from_fn(dims, |i| match Color::of_site(i / n, i % n) {
            Color::Red => 1,
            Color::Blue => -1,
        })
    }

    pub fn dims(&self) -> LatticeDims {
        self.dims
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn get(&self, idx: usize) -> i8 {
        self.spins[idx]
    }

    pub fn at(&self, c: usize, r: usize) -> i8 {
        self.spins[c * self.dims.n + r]
    }

    pub fn set(&mut self, idx: usize, spin: i8) {
        assert!(spin == 1 || spin == -1);
        self.spins[idx] = spin;
    }

    pub fn flip(&mut self, idx: usize) {
        self.spins[idx] = -self.spins[idx];
    }

    pub fn up_count(&self) -> usize {
        self.spins.iter().filter(|&&s| s == 1).count()
    }
}

/// The eight arrays with halo and moat storage.
///
/// Each color is stored as one plane laid out `[cell][slot][element]`, so a
/// cell's four same-color vectors are contiguous and a color can be mutated
/// while the other is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedArrays {
    dims: LatticeDims,
    red: Vec<u16>,
    blue: Vec<u16>,
}

impl PackedArrays {
    pub fn zeroed(dims: LatticeDims) -> Self {
        let len = dims.cell_columns() * 4 * dims.vector_len();
        Self {
            dims,
            red: vec![0; len],
            blue: vec![0; len],
        }
    }

    pub fn dims(&self) -> LatticeDims {
        self.dims
    }

    /// Words per cell within one color plane.
    pub fn cell_stride(&self) -> usize {
        4 * self.dims.vector_len()
    }

    pub fn plane(&self, color: Color) -> &[u16] {
        match color {
            Color::Red => &self.red,
            Color::Blue => &self.blue,
        }
    }

    pub fn plane_mut(&mut self, color: Color) -> &mut [u16] {
        match color {
            Color::Red => &mut self.red,
            Color::Blue => &mut self.blue,
        }
    }

    /// Mutable plane of `color` alongside the other color's plane.
    pub fn split_mut(&mut self, color: Color) -> (&mut [u16], &[u16]) {
        match color {
            Color::Red => (&mut self.red, &self.blue),
            Color::Blue => (&mut self.blue, &self.red),
        }
    }

    fn offset(&self, code: ArrayCode, cell: usize) -> usize {
        (cell * 4 + code.slot()) * self.dims.vector_len()
    }

    /// Full vector (halos included) of `code` at `cell`.
    pub fn vector(&self, code: ArrayCode, cell: usize) -> &[u16] {
        let o = self.offset(code, cell);
        &self.plane(code.color)[o..o + self.dims.vector_len()]
    }

    pub fn vector_mut(&mut self, code: ArrayCode, cell: usize) -> &mut [u16] {
        let o = self.offset(code, cell);
        let len = self.dims.vector_len();
        &mut self.plane_mut(code.color)[o..o + len]
    }

    pub fn word(&self, code: ArrayCode, cell: usize, element: usize) -> u16 {
        self.vector(code, cell)[element]
    }

    pub fn set_word(&mut self, code: ArrayCode, cell: usize, element: usize, value: u16) {
        self.vector_mut(code, cell)[element] = value;
    }

    /// Interior words of all eight arrays in a fixed order.
    pub fn interior_words(&self) -> Vec<u16> {
        let mut out = Vec::with_capacity(self.dims.spins() / SPINS_PER_WORD);
        for code in ArrayCode::ALL {
            for cell in 1..=self.dims.cells() {
                out.extend_from_slice(&self.vector(code, cell)[1..=self.dims.words()]);
            }
        }
        out
    }

    /// Number of up spins, counted over interior words.
    pub fn up_count(&self) -> u64 {
        let (len, words) = (self.dims.vector_len(), self.dims.words());
        let stride = self.cell_stride();
        let count = |plane: &[u16]| -> u64 {
            plane
                .chunks_exact(stride)
                .skip(1)
                .take(self.dims.cells())
                .flat_map(|cell| cell.chunks_exact(len))
                .flat_map(|v| &v[1..=words])
                .map(|w| u64::from(w.count_ones()))
                .sum()
        };
        count(&self.red) + count(&self.blue)
    }

    pub fn pack(lattice: &PlainLattice) -> Self {
        let dims = lattice.dims;
        let mut packed = Self::zeroed(dims);
        for (idx, &s) in lattice.spins.iter().enumerate() {
            if s == 1 {
                let at = classify(idx, dims).expect("index in range");
                let v = packed.vector_mut(at.code, at.cell);
                v[at.word] |= 1 << at.bit;
            }
        }
        packed
    }

    pub fn unpack(&self) -> PlainLattice {
        let dims = self.dims;
        let mut spins = vec![-1i8; dims.spins()];
        for code in ArrayCode::ALL {
            for cell in 1..=dims.cells() {
                let v = self.vector(code, cell);
                for word in 1..=dims.words() {
                    let bits = v[word];
                    for bit in 0..SPINS_PER_WORD as u32 {
                        if bits >> bit & 1 == 1 {
                            spins[site_index(code, cell, word, bit, dims)] = 1;
                        }
                    }
                }
            }
        }
        PlainLattice { dims, spins }
    }
}

/// Spontaneous magnetization of the infinite lattice.
pub fn onsager_magnetization(t: f64, j: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveTemperature(t));
    }
    if t >= CRITICAL_TEMPERATURE * j {
        return Ok(0.0);
    }
    let s = (2.0 * j / t).sinh();
    let bracket = 1.0 - s.powi(-4);
    Ok(bracket.max(0.0).powf(0.125))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(m: usize, n: usize) -> LatticeDims {
        LatticeDims::new(m, n).unwrap()
    }

    #[test]
    fn dims_validation() {
        assert!(LatticeDims::new(12, 96).is_ok());
        assert!(LatticeDims::new(4, 32).is_ok());
        for (m, n) in [(0, 32), (2, 32), (6, 32), (4, 16), (4, 48), (4, 0)] {
            let err = LatticeDims::new(m, n).unwrap_err().to_string();
            assert!(err.contains("multiple of 4"), "{err}");
            assert!(err.contains("multiple of 32"), "{err}");
        }
    }

    #[test]
    fn code_strings_round_trip() {
        let names: Vec<String> = ArrayCode::ALL.iter().map(|c| c.to_string()).collect();
        assert_eq!(names, ["RFE", "RBO", "RBE", "RFO", "BFE", "BBO", "BBE", "BFO"]);
        for code in ArrayCode::ALL {
            assert_eq!(code.to_string().parse::<ArrayCode>().unwrap(), code);
            assert_eq!(ArrayCode::ALL[code.index()], code);
            assert_eq!(ArrayCode::from_slot(code.color, code.slot()), code);
        }
        assert!("RXE".parse::<ArrayCode>().is_err());
        assert!("RF".parse::<ArrayCode>().is_err());
    }

    #[test]
    fn classify_worked_examples() {
        let dims = d(12, 96);
        let at = |idx| classify(idx, dims).unwrap();
        let expect = |code: ArrayCode, cell, word, bit| SpinCoord {
            code,
            cell,
            word,
            bit,
        };
        assert_eq!(at(224), expect(ArrayCode::RFE, 2, 2, 0));
        assert_eq!(at(0), expect(ArrayCode::RFE, 1, 1, 0));
        assert_eq!(at(1057), expect(ArrayCode::RBO, 1, 1, 0));
        assert_eq!(at(254), expect(ArrayCode::RFE, 2, 2, 15));
        assert_eq!(classify(0, d(4, 32)).unwrap(), expect(ArrayCode::RFE, 1, 1, 0));
        assert!(matches!(
            classify(12 * 96, dims),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn unpacked_matrices_match_published_layout() {
        // first interior word of each column, bottom row of each array
        let dims = d(12, 96);
        let lowest = |code: ArrayCode, cell| unclassify(
            SpinCoord { code, cell, word: 1, bit: 0 },
            dims,
        )
        .unwrap();
        let table: [(ArrayCode, [usize; 3]); 8] = [
            (ArrayCode::RFE, [0, 192, 384]),
            (ArrayCode::RBO, [1057, 865, 673]),
            (ArrayCode::RBE, [960, 768, 576]),
            (ArrayCode::RFO, [97, 289, 481]),
            (ArrayCode::BFE, [96, 288, 480]),
            (ArrayCode::BBO, [961, 769, 577]),
            (ArrayCode::BBE, [1056, 864, 672]),
            (ArrayCode::BFO, [1, 193, 385]),
        ];
        for (code, first) in table {
            for (cell, &idx) in (1..=3).zip(first.iter()) {
                assert_eq!(lowest(code, cell), idx, "{code} cell {cell}");
            }
        }
    }

    #[test]
    fn classify_bijection_small_dims() {
        for (m, n) in [(4, 32), (8, 64), (12, 96), (16, 32)] {
            let dims = d(m, n);
            let mut seen = vec![false; dims.spins()];
            for code in ArrayCode::ALL {
                for cell in 1..=dims.cells() {
                    for word in 1..=dims.words() {
                        for bit in 0..16 {
                            let c = SpinCoord { code, cell, word, bit };
                            let idx = unclassify(c, dims).unwrap();
                            assert!(!seen[idx], "duplicate {idx}");
                            seen[idx] = true;
                            assert_eq!(classify(idx, dims).unwrap(), c);
                        }
                    }
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn unclassify_rejects_moats_and_halos() {
        let dims = d(12, 96);
        let base = SpinCoord { code: ArrayCode::RFE, cell: 1, word: 1, bit: 0 };
        assert!(unclassify(SpinCoord { cell: 0, ..base }, dims).is_err());
        assert!(unclassify(SpinCoord { cell: 4, ..base }, dims).is_err());
        assert!(unclassify(SpinCoord { word: 0, ..base }, dims).is_err());
        assert!(unclassify(SpinCoord { word: 4, ..base }, dims).is_err());
        assert!(unclassify(SpinCoord { bit: 16, ..base }, dims).is_err());
    }

    #[test]
    fn neighbors_have_opposite_color() {
        for (m, n) in [(4, 32), (12, 96), (8, 64)] {
            assert!(LatticeDims::new(m, n).is_ok());
            for c in 0..m {
                for r in 0..n {
                    let me = Color::of_site(c, r);
                    for (cc, rr) in [
                        ((c + 1) % m, r),
                        ((c + m - 1) % m, r),
                        (c, (r + 1) % n),
                        (c, (r + n - 1) % n),
                    ] {
                        assert_eq!(Color::of_site(cc, rr), me.opposite());
                    }
                }
            }
        }
    }

    /// Offsets (in cells and words) from a reader to the array holding each
    /// neighbor, measured in the reader's fold frame without wrapping.
    #[test]
    fn access_rules_hold() {
        use std::collections::{BTreeMap, BTreeSet};
        for (m, n) in [(4, 32), (8, 64), (12, 96), (16, 128)] {
            let dims = d(m, n);
            let mut lateral: BTreeMap<String, BTreeSet<isize>> = BTreeMap::new();
            let mut vertical: BTreeMap<String, BTreeSet<isize>> = BTreeMap::new();
            for idx in 0..dims.spins() {
                let me = classify(idx, dims).unwrap();
                let c = (idx / n) as isize;
                let r = (idx % n) as isize;
                let forward = me.code.direction == Direction::Forward;
                let frame_cell = |cc: isize| -> isize {
                    let f = if forward { cc } else { m as isize - 1 - cc };
                    f.div_euclid(2) + 1
                };
                let seen_as = |parity| ArrayCode {
                    color: me.code.color.opposite(),
                    direction: me.code.direction,
                    parity,
                };
                for cc in [c - 1, c + 1] {
                    let dg = frame_cell(cc) - me.cell as isize;
                    lateral.entry(seen_as(me.code.parity).to_string()).or_default().insert(dg);
                }
                let other = match me.code.parity {
                    Parity::Even => Parity::Odd,
                    Parity::Odd => Parity::Even,
                };
                for rr in [r - 1, r + 1] {
                    let dw = rr.div_euclid(32) + 1 - me.word as isize;
                    vertical.entry(seen_as(other).to_string()).or_default().insert(dw);
                }
            }
            for name in ["RFE", "RBO", "BBE", "BFO"] {
                assert_eq!(lateral[name], BTreeSet::from([0, 1]), "{name} {dims}");
            }
            for name in ["RBE", "RFO", "BFE", "BBO"] {
                assert_eq!(lateral[name], BTreeSet::from([-1, 0]), "{name} {dims}");
            }
            for code in ArrayCode::ALL {
                let expected = match code.parity {
                    Parity::Even => BTreeSet::from([0, 1]),
                    Parity::Odd => BTreeSet::from([-1, 0]),
                };
                assert_eq!(vertical[&code.to_string()], expected, "{code} {dims}");
                let want_next = lateral[&code.to_string()].contains(&1);
                assert_eq!(code.read_from_next_cell(), want_next, "{code}");
            }
        }
    }

    #[test]
    fn pack_saturation() {
        let dims = d(12, 96);
        let up = PackedArrays::pack(&PlainLattice::filled(dims, 1));
        let down = PackedArrays::pack(&PlainLattice::filled(dims, -1));
        for code in ArrayCode::ALL {
            for cell in 0..dims.cell_columns() {
                for e in 0..dims.vector_len() {
                    let interior = !dims.is_moat(cell) && e >= 1 && e <= dims.words();
                    let want = if interior { 0xFFFF } else { 0 };
                    assert_eq!(up.word(code, cell, e), want);
                    assert_eq!(down.word(code, cell, e), 0);
                }
            }
        }
        assert_eq!(up.up_count(), 1152);
        assert_eq!(down.up_count(), 0);
    }

    #[test]
    fn pack_single_spin() {
        let dims = d(12, 96);
        let mut lat = PlainLattice::filled(dims, -1);
        lat.set(224, 1);
        let p = PackedArrays::pack(&lat);
        let ones: u32 = p.interior_words().iter().map(|w| w.count_ones()).sum();
        assert_eq!(ones, 1);
        assert_eq!(p.word(ArrayCode::RFE, 2, 2), 1);
    }

    #[test]
    fn round_trip_exhaustive_smallest() {
        // every pattern of a 4x32 lattice is too many; sweep single-bit and
        // two-bit patterns exhaustively instead
        let dims = d(4, 32);
        let total = dims.spins();
        for a in 0..total {
            let lat = PlainLattice::from_fn(dims, |i| if i == a { 1 } else { -1 });
            assert_eq!(PackedArrays::pack(&lat).unpack(), lat);
            for b in a + 1..total {
                let lat = PlainLattice::from_fn(dims, |i| if i == a || i == b { -1 } else { 1 });
                assert_eq!(PackedArrays::pack(&lat).unpack(), lat);
            }
        }
    }

    #[test]
    fn halo_source_worked_examples() {
        let dims = d(12, 96);
        let src = |code, cell, e| canonical_halo_source(code, cell, e, dims);
        let at = |idx| Some(classify(idx, dims).unwrap().word_coord());
        // right moat of RFE holds the RBE column adjacent across the fold
        assert_eq!(src(ArrayCode::RFE, 4, 1), at(576));
        assert_eq!(src(ArrayCode::RFE, 4, 2), at(608));
        assert_eq!(src(ArrayCode::RFE, 4, 3), at(640));
        assert_eq!(src(ArrayCode::RFE, 4, 4), None);
        assert_eq!(src(ArrayCode::RFE, 2, 4), at(192));
        assert_eq!(src(ArrayCode::RFE, 2, 0), None);
        for e in 0..5 {
            assert_eq!(src(ArrayCode::RFE, 0, e), None);
        }
        // a few cells from the other seven arrays
        assert_eq!(src(ArrayCode::RBO, 4, 1), at(481));
        assert_eq!(src(ArrayCode::RBO, 2, 0), at(929));
        assert_eq!(src(ArrayCode::RBE, 0, 3), at(64));
        assert_eq!(src(ArrayCode::RFO, 0, 1), at(1057));
        assert_eq!(src(ArrayCode::BFE, 0, 2), at(1088));
        assert_eq!(src(ArrayCode::BBO, 0, 3), at(65));
        assert_eq!(src(ArrayCode::BBE, 4, 1), at(480));
        assert_eq!(src(ArrayCode::BFO, 4, 2), at(609));
        assert_eq!(src(ArrayCode::BFO, 3, 0), at(449));
        assert_eq!(src(ArrayCode::BFO, 0, 2), None);
    }

    #[test]
    fn onsager_values() {
        assert_eq!(onsager_magnetization(CRITICAL_TEMPERATURE, 1.0).unwrap(), 0.0);
        assert_eq!(onsager_magnetization(4.0, 1.0).unwrap(), 0.0);
        assert!((onsager_magnetization(1.5, 1.0).unwrap() - 0.98650).abs() < 1e-4);
        assert!((onsager_magnetization(2.0, 1.0).unwrap() - 0.91131).abs() < 1e-4);
        assert!(onsager_magnetization(0.0, 1.0).is_err());
        assert!(onsager_magnetization(-1.0, 1.0).is_err());
        assert!((CRITICAL_TEMPERATURE - 2.0 / (1.0 + 2f64.sqrt()).ln()).abs() < 1e-14);
    }

    fn dims_strategy() -> impl Strategy<Value = LatticeDims> {
        (1usize..=5, 1usize..=4).prop_map(|(a, b)| d(4 * a, 32 * b))
    }

    proptest! {
        #[test]
        fn pack_unpack_identity(dims in dims_strategy(), seed in any::<u64>()) {
            let mut rng = GeneratorState::new(seed, 0);
            let lat = PlainLattice::random(dims, &mut rng);
            let packed = PackedArrays::pack(&lat);
            prop_assert_eq!(packed.unpack(), lat.clone());
            prop_assert_eq!(packed.up_count() as usize, lat.up_count());
            let again = PackedArrays::pack(&packed.unpack());
            prop_assert_eq!(again.interior_words(), packed.interior_words());
        }

        #[test]
        fn classify_round_trip(dims in dims_strategy(), raw in any::<usize>()) {
            let idx = raw % dims.spins();
            let c = classify(idx, dims).unwrap();
            prop_assert_eq!(unclassify(c, dims).unwrap(), idx);
        }
    }
}
