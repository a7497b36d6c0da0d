//! Bit-packed GF(2) linear algebra.
//!
//! Vectors and matrices over GF(2) backed by `u64` words, plus the three
//! operations the compiler is built on: affine solving for binary selector
//! vectors, rank, and an exhaustive coset minimum-weight oracle used to
//! validate the graph distance metric.
//!
//! All values are immutable after construction as far as callers are
//! concerned; every operation is a pure function of its inputs.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("coset enumeration refused: {rows} rows exceeds the {max} row bound")]
    TooManyRows { rows: usize, max: usize },
}

const WORD_BITS: usize = 64;

/// Dense GF(2) vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.set(i, true);
        }
        v
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor_assign length mismatch");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub fn xored(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Clears every bit set in `other`.
    pub fn and_not_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "and_not_assign length mismatch");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the AND of two vectors: the symplectic-style overlap count mod 2.
    pub fn overlap_parity(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "overlap_parity length mismatch");
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn overlap_count(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len, "overlap_count length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & o).count_ones() as usize)
            .sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + bit)
                }
            })
        })
    }

    /// Lowest set position, if any.
    pub fn leading_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVec[{}]", self.to_bitstring())
    }
}

/// Dense row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row width mismatch");
        }
        BitMatrix { cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| BitVec::from_indices(n, [i])).collect();
        BitMatrix { cols: n, rows }
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.rows.push(row);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut rows = vec![BitVec::zeros(self.nrows()); self.cols];
        for (ri, row) in self.rows.iter().enumerate() {
            for ci in row.iter_ones() {
                rows[ci].set(ri, true);
            }
        }
        BitMatrix { cols: self.nrows(), rows }
    }

    /// x^T * self for a selector x over the rows.
    pub fn combine_rows(&self, selector: &BitVec) -> BitVec {
        assert_eq!(selector.len(), self.nrows(), "selector length mismatch");
        let mut out = BitVec::zeros(self.cols);
        for i in selector.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    /// Stack rows of `self` then rows of `other`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "vstack width mismatch");
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMatrix { cols: self.cols, rows }
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {}", r.to_bitstring())?;
        }
        Ok(())
    }
}

/// GF(2) rank by forward elimination.
pub fn rank(a: &BitMatrix) -> usize {
    let mut work: Vec<BitVec> = a.rows().to_vec();
    let mut rank = 0;
    for col in 0..a.ncols() {
        let Some(pivot) = (rank..work.len()).find(|&r| work[r].get(col)) else {
            continue;
        };
        work.swap(rank, pivot);
        let pivot_row = work[rank].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    rank
}

/// Solve `x^T A = target` over GF(2).
///
/// Returns one canonical solution over the rows of `A`, or `None` when the
/// target lies outside the row space. Deterministic: columns are swept lowest
/// first and the pivot for a column is the first remaining row (in the given
/// row order) carrying a leading 1 there, so stacked systems prefer early
/// rows. Free rows are left unselected.
pub fn solve_affine(a: &BitMatrix, target: &BitVec) -> Result<Option<BitVec>, Gf2Error> {
    if a.ncols() != target.len() {
        return Err(Gf2Error::DimensionMismatch(format!(
            "matrix has {} cols, target has {} bits",
            a.ncols(),
            target.len()
        )));
    }
    let n = a.nrows();
    // Echelonize a working copy while tracking each working row as a
    // combination of the original rows.
    let mut work: Vec<BitVec> = a.rows().to_vec();
    let mut combo: Vec<BitVec> = (0..n).map(|i| BitVec::from_indices(n, [i])).collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; a.ncols()];
    let mut used = 0usize;
    for (col, pivot_slot) in pivot_of_col.iter_mut().enumerate() {
        let Some(p) = (used..n).find(|&r| work[r].get(col)) else {
            continue;
        };
        work.swap(used, p);
        combo.swap(used, p);
        let (head, tail) = work.split_at_mut(used + 1);
        let pivot_row = &head[used];
        let (chead, ctail) = combo.split_at_mut(used + 1);
        let pivot_combo = &chead[used];
        for (row, c) in tail.iter_mut().zip(ctail.iter_mut()) {
            if row.get(col) {
                row.xor_assign(pivot_row);
                c.xor_assign(pivot_combo);
            }
        }
        *pivot_slot = Some(used);
        used += 1;
        if used == n {
            break;
        }
    }
    // Reduce the target against the echelon rows.
    let mut residual = target.clone();
    let mut x = BitVec::zeros(n);
    while let Some(col) = residual.leading_one() {
        let Some(p) = pivot_of_col[col] else {
            return Ok(None);
        };
        residual.xor_assign(&work[p]);
        x.xor_assign(&combo[p]);
    }
    debug_assert_eq!(a.combine_rows(&x), *target);
    Ok(Some(x))
}

/// Feasibility of `x^T A = target` without extracting a solution.
pub fn in_row_space(a: &BitMatrix, target: &BitVec) -> Result<bool, Gf2Error> {
    Ok(solve_affine(a, target)?.is_some())
}

pub const COSET_ENUMERATION_MAX_ROWS: usize = 26;

/// Minimum weight over the coset `logical + span(stabilizer_rows)`, by
/// exhaustive enumeration. Validation oracle only; refuses large row counts.
pub fn coset_min_weight(logical: &BitVec, stabilizer_rows: &BitMatrix) -> Result<usize, Gf2Error> {
    if stabilizer_rows.ncols() != logical.len() {
        return Err(Gf2Error::DimensionMismatch(format!(
            "stabilizer rows have {} cols, logical has {} bits",
            stabilizer_rows.ncols(),
            logical.len()
        )));
    }
    let n = stabilizer_rows.nrows();
    if n > COSET_ENUMERATION_MAX_ROWS {
        return Err(Gf2Error::TooManyRows {
            rows: n,
            max: COSET_ENUMERATION_MAX_ROWS,
        });
    }
    // Gray-code walk: flip one row per step.
    let mut current = logical.clone();
    let mut best = current.weight();
    let mut gray_prev = 0u64;
    for k in 1u64..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
        gray_prev = gray;
        current.xor_assign(stabilizer_rows.row(flipped));
        let w = current.weight();
        if w < best {
            best = w;
        }
    }
    Ok(best)
}
