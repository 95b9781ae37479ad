//! Linearization of square submatrices into Istrings.
//!
//! The Istring of a `q`x`q` matrix `C` is a sequence of `2q - 1`
//! Icharacters. Position `2i + 1` (1-based) holds the column-type Icharacter
//! `C[0..=i][i]`, position `2i` holds the row-type Icharacter `C[i][0..i]`.
//! An Iprefix of odd length `2l - 1` is the Istring of the top-left `l`x`l`
//! square; one of even length `2l` spans the top-left `(l + 1)`x`l` rectangle.
//! That rectangle view is what makes hash-based lcp queries O(1) per probe.
//!
//! The Isuffix at an anchor is the Istring of the largest square starting
//! there. Bordering the matrix with fresh sentinels makes Isuffixes pairwise
//! non-prefixing, so they sort into a strict total order.

use std::cmp::Ordering;

use crate::error::{out_of_range, Error, Result};
use crate::hash::HashIndex;
use crate::matrix::{Matrix, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcharKind {
    Column,
    Row,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Icharacter {
    pub kind: IcharKind,
    pub symbols: Vec<Symbol>,
}

/// An `(n+1)`x`(n+1)` matrix: the original `n`x`n` input plus a sentinel
/// border of `2n + 1` pairwise distinct symbols.
///
/// Layout: bottom row cell `j` holds sentinel `j + 1`, right column cell `i`
/// holds sentinel `n + i + 1`, the corner holds sentinel `2n + 1`.
#[derive(Debug, Clone)]
pub struct PaddedMatrix {
    inner: Matrix,
    sentinel_base: Symbol,
    original_n: usize,
}

impl PaddedMatrix {
    pub fn new(m: &Matrix) -> Result<Self> {
        let n = m.side()?;
        let base = m.max_symbol() as usize + 1;
        if base + 2 * n > Symbol::MAX as usize {
            return Err(Error::UnsupportedAlphabet(format!(
                "no room for {} sentinels above symbol {}",
                2 * n + 1,
                m.max_symbol()
            )));
        }
        let inner = Matrix::from_fn(n + 1, n + 1, |i, j| match (i == n, j == n) {
            (false, false) => m.get(i, j),
            (true, false) => (base + j) as Symbol,
            (false, true) => (base + n + i) as Symbol,
            (true, true) => (base + 2 * n) as Symbol,
        })?;
        Ok(PaddedMatrix {
            inner,
            sentinel_base: base as Symbol,
            original_n: n,
        })
    }

    pub fn inner(&self) -> &Matrix {
        &self.inner
    }

    pub fn sentinel_base(&self) -> Symbol {
        self.sentinel_base
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    #[inline]
    pub fn is_sentinel(&self, s: Symbol) -> bool {
        s >= self.sentinel_base
    }
}

/// Side of the largest square anchored at `(i, j)`.
#[inline]
pub fn largest_square(m: &Matrix, i: usize, j: usize) -> usize {
    (m.rows() - i).min(m.cols() - j)
}

/// Number of Icharacters in the Isuffix at `(i, j)`.
#[inline]
pub fn isuffix_len(m: &Matrix, i: usize, j: usize) -> usize {
    2 * largest_square(m, i, j) - 1
}

/// `(rows, cols)` of the rectangle covered by the Iprefix of length `len`.
#[inline]
pub fn iprefix_dims(len: usize) -> (usize, usize) {
    if len % 2 == 1 {
        let l = len.div_ceil(2);
        (l, l)
    } else {
        (len / 2 + 1, len / 2)
    }
}

#[inline]
fn ichar_len(t: usize) -> usize {
    if t % 2 == 1 {
        t.div_ceil(2)
    } else {
        t / 2
    }
}

/// Symbol `idx` of the `t`-th Icharacter anchored at `(i, j)`; no checks.
#[inline]
fn ichar_symbol(m: &Matrix, (i, j): (usize, usize), t: usize, idx: usize) -> Symbol {
    if t % 2 == 1 {
        m.get(i + idx, j + t / 2)
    } else {
        m.get(i + t / 2, j + idx)
    }
}

/// The `t`-th (1-based) Icharacter of the Isuffix anchored at 0-based `(i, j)`.
pub fn icharacter_at(m: &Matrix, i: usize, j: usize, t: usize) -> Result<Icharacter> {
    if i >= m.rows() || j >= m.cols() {
        return Err(out_of_range("anchor", i.max(j), format!("{}x{}", m.rows(), m.cols())));
    }
    let len = isuffix_len(m, i, j);
    if t == 0 || t > len {
        return Err(out_of_range("Icharacter position", t, format!("1..={len}")));
    }
    let kind = if t % 2 == 1 {
        IcharKind::Column
    } else {
        IcharKind::Row
    };
    let symbols = (0..ichar_len(t))
        .map(|idx| ichar_symbol(m, (i, j), t, idx))
        .collect();
    Ok(Icharacter { kind, symbols })
}

/// The full Istring of the `q`x`q` square anchored at `(i, j)`.
pub fn istring(m: &Matrix, i: usize, j: usize, q: usize) -> Result<Vec<Icharacter>> {
    if q == 0 || q > largest_square(m, i, j) {
        return Err(out_of_range("square side", q, largest_square(m, i, j)));
    }
    (1..=2 * q - 1).map(|t| icharacter_at(m, i, j, t)).collect()
}

/// Rebuilds the square matrix whose Istring is `chars`.
pub fn matrix_from_istring(chars: &[Icharacter]) -> Result<Matrix> {
    if chars.len() % 2 == 0 {
        return Err(Error::Format("an Istring has odd length".into()));
    }
    let q = chars.len().div_ceil(2);
    let mut cells = vec![0 as Symbol; q * q];
    for (pos, ch) in chars.iter().enumerate() {
        let t = pos + 1;
        let expect = if t % 2 == 1 {
            IcharKind::Column
        } else {
            IcharKind::Row
        };
        if ch.kind != expect || ch.symbols.len() != ichar_len(t) {
            return Err(Error::Format(format!("malformed Icharacter at position {t}")));
        }
        for (idx, &s) in ch.symbols.iter().enumerate() {
            let (r, c) = if t % 2 == 1 { (idx, t / 2) } else { (t / 2, idx) };
            cells[r * q + c] = s;
        }
    }
    Matrix::new(q, q, cells)
}

/// Isuffix comparisons over a fingerprinted matrix.
pub struct IsuffixOrder<'h, 'm> {
    index: &'h HashIndex<'m>,
}

impl<'h, 'm> IsuffixOrder<'h, 'm> {
    pub fn new(index: &'h HashIndex<'m>) -> Self {
        IsuffixOrder { index }
    }

    fn matrix(&self) -> &'m Matrix {
        self.index.matrix()
    }

    #[inline]
    fn iprefix_eq(&self, p: (usize, usize), q: (usize, usize), len: usize) -> bool {
        let (h, w) = iprefix_dims(len);
        self.index.rect(p.0, p.1, h, w) == self.index.rect(q.0, q.1, h, w)
    }

    /// Length of the longest common Iprefix, by binary search on fingerprints.
    pub fn lcp(&self, p: (usize, usize), q: (usize, usize)) -> usize {
        let m = self.matrix();
        if m.get(p.0, p.1) != m.get(q.0, q.1) {
            return 0;
        }
        let max = isuffix_len(m, p.0, p.1).min(isuffix_len(m, q.0, q.1));
        let (mut lo, mut hi) = (1, max);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.iprefix_eq(p, q, mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Lexicographic order of the two Isuffixes plus their lcp in Icharacters.
    pub fn compare(&self, p: (usize, usize), q: (usize, usize)) -> (Ordering, usize) {
        let m = self.matrix();
        let lcp = self.lcp(p, q);
        match decide_at(m, p, q, lcp) {
            Some(ord) => (ord, lcp),
            // the fingerprints claimed a match the cells do not confirm
            None => compare_brute(m, p, q),
        }
    }

    /// Checks a claimed lcp cell by cell.
    pub fn confirm_lcp(&self, p: (usize, usize), q: (usize, usize), lcp: usize) -> bool {
        let (h, w) = iprefix_dims(lcp);
        let m = self.matrix();
        (lcp == 0 || m.rects_equal(p, q, h, w)) && decide_at(m, p, q, lcp).is_some()
    }
}

/// Order decided by the Icharacter right after a common Iprefix of length
/// `lcp`, or `None` when that Icharacter does not actually differ.
fn decide_at(m: &Matrix, p: (usize, usize), q: (usize, usize), lcp: usize) -> Option<Ordering> {
    let (lp, lq) = (isuffix_len(m, p.0, p.1), isuffix_len(m, q.0, q.1));
    if lcp == lp || lcp == lq {
        return match lp.cmp(&lq) {
            Ordering::Equal => None,
            ord => Some(ord),
        };
    }
    let t = lcp + 1;
    (0..ichar_len(t))
        .map(|idx| ichar_symbol(m, p, t, idx).cmp(&ichar_symbol(m, q, t, idx)))
        .find(|o| o.is_ne())
}

/// Icharacter-by-Icharacter comparison without fingerprints.
pub fn compare_brute(m: &Matrix, p: (usize, usize), q: (usize, usize)) -> (Ordering, usize) {
    let (lp, lq) = (isuffix_len(m, p.0, p.1), isuffix_len(m, q.0, q.1));
    for t in 1..=lp.min(lq) {
        for idx in 0..ichar_len(t) {
            let ord = ichar_symbol(m, p, t, idx).cmp(&ichar_symbol(m, q, t, idx));
            if ord.is_ne() {
                return (ord, t - 1);
            }
        }
    }
    (lp.cmp(&lq), lp.min(lq))
}

/// Compares the Isuffixes of two distinct anchors inside the original
/// region of a padded matrix. `index` must fingerprint `padded.inner()`.
pub fn compare_isuffixes(
    index: &HashIndex<'_>,
    padded: &PaddedMatrix,
    p: (usize, usize),
    q: (usize, usize),
) -> Result<(Ordering, usize)> {
    let n = padded.original_n();
    if !std::ptr::eq(index.matrix(), padded.inner()) {
        return Err(Error::InvalidParameter(
            "hash index does not belong to this padded matrix".into(),
        ));
    }
    if p == q {
        return Err(Error::InvalidParameter("cannot compare an Isuffix with itself".into()));
    }
    for &(i, j) in &[p, q] {
        if i >= n || j >= n {
            return Err(out_of_range("anchor", i.max(j), format!("0..{n}")));
        }
    }
    Ok(IsuffixOrder::new(index).compare(p, q))
}

/// Index of the last sentinel-free Icharacter of the Isuffix at `(i, j)`,
/// from the anchor's distance to the sentinel border.
#[inline]
pub fn last_well_formed_by_geometry(n: usize, i: usize, j: usize) -> usize {
    let q = n + 1 - i.max(j);
    if i >= j {
        2 * q - 3
    } else {
        2 * q - 2
    }
}

/// Same as [`last_well_formed_by_geometry`], by inspecting the trailing
/// Icharacters: the last one always holds the corner sentinel, the one
/// before it is clean iff its first symbol is, and the third from last is
/// always clean.
pub fn last_well_formed_by_symbols(padded: &PaddedMatrix, i: usize, j: usize) -> usize {
    let m = padded.inner();
    let len = isuffix_len(m, i, j);
    if len == 1 {
        return 0;
    }
    if padded.is_sentinel(ichar_symbol(m, (i, j), len - 1, 0)) {
        len - 2
    } else {
        len - 1
    }
}
