//! Distinct square submatrix counts and the `delta` measure.
//!
//! `d[k]` is the number of distinct `k`x`k` submatrices and
//! `delta = max_k d[k] / k^2`. Two routes compute the whole profile: a naive
//! one that fingerprints every anchor for every `k`, and one that sorts the
//! `n^2` Isuffixes of the sentinel-padded matrix and charges each suffix's
//! new Iprefixes to a difference array over `k`.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::hash::{HashIndex, DEFAULT_SEED};
use crate::istring::{last_well_formed_by_geometry, IsuffixOrder, PaddedMatrix};
use crate::matrix::Matrix;

/// Exact non-negative rational, compared by value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Ratio { num, den }
    }

    pub fn integer(v: u64) -> Self {
        Ratio { num: v, den: 1 }
    }

    /// Smallest integer not below the ratio.
    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `|self - other|`, unreduced.
    pub fn abs_diff(&self, other: &Ratio) -> Ratio {
        let a = self.num as u128 * other.den as u128;
        let b = other.num as u128 * self.den as u128;
        let den = self.den as u128 * other.den as u128;
        let num = a.abs_diff(b);
        let g = gcd(num, den);
        Ratio::new((num / g) as u64, (den / g) as u64)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Per-side distinct counts of a square matrix and the derived `delta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaProfile {
    pub n: usize,
    /// `d[k - 1]` counts the distinct `k`x`k` submatrices.
    pub d: Vec<u64>,
    /// `d[k*] / k*^2`, unreduced.
    pub delta2d: Ratio,
    pub argmax_k: usize,
}

impl DeltaProfile {
    pub fn from_counts(d: Vec<u64>) -> Self {
        assert!(!d.is_empty());
        let mut best = (Ratio::new(d[0], 1), 1);
        for (idx, &c) in d.iter().enumerate().skip(1) {
            let k = (idx + 1) as u64;
            let r = Ratio::new(c, k * k);
            if r > best.0 {
                best = (r, idx + 1);
            }
        }
        DeltaProfile {
            n: d.len(),
            d,
            delta2d: best.0,
            argmax_k: best.1,
        }
    }

    /// Distinct `k`x`k` submatrices, 1-based `k`.
    pub fn count(&self, k: usize) -> u64 {
        self.d[k - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaMethod {
    Naive,
    #[default]
    Fast,
}

/// Number of distinct `k`x`k` submatrices of the matrix behind `index`.
pub fn count_distinct_k(index: &HashIndex<'_>, k: usize) -> Result<u64> {
    let m = index.matrix();
    let n = m.side()?;
    if k == 0 || k > n {
        return Err(out_of_range("k", k, format!("1..={n}")));
    }
    let span = n - k + 1;
    let mut keys: Vec<_> = (0..span * span)
        .map(|a| (index.square(a / span, a % span, k), a))
        .collect();
    keys.sort_unstable();
    let mut distinct = 0u64;
    let mut run_start = 0;
    for idx in 0..keys.len() {
        if idx == 0 || keys[idx].0 != keys[run_start].0 {
            distinct += 1;
            run_start = idx;
        } else if index.is_paranoid() {
            let a = (keys[run_start].1 / span, keys[run_start].1 % span);
            let b = (keys[idx].1 / span, keys[idx].1 % span);
            if !m.squares_equal(a, b, k) {
                return Err(Error::HashCollision { rows: k, cols: k, a, b });
            }
        }
    }
    Ok(distinct)
}

pub fn delta_profile_naive(index: &HashIndex<'_>) -> Result<DeltaProfile> {
    let n = index.matrix().side()?;
    let d = (1..=n)
        .into_par_iter()
        .map(|k| count_distinct_k(index, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaProfile::from_counts(d))
}

/// The difference-array bounds `(s, t)` for a suffix whose new Iprefixes
/// span Icharacter positions `l1..=l2`; `None` when no odd length (that is,
/// no square) falls in the range.
#[inline]
pub fn square_range(l1: usize, l2: usize) -> Option<(usize, usize)> {
    let s = (l1 - 1).div_ceil(2) + 1;
    let t = l2.div_ceil(2);
    (l2 >= l1 && s <= t).then_some((s, t))
}

/// Profile from the sorted Isuffixes of the sentinel-padded matrix.
///
/// `seed` drives the fingerprints used for lcp queries; with `paranoid` every
/// adjacent lcp is re-checked cell by cell.
pub fn delta_profile_fast_with(m: &Matrix, seed: u64, paranoid: bool) -> Result<DeltaProfile> {
    let n = m.side()?;
    let padded = PaddedMatrix::new(m)?;
    let index = HashIndex::with_seed(padded.inner(), seed);
    let order = IsuffixOrder::new(&index);

    let mut anchors: Vec<(usize, usize)> = (0..n * n).map(|a| (a / n, a % n)).collect();
    anchors.par_sort_unstable_by(|&p, &q| order.compare(p, q).0);

    // diff[k] for k in 1..=n+1; index 0 unused
    let mut diff = vec![0i64; n + 2];
    for r in 0..anchors.len() {
        let (i, j) = anchors[r];
        let lcp = if r == 0 {
            0
        } else {
            let prev = anchors[r - 1];
            let lcp = order.lcp(prev, (i, j));
            if paranoid && !order.confirm_lcp(prev, (i, j), lcp) {
                return Err(Error::HashCollision {
                    rows: 0,
                    cols: 0,
                    a: prev,
                    b: (i, j),
                });
            }
            lcp
        };
        let l2 = last_well_formed_by_geometry(n, i, j);
        if let Some((s, t)) = square_range(lcp + 1, l2) {
            diff[s] += 1;
            diff[t + 1] -= 1;
        }
    }
    let mut d = Vec::with_capacity(n);
    let mut acc = 0i64;
    for k in 1..=n {
        acc += diff[k];
        debug_assert!(acc > 0, "d[{k}] = {acc}");
        d.push(acc as u64);
    }
    Ok(DeltaProfile::from_counts(d))
}

pub fn delta_profile_fast(m: &Matrix) -> Result<DeltaProfile> {
    delta_profile_fast_with(m, DEFAULT_SEED, false)
}

pub fn delta_profile(m: &Matrix, method: DeltaMethod) -> Result<DeltaProfile> {
    match method {
        DeltaMethod::Naive => delta_profile_naive(&HashIndex::new(m)),
        DeltaMethod::Fast => delta_profile_fast(m),
    }
}

pub fn delta2d(m: &Matrix, method: DeltaMethod) -> Result<Ratio> {
    Ok(delta_profile(m, method)?.delta2d)
}
