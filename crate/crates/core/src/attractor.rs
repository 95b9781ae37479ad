//! Two-dimensional attractors: verification, exact and greedy search, and
//! the string-to-matrix reduction with its attractor lift and projection.
//!
//! Positions are 1-based `(row, col)` pairs throughout this module's public
//! surface, matching the attractor file format. A position covers an
//! occurrence when the occurrence's cell range contains it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta::delta_profile_naive;
use crate::error::{out_of_range, Error, Result};
use crate::hash::{Fingerprint, HashIndex};
use crate::hitting_set::{BitSet, HittingSetProblem};
use crate::matrix::{Matrix, Symbol};

/// A set of 1-based matrix positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attractor {
    positions: BTreeSet<(usize, usize)>,
}

impl Attractor {
    pub fn new(positions: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Attractor {
            positions: positions.into_iter().collect(),
        }
    }

    pub fn positions(&self) -> &BTreeSet<(usize, usize)> {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn insert(&mut self, p: (usize, usize)) -> bool {
        self.positions.insert(p)
    }

    pub fn check_range(&self, rows: usize, cols: usize) -> Result<()> {
        for &(i, j) in &self.positions {
            if i == 0 || i > rows {
                return Err(out_of_range("attractor row", i, format!("1..={rows}")));
            }
            if j == 0 || j > cols {
                return Err(out_of_range("attractor column", j, format!("1..={cols}")));
            }
        }
        Ok(())
    }

    /// Parses lines of `i j`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Attractor> {
        let mut positions = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("attractor line {}: {line:?}", lineno + 1)))?;
            match nums[..] {
                [i, j] => {
                    positions.insert((i, j));
                }
                _ => {
                    return Err(Error::Format(format!(
                        "attractor line {} must be \"i j\"",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(Attractor { positions })
    }

    pub fn to_text(&self) -> String {
        self.positions.iter().map(|(i, j)| format!("{i} {j}\n")).collect()
    }
}

impl fmt::Display for Attractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.positions.iter().map(|(i, j)| format!("({i},{j})")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A set of 1-based string positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringAttractor {
    positions: BTreeSet<usize>,
}

impl StringAttractor {
    pub fn new(positions: impl IntoIterator<Item = usize>) -> Self {
        StringAttractor {
            positions: positions.into_iter().collect(),
        }
    }

    pub fn positions(&self) -> &BTreeSet<usize> {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Outcome of [`verify_attractor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verification {
    Valid,
    /// The `k`x`k` submatrix at 1-based `anchor` has no covered occurrence.
    Uncovered { k: usize, anchor: (usize, usize) },
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verification::Valid)
    }
}

/// 2D prefix counts of a point set over an `n`x`n` grid (0-based points).
#[derive(Debug, Clone)]
pub struct PointCounter {
    n: usize,
    sums: Vec<u32>,
}

impl PointCounter {
    pub fn new(n: usize, points: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let stride = n + 1;
        let mut sums = vec![0u32; stride * stride];
        for (i, j) in points {
            sums[(i + 1) * stride + j + 1] += 1;
        }
        for i in 1..=n {
            for j in 1..=n {
                sums[i * stride + j] +=
                    sums[(i - 1) * stride + j] + sums[i * stride + j - 1] - sums[(i - 1) * stride + j - 1];
            }
        }
        PointCounter { n, sums }
    }

    pub fn from_attractor(n: usize, g: &Attractor) -> Self {
        PointCounter::new(n, g.positions.iter().map(|&(i, j)| (i - 1, j - 1)))
    }

    /// Points inside the `h`x`w` rectangle at 0-based `(i, j)`.
    #[inline]
    pub fn count(&self, i: usize, j: usize, h: usize, w: usize) -> u32 {
        let s = self.n + 1;
        let p = &self.sums;
        p[(i + h) * s + j + w] + p[i * s + j] - p[i * s + j + w] - p[(i + h) * s + j]
    }
}

/// Occurrences of the `k`x`k` squares grouped by content.
///
/// `keys` is sorted by `(fingerprint, anchor)`, anchors row-major over the
/// `span`x`span` grid of valid anchors; `runs` are the classes, each starting
/// at its row-major-first occurrence.
pub(crate) struct SquareClasses {
    pub span: usize,
    pub keys: Vec<(Fingerprint, u32)>,
    pub runs: Vec<(usize, usize)>,
}

impl SquareClasses {
    pub fn build(index: &HashIndex<'_>, k: usize) -> SquareClasses {
        let n = index.matrix().rows();
        let span = n - k + 1;
        let mut keys: Vec<(Fingerprint, u32)> = (0..span * span)
            .map(|a| (index.square(a / span, a % span, k), a as u32))
            .collect();
        keys.sort_unstable();
        let mut runs = Vec::new();
        let mut start = 0;
        for idx in 1..=keys.len() {
            if idx == keys.len() || keys[idx].0 != keys[start].0 {
                runs.push((start, idx));
                start = idx;
            }
        }
        SquareClasses { span, keys, runs }
    }

    #[inline]
    pub fn anchor(&self, key_idx: usize) -> (usize, usize) {
        let a = self.keys[key_idx].1 as usize;
        (a / self.span, a % self.span)
    }

    pub fn occurrences(&self, run: (usize, usize)) -> impl Iterator<Item = (usize, usize)> + '_ {
        (run.0..run.1).map(|x| self.anchor(x))
    }
}

/// Row-major-first anchors (0-based) of the `k`x`k` classes with no
/// occurrence containing a point of `counter`, sorted row-major.
fn uncovered_classes(index: &HashIndex<'_>, counter: &PointCounter, k: usize) -> Vec<(usize, usize)> {
    let classes = SquareClasses::build(index, k);
    let mut out: Vec<(usize, usize)> = classes
        .runs
        .iter()
        .filter(|&&run| classes.occurrences(run).all(|(i, j)| counter.count(i, j, k, k) == 0))
        .map(|&(start, _)| classes.anchor(start))
        .collect();
    out.sort_unstable();
    out
}

/// Checks that every distinct square submatrix has an occurrence containing
/// a position of `g`. On failure reports the smallest `k` and, within it, the
/// row-major-first uncovered anchor.
pub fn verify_attractor(index: &HashIndex<'_>, g: &Attractor) -> Result<Verification> {
    let m = index.matrix();
    let n = m.side()?;
    g.check_range(n, n)?;
    let counter = PointCounter::from_attractor(n, g);
    let witness = (1..=n)
        .into_par_iter()
        .find_map_first(|k| uncovered_classes(index, &counter, k).first().map(|&a| (k, a)));
    Ok(match witness {
        None => Verification::Valid,
        Some((k, (i, j))) => Verification::Uncovered {
            k,
            anchor: (i + 1, j + 1),
        },
    })
}

pub fn is_string_attractor(s: &[Symbol], g: &StringAttractor) -> bool {
    let len = s.len();
    if g.positions.iter().any(|&p| p == 0 || p > len) {
        return false;
    }
    (1..=len).all(|l| {
        let mut covered: BTreeMap<&[Symbol], bool> = BTreeMap::new();
        for start in 0..=len - l {
            let hit = g.positions.range(start + 1..=start + l).next().is_some();
            *covered.entry(&s[start..start + l]).or_insert(false) |= hit;
        }
        covered.values().all(|&c| c)
    })
}

/// Limits for the exact searches.
#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    /// Search nodes before giving up as inconclusive.
    pub budget: u64,
    /// Largest side (or string length) accepted without override.
    pub max_size: usize,
}

impl ExactOptions {
    pub const MATRIX_DEFAULT: ExactOptions = ExactOptions {
        budget: 20_000_000,
        max_size: 10,
    };
    pub const STRING_DEFAULT: ExactOptions = ExactOptions {
        budget: 20_000_000,
        max_size: 16,
    };
}

/// For every distinct square submatrix, in `(k, first anchor)` order, the
/// set of 0-based flat positions lying in at least one of its occurrences.
pub fn covering_sets(index: &HashIndex<'_>) -> Result<Vec<BitSet>> {
    let n = index.matrix().side()?;
    let mut out = Vec::new();
    for k in 1..=n {
        let classes = SquareClasses::build(index, k);
        let mut sets: Vec<((usize, usize), BitSet)> = classes
            .runs
            .iter()
            .map(|&run| {
                let mut s = BitSet::new(n * n);
                for (i, j) in classes.occurrences(run) {
                    for r in i..i + k {
                        for c in j..j + k {
                            s.insert(r * n + c);
                        }
                    }
                }
                (classes.anchor(run.0), s)
            })
            .collect();
        sets.sort_by_key(|(a, _)| *a);
        out.extend(sets.into_iter().map(|(_, s)| s));
    }
    Ok(out)
}

/// A minimum attractor, by branch and bound over covering sets.
///
/// Exponential in the worst case; refuses sides above `opts.max_size` and
/// reports [`Error::Inconclusive`] when the node budget runs out.
pub fn gamma_exact(index: &HashIndex<'_>, opts: ExactOptions) -> Result<Attractor> {
    let m = index.matrix();
    let n = m.side()?;
    if n > opts.max_size {
        return Err(Error::Inconclusive(format!(
            "exact search refused for n = {n} > {} (raise the size cap to force it)",
            opts.max_size
        )));
    }
    let delta = delta_profile_naive(index)?.delta2d;
    let lower = (m.sigma() as u64).max(delta.ceil()) as usize;
    let problem = HittingSetProblem::new(n * n, covering_sets(index)?);
    let sol = problem.solve(lower, opts.budget)?;
    Ok(Attractor::new(sol.elements.iter().map(|&x| (x / n + 1, x % n + 1))))
}

pub fn string_covering_sets(s: &[Symbol]) -> Vec<BitSet> {
    let len = s.len();
    let mut out = Vec::new();
    for l in 1..=len {
        let mut by_content: BTreeMap<&[Symbol], (usize, BitSet)> = BTreeMap::new();
        for start in 0..=len - l {
            let entry = by_content
                .entry(&s[start..start + l])
                .or_insert_with(|| (start, BitSet::new(len)));
            for p in start..start + l {
                entry.1.insert(p);
            }
        }
        let mut sets: Vec<(usize, BitSet)> = by_content.into_values().collect();
        sets.sort_by_key(|(first, _)| *first);
        out.extend(sets.into_iter().map(|(_, b)| b));
    }
    out
}

/// A minimum string attractor, by the same branch and bound.
pub fn gamma_exact_string(s: &[Symbol], opts: ExactOptions) -> Result<StringAttractor> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("empty string".into()));
    }
    if s.len() > opts.max_size {
        return Err(Error::Inconclusive(format!(
            "exact search refused for length {} > {}",
            s.len(),
            opts.max_size
        )));
    }
    let sigma = s.iter().collect::<BTreeSet<_>>().len();
    let problem = HittingSetProblem::new(s.len(), string_covering_sets(s));
    let sol = problem.solve(sigma, opts.budget)?;
    Ok(StringAttractor::new(sol.elements.iter().map(|&x| x + 1)))
}

/// Largest `k` the greedy phase considers by default.
pub const GREEDY_K_CAP: usize = 8;

/// A valid, not necessarily minimum, attractor.
///
/// Greedy set cover over the classes with `k <= k_cap`, repeatedly taking the
/// position that covers the most uncovered classes (row-major-first on
/// ties), then one patch pass over all `k` that adds the center of the first
/// occurrence of every class still uncovered.
pub fn gamma_greedy(index: &HashIndex<'_>, k_cap: usize) -> Result<Attractor> {
    let m = index.matrix();
    let n = m.side()?;
    let k_cap = k_cap.clamp(1, n);

    // sparse covers, flat 0-based positions
    let mut covers: Vec<Vec<u32>> = Vec::new();
    let mut stamp = vec![u32::MAX; n * n];
    let mut generation = 0u32;
    for k in 1..=k_cap {
        let classes = SquareClasses::build(index, k);
        for &run in &classes.runs {
            let mut cells = Vec::new();
            for (i, j) in classes.occurrences(run) {
                for r in i..i + k {
                    for c in j..j + k {
                        let x = r * n + c;
                        if stamp[x] != generation {
                            stamp[x] = generation;
                            cells.push(x as u32);
                        }
                    }
                }
            }
            cells.sort_unstable();
            covers.push(cells);
            generation += 1;
        }
    }

    let mut gain = vec![0u32; n * n];
    for cover in &covers {
        for &x in cover {
            gain[x as usize] += 1;
        }
    }
    let mut open: Vec<usize> = (0..covers.len()).collect();
    let mut picked = Vec::new();
    while !open.is_empty() {
        let (best, _) = gain
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty grid");
        picked.push(best);
        open.retain(|&c| {
            let hit = covers[c].binary_search(&(best as u32)).is_ok();
            if hit {
                for &x in &covers[c] {
                    gain[x as usize] -= 1;
                }
            }
            !hit
        });
    }

    let mut points: Vec<(usize, usize)> = picked.iter().map(|&x| (x / n, x % n)).collect();
    for k in k_cap + 1..=n {
        let counter = PointCounter::new(n, points.iter().copied());
        let mut added: Vec<(usize, usize)> = Vec::new();
        for (i, j) in uncovered_classes(index, &counter, k) {
            // an earlier patch at this k may already cover this class
            if added.iter().any(|&(r, c)| r >= i && r < i + k && c >= j && c < j + k) {
                continue;
            }
            added.push((i + k / 2, j + k / 2));
        }
        points.extend(added);
    }

    let g = Attractor::new(points.into_iter().map(|(i, j)| (i + 1, j + 1)));
    match verify_attractor(index, &g)? {
        Verification::Valid => Ok(g),
        Verification::Uncovered { k, anchor } => Err(Error::InvalidAttractor(format!(
            "greedy result leaves the {k}x{k} submatrix at {anchor:?} uncovered"
        ))),
    }
}

/// Counts the given squares (0-based `(row, col, side)`) that occur exactly
/// once in the matrix. The squares must be pairwise disjoint, so every
/// attractor needs a distinct position inside each unique one; the count is
/// therefore a lower bound on the minimum attractor size.
pub fn disjoint_unique_lower_bound(
    index: &HashIndex<'_>,
    squares: &[(usize, usize, usize)],
) -> Result<usize> {
    let m = index.matrix();
    let n = m.side()?;
    for (a, &(i, j, k)) in squares.iter().enumerate() {
        if k == 0 || i + k > n || j + k > n {
            return Err(Error::InvalidParameter(format!(
                "square {k}x{k} at ({i},{j}) does not fit"
            )));
        }
        for &(i2, j2, k2) in &squares[a + 1..] {
            let rows = i < i2 + k2 && i2 < i + k;
            let cols = j < j2 + k2 && j2 < j + k;
            if rows && cols {
                return Err(Error::InvalidParameter(format!(
                    "squares at ({i},{j}) and ({i2},{j2}) overlap"
                )));
            }
        }
    }
    let mut by_side: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &(i, j, k) in squares {
        by_side.entry(k).or_default().push((i, j));
    }
    let mut unique = 0;
    for (k, anchors) in by_side {
        let span = n - k + 1;
        let mut counts: BTreeMap<Fingerprint, usize> =
            anchors.iter().map(|&(i, j)| (index.square(i, j, k), 0)).collect();
        for a in 0..span * span {
            let (i, j) = (a / span, a % span);
            if let Some(c) = counts.get_mut(&index.square(i, j, k)) {
                *c += 1;
            }
        }
        for &(i, j) in &anchors {
            let occ = counts[&index.square(i, j, k)];
            if occ == 1 {
                unique += 1;
            } else if index.is_paranoid() {
                let exact = (0..span * span)
                    .filter(|&a| m.squares_equal((a / span, a % span), (i, j), k))
                    .count();
                if exact == 1 {
                    unique += 1;
                }
            }
        }
    }
    Ok(unique)
}

/// `R^S`: the `|S|`x`|S|` matrix whose every row is `S`.
pub fn reduce_string_to_matrix(s: &[Symbol]) -> Result<Matrix> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("empty string".into()));
    }
    let n = s.len();
    Matrix::from_fn(n, n, |_, j| s[j])
}

/// Places each string position on the first row.
pub fn lift_attractor(g: &StringAttractor) -> Attractor {
    Attractor::new(g.positions.iter().map(|&j| (1, j)))
}

/// Projects positions onto their columns. Column collisions shrink the set;
/// it is then completed up to `k` with the smallest unused indices in
/// `1..=len`.
pub fn project_attractor(g: &Attractor, k: usize, len: usize) -> Result<StringAttractor> {
    if k > len {
        return Err(Error::InvalidParameter(format!("cannot pick {k} of {len} positions")));
    }
    let mut cols: BTreeSet<usize> = g.positions.iter().map(|&(_, j)| j).collect();
    if let Some(&bad) = cols.iter().find(|&&j| j == 0 || j > len) {
        return Err(out_of_range("attractor column", bad, format!("1..={len}")));
    }
    let mut next = 1;
    while cols.len() < k {
        if cols.insert(next) {
            continue;
        }
        next += 1;
    }
    Ok(StringAttractor { positions: cols })
}
