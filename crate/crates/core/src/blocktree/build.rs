use std::collections::HashMap;

use super::{BlockTree, Level, Node, Origin};
use crate::attractor::{verify_attractor, Attractor, PointCounter, SquareClasses, Verification};
use crate::delta::delta_profile_fast;
use crate::error::{Error, Result};
use crate::hash::{Fingerprint, HashIndex};
use crate::matrix::{Matrix, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Children per axis; at least 2.
    pub k: usize,
    /// Blocks of this side or smaller are stored explicitly when marked.
    pub leaf_side: usize,
    /// Size the first level from a repetitiveness measure instead of
    /// splitting the root into `k`x`k`.
    pub shallow: bool,
    /// Measure for the shallow first level; computed when `None` (`delta`
    /// rounded up for first-occurrence trees, `|G|` for attractor trees).
    pub shallow_measure: Option<u64>,
}

impl BuildOptions {
    pub fn new(k: usize) -> Self {
        BuildOptions {
            k,
            leaf_side: k,
            shallow: false,
            shallow_measure: None,
        }
    }
}

struct Layout {
    padded_side: usize,
    sides: Vec<usize>,
    fill: Symbol,
}

/// Smallest power of `k` that is at least `n` and exceeds `leaf`.
fn padded_side(n: usize, k: usize, leaf: usize) -> usize {
    let mut side = k;
    while side < n || side <= leaf {
        side *= k;
    }
    side
}

fn isqrt_ceil(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while r * r < v {
        r += 1;
    }
    r
}

fn layout(m: &Matrix, opts: &BuildOptions, measure: impl FnOnce() -> Result<u64>) -> Result<(Layout, Option<u64>)> {
    let n = m.side()?;
    let k = opts.k;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if opts.leaf_side == 0 {
        return Err(Error::InvalidParameter("leaf side must be positive".into()));
    }
    let n0 = padded_side(n, k, opts.leaf_side);
    if m.max_symbol() == Symbol::MAX {
        return Err(Error::UnsupportedAlphabet("no room for a padding symbol".into()));
    }
    let mut first = n0 / k;
    let mut shallow = None;
    if opts.shallow {
        let measure = match opts.shallow_measure {
            Some(v) => v,
            None => measure()?,
        }
        .max(1);
        let limit = n0 / isqrt_ceil(measure) as usize;
        let mut side = 1;
        while side * k <= limit {
            side *= k;
        }
        first = first.min(side);
        shallow = Some(measure);
    }
    let mut sides = vec![first];
    while *sides.last().unwrap() > opts.leaf_side {
        let s = sides.last().unwrap() / k;
        sides.push(s);
    }
    Ok((
        Layout {
            padded_side: n0,
            sides,
            fill: m.max_symbol() + 1,
        },
        shallow,
    ))
}

fn pad(m: &Matrix, side: usize, fill: Symbol) -> Result<Matrix> {
    let n = m.rows();
    Matrix::from_fn(side, side, |i, j| if i < n && j < n { m.get(i, j) } else { fill })
}

/// Grid coordinates of the live blocks of a level.
fn live_blocks(k: usize, grid: usize, parent: Option<&Level>) -> Vec<(usize, usize)> {
    match parent {
        None => (0..grid * grid).map(|x| (x / grid, x % grid)).collect(),
        Some(p) => p
            .marked
            .iter()
            .flat_map(|&(pi, pj)| {
                (0..k * k).map(move |c| (pi as usize * k + c / k, pj as usize * k + c % k))
            })
            .collect(),
    }
}

/// Turns a marking into a level: checks it only marks live blocks, orders
/// the marked list and resolves every unmarked block with `point`.
fn assemble(
    side: usize,
    grid: usize,
    live: &[(usize, usize)],
    marked_grid: &[bool],
    mut point: impl FnMut((usize, usize)) -> Result<Option<(usize, usize)>>,
) -> Result<Level> {
    let mut is_live = vec![false; grid * grid];
    for &(bi, bj) in live {
        is_live[bi * grid + bj] = true;
    }
    let mut marked = Vec::new();
    let mut marked_id = vec![u32::MAX; grid * grid];
    for x in 0..grid * grid {
        if marked_grid[x] {
            if !is_live[x] {
                return Err(Error::Corrupt(format!(
                    "side {side}: block {:?} is marked under a pruned ancestor",
                    (x / grid, x % grid)
                )));
            }
            marked_id[x] = marked.len() as u32;
            marked.push(((x / grid) as u32, (x % grid) as u32));
        }
    }
    let mut nodes = Vec::with_capacity(live.len());
    for &(bi, bj) in live {
        let x = bi * grid + bj;
        if marked_grid[x] {
            nodes.push(Node::Marked(marked_id[x]));
            continue;
        }
        match point((bi, bj))? {
            None => nodes.push(Node::Padding),
            Some((r, c)) => {
                let t = marked_id[(r / side) * grid + c / side];
                if t == u32::MAX {
                    return Err(Error::Corrupt(format!(
                        "side {side}: block {:?} would point into an unmarked block",
                        (bi, bj)
                    )));
                }
                let (ti, tj) = marked[t as usize];
                nodes.push(Node::Unmarked {
                    target: t,
                    offset: ((r - ti as usize * side) as u32, (c - tj as usize * side) as u32),
                });
            }
        }
    }
    Ok(Level {
        side,
        grid,
        nodes,
        marked,
        payload: Vec::new(),
    })
}

fn fill_payload(level: &mut Level, padded: &Matrix) {
    let s = level.side;
    let mut payload = Vec::with_capacity(level.marked.len() * s * s);
    for &(bi, bj) in &level.marked {
        for r in 0..s {
            payload.extend_from_slice(&padded.row(bi as usize * s + r)[bj as usize * s..][..s]);
        }
    }
    level.payload = payload;
}

/// Block tree marked by first occurrences.
///
/// On a level with block side `s`, a block is marked iff it intersects the
/// row-major-first occurrence of some `s`x`s` submatrix of the padded
/// matrix. An unmarked block points at the block holding the top-left cell
/// of its own content's first occurrence. Because any square containing a
/// first occurrence is itself one, every marked block has a marked parent.
pub fn build_bt(m: &Matrix, opts: &BuildOptions) -> Result<BlockTree> {
    let (lay, shallow) = layout(m, opts, || Ok(delta_profile_fast(m)?.delta2d.ceil()))?;
    let padded = pad(m, lay.padded_side, lay.fill)?;
    let index = HashIndex::new(&padded);
    let n0 = lay.padded_side;

    let mut levels: Vec<Level> = Vec::with_capacity(lay.sides.len());
    for &s in &lay.sides {
        let grid = n0 / s;
        let live = live_blocks(opts.k, grid, levels.last());
        let classes = SquareClasses::build(&index, s);
        let mut marked_grid = vec![false; grid * grid];
        for &(start, _) in &classes.runs {
            let (r, c) = classes.anchor(start);
            for bi in r / s..=(r + s - 1) / s {
                for bj in c / s..=(c + s - 1) / s {
                    marked_grid[bi * grid + bj] = true;
                }
            }
        }
        let first_occurrence = |fp: Fingerprint| {
            let at = classes.keys.partition_point(|(f, _)| *f < fp);
            debug_assert_eq!(classes.keys[at].0, fp);
            classes.anchor(at)
        };
        let level = assemble(s, grid, &live, &marked_grid, |(bi, bj)| {
            Ok(Some(first_occurrence(index.square(bi * s, bj * s, s))))
        })?;
        levels.push(level);
    }
    let last = levels.last_mut().expect("at least one level");
    fill_payload(last, &padded);

    Ok(BlockTree {
        k: opts.k,
        n: m.rows(),
        padded_side: n0,
        leaf_side: opts.leaf_side,
        origin: Origin::FirstOccurrence,
        fill: lay.fill,
        sigma: m.sigma(),
        shallow,
        levels,
    })
}

/// Row-major-first occurrence of each `c`x`c` content among occurrences
/// that contain an attractor position.
struct AttractedOccurrences {
    span: usize,
    keys: Vec<(Fingerprint, u32)>,
}

impl AttractedOccurrences {
    fn build(index: &HashIndex<'_>, counter: &PointCounter, c: usize) -> Self {
        let n = index.matrix().rows();
        let span = n - c + 1;
        let mut keys: Vec<(Fingerprint, u32)> = (0..span * span)
            .filter(|&a| counter.count(a / span, a % span, c, c) > 0)
            .map(|a| (index.square(a / span, a % span, c), a as u32))
            .collect();
        keys.sort_unstable();
        AttractedOccurrences { span, keys }
    }

    fn first(&self, fp: Fingerprint) -> Option<(usize, usize)> {
        let at = self.keys.partition_point(|(f, _)| *f < fp);
        let &(f, a) = self.keys.get(at)?;
        (f == fp).then(|| (a as usize / self.span, a as usize % self.span))
    }
}

/// Block tree marked by an attractor.
///
/// On every level, the blocks containing a position of `g` and their (up to
/// eight) neighbours are marked. An unmarked block points at the block
/// holding the top-left cell of the row-major-first occurrence of its
/// content that contains a position of `g`; that occurrence never overlaps
/// the block itself. Blocks cut by the padding border point at an
/// occurrence of their unpadded part, found through the smallest square of
/// the matrix that contains it; blocks entirely in the padding become
/// [`Node::Padding`].
pub fn build_gamma_bt(m: &Matrix, g: &Attractor, opts: &BuildOptions) -> Result<BlockTree> {
    let n = m.side()?;
    let index = HashIndex::new(m);
    match verify_attractor(&index, g)? {
        Verification::Valid => {}
        Verification::Uncovered { k, anchor } => {
            return Err(Error::InvalidAttractor(format!(
                "the {k}x{k} submatrix at {anchor:?} has no occurrence containing a position"
            )))
        }
    }
    let (lay, shallow) = layout(m, opts, || Ok(g.len() as u64))?;
    let padded = pad(m, lay.padded_side, lay.fill)?;
    let n0 = lay.padded_side;
    let counter = PointCounter::from_attractor(n, g);
    let points: Vec<(usize, usize)> = g.positions().iter().map(|&(i, j)| (i - 1, j - 1)).collect();
    let mut cache: HashMap<usize, AttractedOccurrences> = HashMap::new();

    let mut levels: Vec<Level> = Vec::with_capacity(lay.sides.len());
    for &s in &lay.sides {
        let grid = n0 / s;
        let live = live_blocks(opts.k, grid, levels.last());
        let mut marked_grid = vec![false; grid * grid];
        for &(pi, pj) in &points {
            let (bi, bj) = (pi / s, pj / s);
            for di in bi.saturating_sub(1)..=(bi + 1).min(grid - 1) {
                for dj in bj.saturating_sub(1)..=(bj + 1).min(grid - 1) {
                    marked_grid[di * grid + dj] = true;
                }
            }
        }
        let level = assemble(s, grid, &live, &marked_grid, |(bi, bj)| {
            let (x0, y0) = (bi * s, bj * s);
            if x0 >= n || y0 >= n {
                return Ok(None);
            }
            let (h, w) = (s.min(n - x0), s.min(n - y0));
            let c = h.max(w);
            let (br, bc) = (x0.min(n - c), y0.min(n - c));
            let occ = cache
                .entry(c)
                .or_insert_with(|| AttractedOccurrences::build(&index, &counter, c))
                .first(index.square(br, bc, c))
                .ok_or_else(|| {
                    Error::InvalidAttractor(format!("no attracted occurrence of the {c}x{c} square at ({br},{bc})"))
                })?;
            let (r, col) = (occ.0 + x0 - br, occ.1 + y0 - bc);
            let disjoint = r + h <= x0 || x0 + h <= r || col + w <= y0 || y0 + w <= col;
            if !disjoint {
                return Err(Error::Corrupt(format!(
                    "side {s}: block ({bi},{bj}) overlaps its pointed occurrence"
                )));
            }
            Ok(Some((r, col)))
        })?;
        levels.push(level);
    }
    let last = levels.last_mut().expect("at least one level");
    fill_payload(last, &padded);

    Ok(BlockTree {
        k: opts.k,
        n,
        padded_side: n0,
        leaf_side: opts.leaf_side,
        origin: Origin::Attractor,
        fill: lay.fill,
        sigma: m.sigma(),
        shallow,
        levels,
    })
}
