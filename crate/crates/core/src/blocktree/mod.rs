//! Two-dimensional block trees.
//!
//! The (padded) matrix is cut into a grid of square blocks; level `l + 1`
//! splits every marked block of level `l` into `k`x`k` children. A marked
//! block is expanded, an unmarked one stores a pointer to a marked block of
//! its own level plus the offset of an occurrence of its content inside that
//! block. Marked blocks of the deepest level store their symbols.
//!
//! Two marking rules are provided, see [`build_bt`] and [`build_gamma_bt`].

mod build;
mod serial;

pub use build::{build_bt, build_gamma_bt, BuildOptions};
pub use serial::{deserialize, serialize, FORMAT_VERSION, MAGIC};

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::matrix::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    FirstOccurrence,
    Attractor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    /// Index into the level's marked list.
    Marked(u32),
    /// Occurrence of this block's content starts at `offset` inside marked
    /// block `target`; it may run into that block's right/lower neighbours.
    Unmarked { target: u32, offset: (u32, u32) },
    /// Lies entirely in the padding; never reached by in-range queries.
    Padding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub side: usize,
    /// Blocks per axis.
    pub grid: usize,
    /// Live blocks: the whole grid on the first level, otherwise the `k^2`
    /// children of each marked block of the level above, in marked order.
    pub nodes: Vec<Node>,
    /// Grid coordinates of marked blocks, sorted row-major.
    pub marked: Vec<(u32, u32)>,
    /// Deepest level only: `side^2` symbols per marked block, row-major.
    pub payload: Vec<Symbol>,
}

impl Level {
    fn marked_index(&self, bi: usize, bj: usize) -> Option<usize> {
        self.marked.binary_search(&(bi as u32, bj as u32)).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTree {
    pub(crate) k: usize,
    /// Side of the source matrix.
    pub(crate) n: usize,
    /// Side after padding to the block grid.
    pub(crate) padded_side: usize,
    pub(crate) leaf_side: usize,
    pub(crate) origin: Origin,
    pub(crate) fill: Symbol,
    pub(crate) sigma: usize,
    /// The measure the shallow first level was sized from, if any.
    pub(crate) shallow: Option<u64>,
    pub(crate) levels: Vec<Level>,
}

/// Per-level node counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub side: usize,
    pub live: usize,
    pub marked: usize,
    pub unmarked: usize,
    pub padding: usize,
    /// Marked blocks that intersect the unpadded matrix.
    pub logical_marked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BTStats {
    pub n: usize,
    pub padded_side: usize,
    pub k: usize,
    pub leaf_side: usize,
    pub origin: Origin,
    pub shallow_measure: Option<u64>,
    pub levels: Vec<LevelStats>,
    pub max_marked_per_level: usize,
    /// Root plus every live node.
    pub nodes: usize,
    pub pointers: usize,
    pub explicit_symbols: usize,
    /// `nodes + pointers + explicit_symbols`.
    pub space_units: usize,
    /// 2 bits per node, a pointer as marked-index plus two offsets, one
    /// symbol per explicit cell; a reporting convention.
    pub estimated_bits: u64,
}

fn bits_for(values: usize) -> u64 {
    (usize::BITS - values.max(2).saturating_sub(1).leading_zeros()) as u64
}

impl BlockTree {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn padded_side(&self) -> usize {
        self.padded_side
    }

    pub fn leaf_side(&self) -> usize {
        self.leaf_side
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Grid coordinates of live node `idx` on level `l` (0-based level).
    pub fn node_coords(&self, l: usize, idx: usize) -> (usize, usize) {
        let level = &self.levels[l];
        if l == 0 {
            return (idx / level.grid, idx % level.grid);
        }
        let kk = self.k * self.k;
        let (pi, pj) = self.levels[l - 1].marked[idx / kk];
        let child = idx % kk;
        (pi as usize * self.k + child / self.k, pj as usize * self.k + child % self.k)
    }

    /// `M[i][j]` for 0-based in-range coordinates.
    pub fn access(&self, i: usize, j: usize) -> Result<Symbol> {
        self.access_traced(i, j).map(|(s, _)| s)
    }

    /// Like [`access`](Self::access), also returning the nodes visited on
    /// each level (1 for a marked node, 2 when a pointer is followed).
    pub fn access_traced(&self, i: usize, j: usize) -> Result<(Symbol, Vec<u8>)> {
        if i >= self.n || j >= self.n {
            return Err(out_of_range("cell", i.max(j), format!("0..{}", self.n)));
        }
        let (mut r, mut c) = (i, j);
        let first = &self.levels[0];
        let mut idx = (r / first.side) * first.grid + c / first.side;
        let mut visits = Vec::with_capacity(self.levels.len());
        for (l, level) in self.levels.iter().enumerate() {
            let s = level.side;
            let node = *level
                .nodes
                .get(idx)
                .ok_or_else(|| Error::Corrupt(format!("level {l}: node {idx} missing")))?;
            let m = match node {
                Node::Marked(m) => {
                    visits.push(1);
                    m as usize
                }
                Node::Unmarked { target, offset } => {
                    let (ti, tj) = level.marked[target as usize];
                    r = ti as usize * s + offset.0 as usize + r % s;
                    c = tj as usize * s + offset.1 as usize + c % s;
                    visits.push(2);
                    level.marked_index(r / s, c / s).ok_or_else(|| {
                        Error::Corrupt(format!("level {l}: pointer reaches an unmarked block"))
                    })?
                }
                Node::Padding => {
                    return Err(Error::Corrupt(format!("level {l}: query reached padding")));
                }
            };
            let (mi, mj) = level.marked[m];
            let (lr, lc) = (r - mi as usize * s, c - mj as usize * s);
            if l + 1 == self.levels.len() {
                return Ok((level.payload[m * s * s + lr * s + lc], visits));
            }
            let cs = self.levels[l + 1].side;
            idx = m * self.k * self.k + (lr / cs) * self.k + lc / cs;
        }
        unreachable!("a tree has at least one level")
    }

    pub fn stats(&self) -> BTStats {
        let mut levels = Vec::with_capacity(self.levels.len());
        let (mut live, mut pointers, mut bits) = (0usize, 0usize, 0u64);
        for (l, level) in self.levels.iter().enumerate() {
            let mut st = LevelStats {
                level: l + 1,
                side: level.side,
                live: level.nodes.len(),
                marked: level.marked.len(),
                unmarked: 0,
                padding: 0,
                logical_marked: 0,
            };
            for node in &level.nodes {
                match node {
                    Node::Unmarked { .. } => st.unmarked += 1,
                    Node::Padding => st.padding += 1,
                    Node::Marked(_) => {}
                }
            }
            st.logical_marked = level
                .marked
                .iter()
                .filter(|&&(bi, bj)| (bi as usize * level.side) < self.n && (bj as usize * level.side) < self.n)
                .count();
            live += st.live;
            pointers += st.unmarked;
            bits += 2 * st.live as u64
                + st.unmarked as u64 * (bits_for(st.marked) + 2 * bits_for(level.side));
            levels.push(st);
        }
        let explicit = self.levels.last().map_or(0, |l| l.payload.len());
        bits += explicit as u64 * bits_for(self.sigma + 1);
        BTStats {
            n: self.n,
            padded_side: self.padded_side,
            k: self.k,
            leaf_side: self.leaf_side,
            origin: self.origin,
            shallow_measure: self.shallow,
            max_marked_per_level: levels.iter().map(|l| l.marked).max().unwrap_or(0),
            levels,
            nodes: live + 1,
            pointers,
            explicit_symbols: explicit,
            space_units: live + 1 + pointers + explicit,
            estimated_bits: bits + 2,
        }
    }
}
