//! Binary form: little-endian, `MAGIC`, a version byte, a header and then
//! each level as `side, grid, nodes, marked list, payload`.

use super::{BlockTree, Level, Node, Origin};
use crate::error::{Error, Result};
use crate::matrix::Symbol;

pub const MAGIC: &[u8; 4] = b"2DBT";
pub const FORMAT_VERSION: u8 = 1;

const TAG_MARKED: u8 = 0;
const TAG_UNMARKED: u8 = 1;
const TAG_PADDING: u8 = 2;

pub fn serialize(t: &BlockTree) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(t.n as u64).to_le_bytes());
    out.extend_from_slice(&(t.padded_side as u64).to_le_bytes());
    out.extend_from_slice(&(t.k as u32).to_le_bytes());
    out.push(match t.origin {
        Origin::FirstOccurrence => 0,
        Origin::Attractor => 1,
    });
    out.extend_from_slice(&(t.leaf_side as u64).to_le_bytes());
    out.extend_from_slice(&t.fill.to_le_bytes());
    out.extend_from_slice(&(t.sigma as u32).to_le_bytes());
    out.push(t.shallow.is_some() as u8);
    out.extend_from_slice(&t.shallow.unwrap_or(0).to_le_bytes());
    out.extend_from_slice(&(t.levels.len() as u32).to_le_bytes());
    for level in &t.levels {
        out.extend_from_slice(&(level.side as u64).to_le_bytes());
        out.extend_from_slice(&(level.grid as u64).to_le_bytes());
        out.extend_from_slice(&(level.nodes.len() as u64).to_le_bytes());
        for node in &level.nodes {
            match *node {
                Node::Marked(m) => {
                    out.push(TAG_MARKED);
                    out.extend_from_slice(&m.to_le_bytes());
                }
                Node::Unmarked { target, offset } => {
                    out.push(TAG_UNMARKED);
                    out.extend_from_slice(&target.to_le_bytes());
                    out.extend_from_slice(&offset.0.to_le_bytes());
                    out.extend_from_slice(&offset.1.to_le_bytes());
                }
                Node::Padding => out.push(TAG_PADDING),
            }
        }
        out.extend_from_slice(&(level.marked.len() as u64).to_le_bytes());
        for &(bi, bj) in &level.marked {
            out.extend_from_slice(&bi.to_le_bytes());
            out.extend_from_slice(&bj.to_le_bytes());
        }
        out.extend_from_slice(&(level.payload.len() as u64).to_le_bytes());
        for s in &level.payload {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::Truncated(format!("{what} at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.array::<1>(what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        self.array(what).map(u16::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.array(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        self.array(what).map(u64::from_le_bytes)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| Error::Corrupt(format!("{what} {v} does not fit in memory")))
    }

    /// A count of records of `record` bytes each; rejected before anything
    /// is allocated when the input cannot hold that many.
    fn count(&mut self, record: usize, what: &str) -> Result<usize> {
        let c = self.u64(what)?;
        let left = (self.bytes.len() - self.pos) as u64;
        if c.checked_mul(record as u64).is_none_or(|b| b > left) {
            return Err(Error::Truncated(format!("{what} of {c} exceeds the remaining {left} bytes")));
        }
        Ok(c as usize)
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<BlockTree> {
    if bytes.len() < MAGIC.len() + 1 {
        if bytes.is_empty() || MAGIC.starts_with(bytes) {
            return Err(Error::Version(None));
        }
        return Err(Error::BadMagic);
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::Version(Some(bytes[4])));
    }
    let mut r = Reader { bytes, pos: 5 };
    let n = r.usize("matrix side")?;
    let padded_side = r.usize("padded side")?;
    let k = r.u32("k")? as usize;
    let origin = match r.u8("origin")? {
        0 => Origin::FirstOccurrence,
        1 => Origin::Attractor,
        x => return Err(Error::Corrupt(format!("unknown origin tag {x}"))),
    };
    let leaf_side = r.usize("leaf side")?;
    let fill = r.u16("fill symbol")?;
    let sigma = r.u32("alphabet size")? as usize;
    let has_shallow = r.u8("shallow flag")?;
    let measure = r.u64("shallow measure")?;
    let shallow = match has_shallow {
        0 => None,
        1 => Some(measure),
        x => return Err(Error::Corrupt(format!("shallow flag {x}"))),
    };
    let num_levels = r.u32("level count")? as usize;
    // every level has at least its three length fields
    if num_levels.saturating_mul(40) > bytes.len() - r.pos {
        return Err(Error::Truncated(format!("{num_levels} levels")));
    }
    let mut levels = Vec::with_capacity(num_levels);
    for l in 0..num_levels {
        let side = r.usize("block side")?;
        let grid = r.usize("grid size")?;
        let count = r.count(1, "node count")?;
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            nodes.push(match r.u8("node tag")? {
                TAG_MARKED => Node::Marked(r.u32("marked index")?),
                TAG_UNMARKED => Node::Unmarked {
                    target: r.u32("pointer target")?,
                    offset: (r.u32("row offset")?, r.u32("column offset")?),
                },
                TAG_PADDING => Node::Padding,
                x => return Err(Error::Corrupt(format!("level {l}: unknown node tag {x}"))),
            });
        }
        let count = r.count(8, "marked count")?;
        let mut marked = Vec::with_capacity(count);
        for _ in 0..count {
            marked.push((r.u32("marked row")?, r.u32("marked column")?));
        }
        let count = r.count(2, "payload length")?;
        let payload: Vec<Symbol> = (0..count).map(|_| r.u16("payload")).collect::<Result<_>>()?;
        levels.push(Level {
            side,
            grid,
            nodes,
            marked,
            payload,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let t = BlockTree {
        k,
        n,
        padded_side,
        leaf_side,
        origin,
        fill,
        sigma,
        shallow,
        levels,
    };
    validate(&t)?;
    Ok(t)
}

fn corrupt(msg: String) -> Error {
    Error::Corrupt(msg)
}

fn validate(t: &BlockTree) -> Result<()> {
    if t.k < 2 {
        return Err(corrupt(format!("k = {}", t.k)));
    }
    if t.n == 0 || t.n > t.padded_side {
        return Err(corrupt(format!("side {} with padded side {}", t.n, t.padded_side)));
    }
    let Some(last) = t.levels.last() else {
        return Err(corrupt("no levels".into()));
    };
    for (l, level) in t.levels.iter().enumerate() {
        let s = level.side;
        if s == 0 || s.checked_mul(level.grid) != Some(t.padded_side) {
            return Err(corrupt(format!("level {l}: {} blocks of side {s}", level.grid)));
        }
        if l > 0 && t.levels[l - 1].side != s * t.k {
            return Err(corrupt(format!("level {l}: side {s} after {}", t.levels[l - 1].side)));
        }
        let expected = if l == 0 {
            level.grid.checked_mul(level.grid)
        } else {
            t.levels[l - 1].marked.len().checked_mul(t.k * t.k)
        };
        if expected != Some(level.nodes.len()) {
            return Err(corrupt(format!("level {l}: {} nodes, expected {expected:?}", level.nodes.len())));
        }
        if level.marked.windows(2).any(|w| w[0] >= w[1])
            || level.marked.iter().any(|&(bi, bj)| bi as usize >= level.grid || bj as usize >= level.grid)
        {
            return Err(corrupt(format!("level {l}: marked list unsorted or out of the grid")));
        }
        let mut seen = 0;
        for (idx, node) in level.nodes.iter().enumerate() {
            match *node {
                Node::Marked(m) => {
                    if level.marked.get(m as usize).map(|&(a, b)| (a as usize, b as usize))
                        != Some(t.node_coords(l, idx))
                    {
                        return Err(corrupt(format!("level {l}: node {idx} has a wrong marked index")));
                    }
                    seen += 1;
                }
                Node::Unmarked { target, offset } => {
                    if target as usize >= level.marked.len() || offset.0 as usize >= s || offset.1 as usize >= s {
                        return Err(corrupt(format!("level {l}: node {idx} has a dangling pointer")));
                    }
                }
                Node::Padding => {}
            }
        }
        if seen != level.marked.len() {
            return Err(corrupt(format!("level {l}: marked blocks outside the live set")));
        }
        let payload = if std::ptr::eq(level, last) { level.marked.len() * s * s } else { 0 };
        if level.payload.len() != payload {
            return Err(corrupt(format!("level {l}: payload of {} symbols", level.payload.len())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::{build_bt, BuildOptions};
    use crate::matrix::Matrix;

    fn sample() -> BlockTree {
        let m = Matrix::from_rows(&["abab", "baba", "abab", "bbbb"]).unwrap();
        build_bt(&m, &BuildOptions { leaf_side: 1, ..BuildOptions::new(2) }).unwrap()
    }

    #[test]
    fn round_trip() {
        let t = sample();
        let bytes = serialize(&t);
        assert_eq!(&bytes[..4], MAGIC);
        assert_eq!(deserialize(&bytes).unwrap(), t);
    }

    #[test]
    fn rejects_bad_streams() {
        assert!(matches!(deserialize(&[]), Err(Error::Version(None))));
        assert!(matches!(deserialize(b"2DB"), Err(Error::Version(None))));
        assert!(matches!(deserialize(b"XXXX\x01"), Err(Error::BadMagic)));
        assert!(matches!(deserialize(b"2DBT\x09"), Err(Error::Version(Some(9)))));

        let bytes = serialize(&sample());
        assert!(matches!(deserialize(&bytes[..bytes.len() - 1]), Err(Error::Truncated(_))));
        // first level's node count
        let mut big = bytes.clone();
        let at = 5 + 8 + 8 + 4 + 1 + 8 + 2 + 4 + 1 + 8 + 4 + 16;
        big[at..at + 8].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(deserialize(&big), Err(Error::Truncated(_))));
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(deserialize(&trailing), Err(Error::Corrupt(_))));
    }

    #[test]
    fn rejects_inconsistent_trees() {
        let mut t = sample();
        t.levels[0].marked.reverse();
        assert!(matches!(deserialize(&serialize(&t)), Err(Error::Corrupt(_))));
        let mut t = sample();
        t.levels[0].nodes[1] = Node::Unmarked { target: 99, offset: (0, 0) };
        assert!(matches!(deserialize(&serialize(&t)), Err(Error::Corrupt(_))));
    }
}
