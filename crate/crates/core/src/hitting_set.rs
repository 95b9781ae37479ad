//! Exact minimum hitting set by iterative-deepening branch and bound.
//!
//! Used for minimum attractors: every distinct submatrix (or substring)
//! contributes the set of positions that cover it, and an attractor is a set
//! of positions hitting all of them.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(universe: usize) -> Self {
        BitSet {
            words: vec![0; universe.div_ceil(64).max(1)],
        }
    }

    pub fn from_iter(universe: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(universe);
        for x in items {
            s.insert(x);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, x: usize) {
        self.words[x / 64] |= 1 << (x % 64);
    }

    #[inline]
    pub fn remove(&mut self, x: usize) {
        self.words[x / 64] &= !(1 << (x % 64));
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `|self \ other|`
    pub fn len_minus(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Sets over `0..universe`, in caller order; ties in the branching rule go
/// to the earliest set.
#[derive(Debug, Clone)]
pub struct HittingSetProblem {
    universe: usize,
    sets: Vec<BitSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingSetSolution {
    pub elements: Vec<usize>,
    pub nodes: u64,
}

impl HittingSetProblem {
    pub fn new(universe: usize, sets: Vec<BitSet>) -> Self {
        HittingSetProblem { universe, sets }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[BitSet] {
        &self.sets
    }

    /// Drops duplicates and supersets: hitting a subset hits its supersets.
    fn reduced(&self) -> Vec<BitSet> {
        let mut order: Vec<usize> = (0..self.sets.len()).collect();
        order.sort_by_key(|&i| (self.sets[i].len(), i));
        let mut kept: Vec<usize> = Vec::new();
        for &i in &order {
            if !kept.iter().any(|&j| self.sets[j].is_subset(&self.sets[i])) {
                kept.push(i);
            }
        }
        kept.sort_unstable();
        kept.into_iter().map(|i| self.sets[i].clone()).collect()
    }

    /// A minimum hitting set, searching sizes upward from `lower_bound`.
    /// Fails with [`Error::Inconclusive`] after `budget` search nodes.
    pub fn solve(&self, lower_bound: usize, budget: u64) -> Result<HittingSetSolution> {
        let sets = self.reduced();
        if sets.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidParameter("a set has no elements to hit".into()));
        }
        let mut search = Search {
            sets,
            picked: BitSet::new(self.universe),
            excluded: BitSet::new(self.universe),
            chosen: Vec::new(),
            nodes: 0,
            budget,
        };
        let mut target = lower_bound.max(search.packing_bound());
        loop {
            if let Some(mut elements) = search.dfs(target)? {
                elements.sort_unstable();
                return Ok(HittingSetSolution {
                    elements,
                    nodes: search.nodes,
                });
            }
            target += 1;
            if target > self.universe {
                return Err(Error::InvalidParameter("sets cannot all be hit".into()));
            }
        }
    }
}

struct Search {
    sets: Vec<BitSet>,
    picked: BitSet,
    excluded: BitSet,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search {
    /// Number of pairwise disjoint unhit sets found greedily; each needs its
    /// own element.
    fn packing_bound(&self) -> usize {
        let mut used = BitSet::new(self.picked.words.len() * 64);
        let mut count = 0;
        let mut open: Vec<(usize, usize)> = self
            .sets
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.intersects(&self.picked))
            .map(|(i, s)| (s.len_minus(&self.excluded), i))
            .collect();
        open.sort_unstable();
        for (_, i) in open {
            let s = &self.sets[i];
            let mut avail = s.clone();
            for (a, e) in avail.words.iter_mut().zip(&self.excluded.words) {
                *a &= !e;
            }
            if !avail.intersects(&used) {
                used.union_with(&avail);
                count += 1;
            }
        }
        count
    }

    fn dfs(&mut self, target: usize) -> Result<Option<Vec<usize>>> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Inconclusive(format!(
                "node budget of {} exhausted while trying size {target}",
                self.budget
            )));
        }
        // most constrained unhit set, earliest on ties
        let mut branch: Option<(usize, usize)> = None;
        for (i, s) in self.sets.iter().enumerate() {
            if s.intersects(&self.picked) {
                continue;
            }
            let avail = s.len_minus(&self.excluded);
            if branch.is_none_or(|(best, _)| avail < best) {
                branch = Some((avail, i));
            }
        }
        let Some((avail, idx)) = branch else {
            return Ok(Some(self.chosen.clone()));
        };
        if avail == 0 || self.chosen.len() >= target {
            return Ok(None);
        }
        if self.chosen.len() + self.packing_bound() > target {
            return Ok(None);
        }
        let candidates: Vec<usize> = self.sets[idx]
            .iter()
            .filter(|&x| !self.excluded.contains(x))
            .collect();
        let mut found = None;
        let mut newly_excluded = Vec::new();
        for x in candidates {
            self.picked.insert(x);
            self.chosen.push(x);
            let r = self.dfs(target);
            self.chosen.pop();
            self.picked.remove(x);
            match r {
                Ok(Some(sol)) => {
                    found = Some(sol);
                    break;
                }
                Ok(None) => {}
                Err(e) => {
                    for &y in &newly_excluded {
                        self.excluded.remove(y);
                    }
                    return Err(e);
                }
            }
            // later branches need not consider x
            self.excluded.insert(x);
            newly_excluded.push(x);
        }
        for y in newly_excluded {
            self.excluded.remove(y);
        }
        Ok(found)
    }
}
