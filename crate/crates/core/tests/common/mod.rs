//! Brute-force oracles shared by the integration tests. Nothing here uses
//! fingerprints or the library's search code.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use matrixrepet::{Matrix, Ratio, Symbol};

pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed ^ 0x5851_f42d_4c95_7f2d)
    }

    pub fn next(&mut self) -> u64 {
        // xorshift64*
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    pub fn below(&mut self, bound: usize) -> usize {
        (self.next() % bound as u64) as usize
    }

    pub fn matrix(&mut self, n: usize, sigma: usize) -> Matrix {
        Matrix::from_fn(n, n, |_, _| b'a' as Symbol + self.below(sigma) as Symbol).unwrap()
    }

    pub fn string(&mut self, len: usize, sigma: usize) -> String {
        (0..len).map(|_| (b'a' + self.below(sigma) as u8) as char).collect()
    }
}

fn square(m: &Matrix, i: usize, j: usize, k: usize) -> Vec<Symbol> {
    (i..i + k).flat_map(|r| m.row(r)[j..j + k].to_vec()).collect()
}

/// `d[k - 1]` = distinct `k`x`k` submatrices, by storing every one.
pub fn brute_counts(m: &Matrix) -> Vec<u64> {
    let n = m.rows();
    (1..=n)
        .map(|k| {
            let mut seen = HashSet::new();
            for i in 0..=n - k {
                for j in 0..=n - k {
                    seen.insert(square(m, i, j, k));
                }
            }
            seen.len() as u64
        })
        .collect()
}

pub fn brute_delta(m: &Matrix) -> Ratio {
    brute_counts(m)
        .iter()
        .enumerate()
        .map(|(k, &d)| Ratio::new(d, ((k + 1) * (k + 1)) as u64))
        .max()
        .unwrap()
}

/// Whether 1-based positions `g` cover every distinct square.
pub fn brute_is_attractor(m: &Matrix, g: &[(usize, usize)]) -> bool {
    let n = m.rows();
    (1..=n).all(|k| {
        let mut covered: BTreeMap<Vec<Symbol>, bool> = BTreeMap::new();
        for i in 0..=n - k {
            for j in 0..=n - k {
                let hit = g
                    .iter()
                    .any(|&(r, c)| r > i && r <= i + k && c > j && c <= j + k);
                *covered.entry(square(m, i, j, k)).or_default() |= hit;
            }
        }
        covered.values().all(|&c| c)
    })
}

pub fn brute_is_string_attractor(s: &[u8], g: &[usize]) -> bool {
    let n = s.len();
    (1..=n).all(|l| {
        let mut covered: BTreeMap<&[u8], bool> = BTreeMap::new();
        for i in 0..=n - l {
            let hit = g.iter().any(|&p| p > i && p <= i + l);
            *covered.entry(&s[i..i + l]).or_default() |= hit;
        }
        covered.values().all(|&c| c)
    })
}

/// Smallest string attractor size by trying every subset.
pub fn brute_gamma_string(s: &[u8]) -> usize {
    let n = s.len();
    (0u32..1 << n)
        .filter(|mask| {
            let g: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            brute_is_string_attractor(s, &g)
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

/// Smallest matrix attractor size by trying subsets in size order.
pub fn brute_gamma(m: &Matrix) -> usize {
    let n = m.rows();
    let cells: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    for size in 1..=cells.len() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let g: Vec<(usize, usize)> = idx.iter().map(|&x| cells[x]).collect();
            if brute_is_attractor(m, &g) {
                return size;
            }
            // next combination
            let mut p = size;
            while p > 0 && idx[p - 1] == cells.len() - size + p - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            idx[p - 1] += 1;
            for q in p..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    unreachable!()
}

pub fn str_matrix(rows: &[&str]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

pub fn rs(s: &str) -> Matrix {
    matrixrepet::attractor::reduce_string_to_matrix(&matrixrepet::matrix::str_symbols(s).unwrap()).unwrap()
}
