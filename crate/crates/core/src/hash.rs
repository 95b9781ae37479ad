//! Two-dimensional Karp-Rabin fingerprints.
//!
//! Two independent parameterizations, each a pair of bases (one per axis)
//! over the Mersenne prime 2^61 - 1. After an O(rows * cols) precomputation
//! the fingerprint of any `h`x`w` submatrix is available in O(1).

use crate::matrix::Matrix;

const MOD: u64 = (1 << 61) - 1;

/// Seed used when neither the caller nor the environment provides one.
pub const DEFAULT_SEED: u64 = 0x2d2d_6274_6d61_7472;

/// Environment variable that overrides [`DEFAULT_SEED`] in the CLI.
pub const SEED_ENV: &str = "MATRIXREPET_SEED";

#[inline]
fn mul(a: u64, b: u64) -> u64 {
    let t = a as u128 * b as u128;
    let t = ((t >> 61) as u64) + ((t as u64) & MOD);
    if t >= MOD {
        t - MOD
    } else {
        t
    }
}

#[inline]
fn add(a: u64, b: u64) -> u64 {
    let t = a + b;
    if t >= MOD {
        t - MOD
    } else {
        t
    }
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MOD - b
    }
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fingerprint of a rectangle under both parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint(pub u64, pub u64);

/// Bases and modulus of one hash function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashParams {
    pub row_base: u64,
    pub col_base: u64,
    pub modulus: u64,
}

impl HashParams {
    pub fn pair_from_seed(seed: u64) -> [HashParams; 2] {
        let mut state = seed;
        let mut base = || (splitmix64(&mut state) % (MOD - (1 << 20))) + (1 << 20);
        [
            HashParams {
                row_base: base(),
                col_base: base(),
                modulus: MOD,
            },
            HashParams {
                row_base: base(),
                col_base: base(),
                modulus: MOD,
            },
        ]
    }
}

struct Table {
    params: HashParams,
    // (rows + 1) x (cols + 1) prefix fingerprints
    prefix: Vec<u64>,
    row_pow: Vec<u64>,
    col_pow: Vec<u64>,
}

impl Table {
    fn build(m: &Matrix, params: HashParams) -> Table {
        let (rows, cols) = (m.rows(), m.cols());
        let stride = cols + 1;
        let mut prefix = vec![0u64; (rows + 1) * stride];
        let (a, b) = (params.row_base, params.col_base);
        let ab = mul(a, b);
        for i in 0..rows {
            for j in 0..cols {
                let v = m.get(i, j) as u64 + 1;
                let up = mul(prefix[i * stride + j + 1], a);
                let left = mul(prefix[(i + 1) * stride + j], b);
                let diag = mul(prefix[i * stride + j], ab);
                prefix[(i + 1) * stride + j + 1] = add(sub(add(up, left), diag), v);
            }
        }
        let pows = |base: u64, len: usize| {
            let mut p = Vec::with_capacity(len + 1);
            p.push(1u64);
            for t in 0..len {
                p.push(mul(p[t], base));
            }
            p
        };
        Table {
            params,
            prefix,
            row_pow: pows(a, rows),
            col_pow: pows(b, cols),
        }
    }

    #[inline]
    fn rect(&self, stride: usize, i: usize, j: usize, h: usize, w: usize) -> u64 {
        let p = &self.prefix;
        let br = p[(i + h) * stride + j + w];
        let tr = mul(p[i * stride + j + w], self.row_pow[h]);
        let bl = mul(p[(i + h) * stride + j], self.col_pow[w]);
        let tl = mul(mul(p[i * stride + j], self.row_pow[h]), self.col_pow[w]);
        add(sub(sub(br, tr), bl), tl)
    }
}

/// Precomputed fingerprint tables over a borrowed matrix.
pub struct HashIndex<'a> {
    matrix: &'a Matrix,
    tables: [Table; 2],
    seed: u64,
    paranoid: bool,
}

impl<'a> HashIndex<'a> {
    pub fn new(matrix: &'a Matrix) -> Self {
        Self::with_seed(matrix, DEFAULT_SEED)
    }

    pub fn with_seed(matrix: &'a Matrix, seed: u64) -> Self {
        let [p0, p1] = HashParams::pair_from_seed(seed);
        HashIndex {
            matrix,
            tables: [Table::build(matrix, p0), Table::build(matrix, p1)],
            seed,
            paranoid: false,
        }
    }

    /// Enables cell-by-cell confirmation of fingerprint equalities in the
    /// algorithms that support it.
    pub fn paranoid(mut self, on: bool) -> Self {
        self.paranoid = on;
        self
    }

    pub fn is_paranoid(&self) -> bool {
        self.paranoid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> [HashParams; 2] {
        [self.tables[0].params, self.tables[1].params]
    }

    pub fn matrix(&self) -> &'a Matrix {
        self.matrix
    }

    /// Fingerprint of `M[i..i+h][j..j+w]` (0-based, half-open).
    #[inline]
    pub fn rect(&self, i: usize, j: usize, h: usize, w: usize) -> Fingerprint {
        debug_assert!(i + h <= self.matrix.rows() && j + w <= self.matrix.cols());
        let stride = self.matrix.cols() + 1;
        Fingerprint(
            self.tables[0].rect(stride, i, j, h, w),
            self.tables[1].rect(stride, i, j, h, w),
        )
    }

    #[inline]
    pub fn square(&self, i: usize, j: usize, k: usize) -> Fingerprint {
        self.rect(i, j, k, k)
    }
}
