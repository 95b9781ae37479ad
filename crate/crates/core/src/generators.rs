//! Deterministic matrix families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::splitmix64;
use crate::matrix::{Matrix, Symbol};

pub const ZERO: Symbol = b'0' as Symbol;
pub const ONE: Symbol = b'1' as Symbol;
pub const HASH: Symbol = b'#' as Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Rs { s: String },
    Nonmono { n: usize },
    Separation { n: usize },
    Permuted { n: usize, perm: Vec<usize> },
    Random { n: usize, sigma: usize, seed: u64 },
}

impl FamilySpec {
    /// The matrix this spec describes. For `nonmono` that is `R^{w b}`.
    pub fn build(&self) -> Result<Matrix> {
        match self {
            FamilySpec::Rs { s } => {
                crate::attractor::reduce_string_to_matrix(&crate::matrix::str_symbols(s)?)
            }
            FamilySpec::Nonmono { n } => {
                let (_, wb) = gen_nonmono(*n)?;
                crate::attractor::reduce_string_to_matrix(&crate::matrix::str_symbols(&wb)?)
            }
            FamilySpec::Separation { n } => gen_separation(*n),
            FamilySpec::Permuted { n, perm } => gen_permuted(*n, perm),
            FamilySpec::Random { n, sigma, seed } => gen_random(*n, *sigma, *seed),
        }
    }
}

/// `w = a b b b a^n a b` and `w b`: `gamma(w) = 3` while `gamma(w b) = 2`.
pub fn gen_nonmono(n: usize) -> Result<(String, String)> {
    if n < 1 {
        return Err(Error::InvalidParameter("nonmono needs n >= 1".into()));
    }
    let w = format!("abbb{}ab", "a".repeat(n));
    let wb = format!("{w}b");
    Ok((w, wb))
}

/// `sqrt(n)` when `n` is a perfect square with an even root.
pub fn separation_root(n: usize) -> Result<usize> {
    let r = (n as f64).sqrt().round() as usize;
    if n == 0 || r * r != n || r % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "separation family needs n = r^2 with r even, got {n}"
        )));
    }
    Ok(r)
}

/// Block `S_i = 1^i 0^(2r - i)` of the separation family's first row.
pub fn separation_block(r: usize, i: usize) -> Vec<Symbol> {
    (0..2 * r).map(|c| if c < i { ONE } else { ZERO }).collect()
}

/// `n`x`n` matrix over `{0, 1, #}`: the first row is `S_1 S_2 ... S_{r/2}`
/// with `r = sqrt(n)`, every other row is `#^n`.
pub fn gen_separation(n: usize) -> Result<Matrix> {
    let r = separation_root(n)?;
    let identity: Vec<usize> = (1..=r / 2).collect();
    gen_permuted(n, &identity)
}

/// The separation matrix with its first-row blocks reordered: block slot `p`
/// holds `S_{perm[p]}` (1-based permutation of `1..=sqrt(n)/2`).
pub fn gen_permuted(n: usize, perm: &[usize]) -> Result<Matrix> {
    let r = separation_root(n)?;
    let blocks = r / 2;
    let mut seen = vec![false; blocks + 1];
    if perm.len() != blocks {
        return Err(Error::InvalidParameter(format!(
            "permutation must have {blocks} entries, got {}",
            perm.len()
        )));
    }
    for &p in perm {
        if p == 0 || p > blocks || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of 1..={blocks}")));
        }
    }
    let first: Vec<Symbol> = perm.iter().flat_map(|&i| separation_block(r, i)).collect();
    Matrix::from_fn(n, n, |i, j| if i == 0 { first[j] } else { HASH })
}

/// Uniform matrix over `0..sigma`, a pure function of `(n, sigma, seed)`.
///
/// Draws are redone with a fresh key until every symbol occurs.
pub fn gen_random(n: usize, sigma: usize, seed: u64) -> Result<Matrix> {
    if sigma == 0 || sigma > Symbol::MAX as usize + 1 {
        return Err(Error::InvalidParameter(format!("sigma must be in 1..=65536, got {sigma}")));
    }
    if n == 0 || n * n < sigma {
        return Err(Error::InvalidParameter(format!(
            "a {n}x{n} matrix cannot hold {sigma} distinct symbols"
        )));
    }
    for attempt in 0u64.. {
        let key = seed ^ attempt.wrapping_mul(0xd6e8_feb8_6659_fd93);
        let cells: Vec<Symbol> = (0..n * n)
            .map(|c| {
                let mut state = key.wrapping_add((c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let v = splitmix64(&mut state);
                ((v as u128 * sigma as u128) >> 64) as Symbol
            })
            .collect();
        let m = Matrix::new(n, n, cells)?;
        if m.sigma() == sigma {
            return Ok(m);
        }
    }
    unreachable!()
}
