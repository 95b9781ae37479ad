//! Dense symbol matrices and their on-disk formats.
//!
//! Symbols are 16-bit integers. The text format maps one character per cell
//! (the character's code point is the symbol); the raw format stores one byte
//! per cell behind a little-endian `rows`/`cols` header.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{out_of_range, Error, Result};

pub type Symbol = u16;

/// On-disk matrix encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Text,
    RawBytes,
}

/// A row-major grid of symbols.
///
/// The alphabet is always the sorted set of symbols that actually occur.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    alphabet: Vec<Symbol>,
    cells: Vec<Symbol>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, cells: Vec<Symbol>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Format(format!("empty matrix {rows}x{cols}")));
        }
        if cells.len() != rows * cols {
            return Err(Error::Format(format!(
                "expected {} cells for a {rows}x{cols} matrix, got {}",
                rows * cols,
                cells.len()
            )));
        }
        let mut alphabet = cells.clone();
        alphabet.sort_unstable();
        alphabet.dedup();
        Ok(Matrix {
            rows,
            cols,
            alphabet,
            cells,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Symbol) -> Result<Self> {
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                cells.push(f(i, j));
            }
        }
        Matrix::new(rows, cols, cells)
    }

    /// Builds a matrix from equal-length text rows, one character per cell.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Format("no rows".into()));
        };
        let cols = first.as_ref().chars().count();
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let before = cells.len();
            for ch in row.as_ref().chars() {
                cells.push(char_to_symbol(ch)?);
            }
            if cells.len() - before != cols {
                return Err(Error::Format(format!(
                    "ragged rows: row {} has {} cells, expected {cols}",
                    i + 1,
                    cells.len() - before
                )));
            }
        }
        Matrix::new(rows.len(), cols, cells)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix, or an error for rectangular input.
    pub fn side(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn sigma(&self) -> usize {
        self.alphabet.len()
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn max_symbol(&self) -> Symbol {
        *self.alphabet.last().expect("non-empty alphabet")
    }

    /// Cell at 0-based `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Symbol {
        debug_assert!(i < self.rows && j < self.cols);
        self.cells[i * self.cols + j]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<Symbol> {
        if i >= self.rows {
            return Err(out_of_range("row", i, format!("0..{}", self.rows)));
        }
        if j >= self.cols {
            return Err(out_of_range("column", j, format!("0..{}", self.cols)));
        }
        Ok(self.get(i, j))
    }

    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut cells = Vec::with_capacity(self.cells.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                cells.push(self.get(i, j));
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            alphabet: self.alphabet.clone(),
            cells,
        }
    }

    /// Copy of the `h`x`w` submatrix with top-left corner `(i, j)`.
    pub fn submatrix(&self, i: usize, j: usize, h: usize, w: usize) -> Result<Matrix> {
        if h == 0 || w == 0 || i + h > self.rows || j + w > self.cols {
            return Err(Error::InvalidParameter(format!(
                "submatrix {h}x{w} at ({i},{j}) does not fit in {}x{}",
                self.rows, self.cols
            )));
        }
        Matrix::from_fn(h, w, |r, c| self.get(i + r, j + c))
    }

    /// Copy with one cell replaced; the alphabet is recomputed.
    pub fn with_cell(&self, i: usize, j: usize, symbol: Symbol) -> Result<Matrix> {
        self.try_get(i, j)?;
        let mut cells = self.cells.clone();
        cells[i * self.cols + j] = symbol;
        Matrix::new(self.rows, self.cols, cells)
    }

    /// Applies `f` to every symbol.
    pub fn relabel(&self, f: impl Fn(Symbol) -> Symbol) -> Result<Matrix> {
        Matrix::new(self.rows, self.cols, self.cells.iter().map(|&s| f(s)).collect())
    }

    /// True if the `k`x`k` squares at `a` and `b` hold the same symbols.
    pub fn squares_equal(&self, a: (usize, usize), b: (usize, usize), k: usize) -> bool {
        self.rects_equal(a, b, k, k)
    }

    pub fn rects_equal(&self, a: (usize, usize), b: (usize, usize), h: usize, w: usize) -> bool {
        (0..h).all(|r| {
            let ra = &self.cells[(a.0 + r) * self.cols + a.1..][..w];
            let rb = &self.cells[(b.0 + r) * self.cols + b.1..][..w];
            ra == rb
        })
    }

    pub fn parse_text(text: &str) -> Result<Matrix> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .filter(|h| !h.trim().is_empty())
            .ok_or_else(|| Error::Format("empty input".into()))?;
        let mut dims = header.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad header token {t:?}")))
        });
        let rows = dims.next().ok_or_else(|| Error::Format("missing rows".into()))??;
        let cols = dims.next().ok_or_else(|| Error::Format("missing cols".into()))??;
        if dims.next().is_some() {
            return Err(Error::Format("header must be exactly \"rows cols\"".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Format(format!("empty matrix {rows}x{cols}")));
        }
        let body: Vec<&str> = lines.map(|l| l.trim_end_matches('\r')).collect();
        let body: Vec<&str> = match body.iter().rposition(|l| !l.is_empty()) {
            Some(last) => body[..=last].to_vec(),
            None => Vec::new(),
        };
        if body.len() != rows {
            return Err(Error::Format(format!(
                "header declares {rows} rows, found {}",
                body.len()
            )));
        }
        let m = Matrix::from_rows(&body)?;
        if m.cols != cols {
            return Err(Error::Format(format!(
                "ragged rows: header declares {cols} columns, rows have {}",
                m.cols
            )));
        }
        Ok(m)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for &s in self.row(i) {
                out.push(symbol_to_char(s)?);
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse_raw(bytes: &[u8]) -> Result<Matrix> {
        if bytes.is_empty() {
            return Err(Error::Format("empty input".into()));
        }
        if bytes.len() < 16 {
            return Err(Error::Format("raw header needs 16 bytes".into()));
        }
        let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = &bytes[16..];
        match rows.checked_mul(cols) {
            Some(len) if len == body.len() => {}
            _ => {
                return Err(Error::Format(format!(
                    "raw body has {} bytes, header declares {rows}x{cols}",
                    body.len()
                )))
            }
        }
        Matrix::new(rows, cols, body.iter().map(|&b| b as Symbol).collect())
    }

    pub fn to_raw(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(16 + self.cells.len());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for &s in &self.cells {
            let b = u8::try_from(s).map_err(|_| {
                Error::UnsupportedAlphabet(format!("symbol {s} does not fit the raw byte format"))
            })?;
            out.push(b);
        }
        Ok(out)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} {{", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|s| s.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "}}")
    }
}

pub fn char_to_symbol(ch: char) -> Result<Symbol> {
    Symbol::try_from(ch as u32).map_err(|_| {
        Error::UnsupportedAlphabet(format!("character {ch:?} is beyond the 16-bit symbol range"))
    })
}

pub fn symbol_to_char(s: Symbol) -> Result<char> {
    match char::from_u32(s as u32) {
        Some(ch) if !ch.is_whitespace() && !ch.is_control() => Ok(ch),
        _ => Err(Error::Format(format!(
            "symbol {s} has no printable text representation"
        ))),
    }
}

/// Symbols of a string, one per character.
pub fn str_symbols(s: &str) -> Result<Vec<Symbol>> {
    s.chars().map(char_to_symbol).collect()
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<Matrix> {
    let bytes = fs::read(path)?;
    match format {
        MatrixFormat::Text => {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Format("text matrix is not valid UTF-8".into()))?;
            Matrix::parse_text(&text)
        }
        MatrixFormat::RawBytes => Matrix::parse_raw(&bytes),
    }
}

pub fn save_matrix(m: &Matrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Text => m.to_text()?.into_bytes(),
        MatrixFormat::RawBytes => m.to_raw()?,
    };
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(c: char) -> Symbol {
        c as Symbol
    }

    #[test]
    fn parse_small_text() {
        let m = Matrix::parse_text("2 2\nab\nba").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.alphabet(), &[sym('a'), sym('b')]);
        assert_eq!(m.get(1, 0), sym('b'));

        let one = Matrix::parse_text("1 1\na\n").unwrap();
        assert_eq!(one.alphabet(), &[sym('a')]);
    }

    #[test]
    fn ragged_and_empty_inputs_are_rejected() {
        assert!(matches!(Matrix::parse_text("2 3\nab\ncd"), Err(Error::Format(_))));
        assert!(matches!(Matrix::parse_text(""), Err(Error::Format(_))));
        assert!(matches!(Matrix::parse_text("2 2\nab\nc"), Err(Error::Format(_))));
        assert!(matches!(Matrix::parse_text("3 2\nab\ncd"), Err(Error::Format(_))));
        assert!(matches!(Matrix::parse_raw(&[]), Err(Error::Format(_))));
    }

    #[test]
    fn wide_characters_are_unsupported() {
        assert!(matches!(
            Matrix::parse_text("1 1\n\u{1F600}"),
            Err(Error::UnsupportedAlphabet(_))
        ));
    }

    #[test]
    fn transpose_small() {
        let m = Matrix::from_rows(&["ab", "cd"]).unwrap();
        assert_eq!(m.transpose(), Matrix::from_rows(&["ac", "bd"]).unwrap());
        let one = Matrix::from_rows(&["a"]).unwrap();
        assert_eq!(one.transpose(), one);
        let wide = Matrix::from_rows(&["abc"]).unwrap();
        assert_eq!((wide.transpose().rows(), wide.transpose().cols()), (3, 1));
    }

    #[test]
    fn raw_round_trip() {
        let m = Matrix::new(2, 3, vec![0, 1, 2, 2, 1, 0]).unwrap();
        assert_eq!(Matrix::parse_raw(&m.to_raw().unwrap()).unwrap(), m);
        let big = Matrix::new(1, 1, vec![300]).unwrap();
        assert!(big.to_raw().is_err());
    }

    #[test]
    fn unprintable_symbols_refuse_text_output() {
        let m = Matrix::new(1, 2, vec![0, 1]).unwrap();
        assert!(m.to_text().is_err());
        let ok = Matrix::from_rows(&["#0", "1#"]).unwrap();
        assert_eq!(Matrix::parse_text(&ok.to_text().unwrap()).unwrap(), ok);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = Matrix::from_rows(&["abc", "cab", "bca"]).unwrap();
        let t = dir.path().join("m.txt");
        save_matrix(&m, &t, MatrixFormat::Text).unwrap();
        assert_eq!(load_matrix(&t, MatrixFormat::Text).unwrap(), m);
        let r = dir.path().join("m.bin");
        save_matrix(&m, &r, MatrixFormat::RawBytes).unwrap();
        assert_eq!(load_matrix(&r, MatrixFormat::RawBytes).unwrap(), m);
    }
}
