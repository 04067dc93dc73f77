//! Dense row-major matrices of alphabet symbols.
//!
//! Symbols are stored as zero-based indices: symbol `k` of the alphabet
//! `{1, ..., |X|}` is held as the byte `k - 1`. File exports add the offset
//! back.

use crate::error::{Error, Result};

/// Zero-based alphabet symbol.
pub type Symbol = u8;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl SymbolMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: Symbol) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[Symbol]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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
    pub fn get(&self, i: usize, j: usize) -> Symbol {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Symbol) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        // chunks_exact panics on 0; an m x 0 matrix yields m empty rows.
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<Symbol> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.data
    }

    /// Largest stored symbol index, if any.
    pub fn max_symbol(&self) -> Option<Symbol> {
        self.data.iter().copied().max()
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * keep.len());
        for r in self.row_iter() {
            data.extend(keep.iter().map(|&j| r[j]));
        }
        Self {
            rows: self.rows,
            cols: keep.len(),
            data,
        }
    }

    /// Returns the matrix whose row `perm[i]` is row `i` of `self`.
    pub fn scatter_rows(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rows)?;
        let mut data = vec![0; self.data.len()];
        for (i, r) in self.row_iter().enumerate() {
            let dst = perm[i] * self.cols;
            data[dst..dst + self.cols].copy_from_slice(r);
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {}",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }
}

/// Checks that `perm` is a bijection on `0..len`.
pub fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} applied to {len} rows",
            perm.len()
        )));
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
    }
    Ok(())
}
