//! Compressed sparse row storage.
//!
//! A [`CsrMatrix`] is always canonical: column indices are strictly increasing
//! within each row and no explicit zeros are stored. Blocking code only ever
//! looks at the pattern (`row_ptr`/`col_idx`), never at `values`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    ///
    /// Explicit zeros in `values` are dropped.
    pub fn try_new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidCsr("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != col_idx.len() {
            return Err(Error::InvalidCsr(format!(
                "row_ptr ends at {} but there are {} column indices and {} values",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::InvalidCsr(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if let Some(&c) = cols.iter().find(|&&c| c >= n_cols) {
                return Err(Error::IndexOutOfRange {
                    row: i,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
            if let Some(w) = cols.windows(2).find(|w| w[0] >= w[1]) {
                return Err(if w[0] == w[1] {
                    Error::DuplicateEntry { row: i, col: w[0] }
                } else {
                    Error::InvalidCsr(format!("columns not sorted in row {i}"))
                });
            }
        }

        let mut m = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        };
        if m.values.contains(&0.0) {
            m = m.drop_zeros();
        }
        Ok(m)
    }

    /// Builds a canonical matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate coordinates are rejected rather than summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::DuplicateEntry {
                row: w[0].0,
                col: w[0].1,
            });
        }
        Ok(Self::from_sorted_entries(n_rows, n_cols, entries))
    }

    /// Entries must be sorted by (row, col), in range, and free of duplicates.
    pub(crate) fn from_sorted_entries(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (r, c, v) in entries {
            if v == 0.0 {
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Pattern-only constructor: every listed column gets the value 1.0.
    ///
    /// Each row's columns are sorted and deduplicated.
    pub fn from_row_patterns(n_cols: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let mut cols = row.clone();
            cols.sort_unstable();
            cols.dedup();
            if let Some(&c) = cols.last() {
                if c >= n_cols {
                    return Err(Error::IndexOutOfRange {
                        row: i,
                        col: c,
                        n_rows: rows.len(),
                        n_cols,
                    });
                }
            }
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![1.0; col_idx.len()];
        Ok(CsrMatrix {
            n_rows: rows.len(),
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    fn drop_zeros(self) -> Self {
        let n_rows = self.n_rows;
        let n_cols = self.n_cols;
        let entries: Vec<_> = self.triplets().collect();
        Self::from_sorted_entries(n_rows, n_cols, entries)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Fraction of nonzero cells, `nnz / (n_rows * n_cols)`; zero for degenerate shapes.
    pub fn density(&self) -> f64 {
        let cells = self.n_rows as f64 * self.n_cols as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sorted column indices of row `i`.
    #[inline]
    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.n_rows).map(|i| self.row_nnz(i)).max().unwrap_or(0)
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            self.row_cols(i)
                .iter()
                .zip(self.row_values(i))
                .map(move |(&c, &v)| (i, c, v))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let cols = self.row_cols(row);
        match cols.binary_search(&col) {
            Ok(k) => self.row_values(row)[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.triplets() {
            d.set(r, c, v);
        }
        d
    }

    /// Returns the matrix whose row `i` is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<CsrMatrix> {
        check_permutation(perm, self.n_rows)?;
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for &src in perm {
            col_idx.extend_from_slice(self.row_cols(src));
            values.extend_from_slice(self.row_values(src));
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }
}

/// Checks that `perm` is a bijection on `0..len`.
pub fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::InvalidPermutation {
            len,
            reason: format!("has {} entries", perm.len()),
        });
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len {
            return Err(Error::InvalidPermutation {
                len,
                reason: format!("entry {p} out of range"),
            });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation {
                len,
                reason: format!("entry {p} repeated"),
            });
        }
    }
    Ok(())
}

/// Inverse of a permutation: `inv[perm[i]] = i`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_triplets() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a, CsrMatrix::identity(2));
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn explicit_zero_dropped() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 0.0)]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.row_ptr(), &[0, 0, 0]);
    }

    #[test]
    fn out_of_range_rejected() {
        let err = CsrMatrix::from_triplets(2, 2, &[(0, 3, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { col: 3, .. }));
    }

    #[test]
    fn duplicate_rejected() {
        let err = CsrMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (1, 0, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry { row: 1, col: 0 }));
    }

    #[test]
    fn unsorted_triplets_are_canonicalised() {
        let a = CsrMatrix::from_triplets(2, 3, &[(1, 2, 4.0), (0, 1, 2.0), (1, 0, 3.0)]).unwrap();
        assert_eq!(a.row_ptr(), &[0, 1, 3]);
        assert_eq!(a.col_idx(), &[1, 0, 2]);
        assert_eq!(a.values(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn try_new_validates() {
        assert!(CsrMatrix::try_new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::try_new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(CsrMatrix::try_new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        let a = CsrMatrix::try_new(1, 2, vec![0, 2], vec![0, 1], vec![0.0, 5.0]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), 5.0);
    }

    #[test]
    fn permute_identity_is_noop() {
        let a = CsrMatrix::from_row_patterns(3, &[vec![0, 2], vec![], vec![1]]).unwrap();
        assert_eq!(a.permute_rows(&[0, 1, 2]).unwrap(), a);
    }

    #[test]
    fn permute_swap() {
        let a = CsrMatrix::from_row_patterns(2, &[vec![0], vec![1]]).unwrap();
        let b = a.permute_rows(&[1, 0]).unwrap();
        assert_eq!(b.row_cols(0), &[1]);
        assert_eq!(b.row_cols(1), &[0]);
        assert_eq!(b.permute_rows(&[1, 0]).unwrap(), a);
    }

    #[test]
    fn permute_rejects_non_bijection() {
        let a = CsrMatrix::identity(3);
        assert!(a.permute_rows(&[0, 0, 1]).is_err());
        assert!(a.permute_rows(&[0, 1]).is_err());
        assert!(a.permute_rows(&[0, 1, 3]).is_err());
    }

    #[test]
    fn density_of_empty_shape() {
        assert_eq!(CsrMatrix::zeros(0, 0).density(), 0.0);
        assert_eq!(CsrMatrix::identity(4).density(), 0.25);
    }
}
