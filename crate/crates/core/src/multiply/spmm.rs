//! Sparse times dense products.
//!
//! Both kernels accumulate each output row in a fixed order, so results do
//! not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, DenseMatrix, VbrMatrix};

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Row-by-row CSR product: `C[i, :] += a_ij * B[j, :]`.
pub fn spmm_csr(a: &CsrMatrix, b: &DenseMatrix, threads: usize) -> Result<DenseMatrix> {
    if a.n_cols() != b.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} sparse times {}x{} dense",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    let n = b.n_cols();
    let mut c = DenseMatrix::zeros(a.n_rows(), n);
    if n == 0 {
        return Ok(c);
    }
    pool(threads)?.install(|| {
        c.data_mut()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out)| {
                for (&j, &v) in a.row_cols(i).iter().zip(a.row_values(i)) {
                    for (o, &x) in out.iter_mut().zip(b.row(j)) {
                        *o += v * x;
                    }
                }
            });
    });
    Ok(c)
}

/// Block-row product over VBR storage.
///
/// Each stored block is multiplied densely with the rows of `b` under its
/// column segment; block rows run in parallel on disjoint output rows, and
/// the result is written back in the source matrix's row order.
pub fn spmm_vbr(v: &VbrMatrix, b: &DenseMatrix, threads: usize) -> Result<DenseMatrix> {
    if v.n_cols() != b.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} VBR times {}x{} dense",
            v.n_rows(),
            v.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    let n = b.n_cols();
    let mut permuted = vec![0.0; v.n_rows() * n];
    let partition = v.col_partition();

    // Disjoint output slices, one per block row.
    let mut slices: Vec<&mut [f64]> = Vec::with_capacity(v.n_block_rows());
    let mut rest = permuted.as_mut_slice();
    for i in 0..v.n_block_rows() {
        let (head, tail) = rest.split_at_mut(v.block_row_height(i) * n);
        slices.push(head);
        rest = tail;
    }

    pool(threads)?.install(|| {
        slices
            .into_par_iter()
            .zip(v.block_rows().par_iter())
            .for_each(|(out, blocks)| {
                for block in blocks {
                    let range = partition.segment_range(block.bcol);
                    let width = range.len();
                    for (r, block_row) in block.data.chunks_exact(width).enumerate() {
                        let out_row = &mut out[r * n..(r + 1) * n];
                        for (&a, col) in block_row.iter().zip(range.clone()) {
                            for (o, &x) in out_row.iter_mut().zip(b.row(col)) {
                                *o += a * x;
                            }
                        }
                    }
                }
            });
    });

    let mut c = DenseMatrix::zeros(v.n_rows(), n);
    if n > 0 {
        let data = c.data_mut();
        for (p, &orig) in v.row_perm().iter().enumerate() {
            data[orig * n..(orig + 1) * n].copy_from_slice(&permuted[p * n..(p + 1) * n]);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ColumnPartition, RowGrouping};

    #[test]
    fn identity_csr() {
        let b = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        assert_eq!(spmm_csr(&CsrMatrix::identity(4), &b, 1).unwrap(), b);
    }

    #[test]
    fn single_entry_csr() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.0)]).unwrap();
        let b = DenseMatrix::from_fn(2, 3, |_, _| 1.0);
        let c = spmm_csr(&a, &b, 1).unwrap();
        assert_eq!(c.row(0), &[2.0, 2.0, 2.0]);
        assert_eq!(c.row(1), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_vbr() {
        let a = CsrMatrix::identity(5);
        let q = ColumnPartition::uniform(5, 2).unwrap();
        let v = VbrMatrix::from_grouping(&a, &RowGrouping::singletons(5), &q).unwrap();
        let b = DenseMatrix::from_fn(5, 2, |i, j| (i as f64) - (j as f64) * 0.5);
        assert_eq!(spmm_vbr(&v, &b, 2).unwrap(), b);
    }

    #[test]
    fn hand_example_row_sums() {
        let a =
            CsrMatrix::from_row_patterns(6, &[vec![0, 1], vec![3], vec![2], vec![4, 5]]).unwrap();
        let q = ColumnPartition::uniform(6, 3).unwrap();
        let g = crate::blocking::block_1sa(
            &a,
            &q,
            &crate::blocking::MergePolicy::plain(0.5).unwrap(),
            false,
        )
        .unwrap();
        let v = VbrMatrix::from_grouping(&a, &g, &q).unwrap();
        let c = spmm_vbr(&v, &DenseMatrix::from_fn(6, 2, |_, _| 1.0), 1).unwrap();
        for i in 0..4 {
            assert_eq!(c.row(i), &[a.row_nnz(i) as f64; 2]);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        let b = DenseMatrix::zeros(4, 2);
        assert!(spmm_csr(&a, &b, 1).is_err());
        let q = ColumnPartition::uniform(3, 1).unwrap();
        let v = VbrMatrix::from_grouping(&a, &RowGrouping::singletons(3), &q).unwrap();
        assert!(spmm_vbr(&v, &b, 1).is_err());
    }

    #[test]
    fn zero_width_dense() {
        let a = CsrMatrix::identity(3);
        let b = DenseMatrix::zeros(3, 0);
        assert_eq!(spmm_csr(&a, &b, 1).unwrap().n_cols(), 0);
        let q = ColumnPartition::uniform(3, 2).unwrap();
        let v = VbrMatrix::from_grouping(&a, &RowGrouping::singletons(3), &q).unwrap();
        assert_eq!(spmm_vbr(&v, &b, 1).unwrap().n_rows(), 3);
    }
}
