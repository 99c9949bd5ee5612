//! Variable block row storage.
//!
//! Rows are permuted so that each group is contiguous; the row partition then
//! has one block row per group, and the column partition is fixed. Only
//! blocks containing at least one nonzero are stored, each as a dense
//! row-major `height x segment_width` array.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_permutation, ColumnPartition, CsrMatrix, DenseMatrix, RowGrouping};

#[derive(Debug, Clone, PartialEq)]
pub struct VbrBlock {
    pub bcol: usize,
    /// Row-major, `height * segment_width` values.
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VbrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_partition: Vec<usize>,
    col_partition: ColumnPartition,
    row_perm: Vec<usize>,
    block_rows: Vec<Vec<VbrBlock>>,
    nnz: usize,
}

impl VbrMatrix {
    /// Lays out `a` in VBR form: one block row per group of `grouping`,
    /// blocks cut by `partition`.
    pub fn from_grouping(
        a: &CsrMatrix,
        grouping: &RowGrouping,
        partition: &ColumnPartition,
    ) -> Result<Self> {
        if grouping.n_rows() != a.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "grouping covers {} rows, matrix has {}",
                grouping.n_rows(),
                a.n_rows()
            )));
        }
        if partition.n_cols() != a.n_cols() {
            return Err(Error::DimensionMismatch(format!(
                "partition covers {} columns, matrix has {}",
                partition.n_cols(),
                a.n_cols()
            )));
        }

        let n_segments = partition.n_segments();
        let mut slot_of = vec![usize::MAX; n_segments];
        let mut row_partition = Vec::with_capacity(grouping.n_groups() + 1);
        row_partition.push(0);
        let mut row_perm = Vec::with_capacity(a.n_rows());
        let mut block_rows = Vec::with_capacity(grouping.n_groups());

        for group in grouping.groups() {
            let height = group.members.len();
            let mut segments: Vec<usize> = Vec::new();
            for &r in &group.members {
                for &c in a.row_cols(r) {
                    let s = partition.segment_of(c);
                    if slot_of[s] == usize::MAX {
                        slot_of[s] = 0;
                        segments.push(s);
                    }
                }
            }
            segments.sort_unstable();
            let mut blocks: Vec<VbrBlock> = segments
                .iter()
                .enumerate()
                .map(|(slot, &s)| {
                    slot_of[s] = slot;
                    VbrBlock {
                        bcol: s,
                        data: vec![0.0; height * partition.segment_width(s)],
                    }
                })
                .collect();
            for (local, &r) in group.members.iter().enumerate() {
                for (&c, &v) in a.row_cols(r).iter().zip(a.row_values(r)) {
                    let s = partition.segment_of(c);
                    let width = partition.segment_width(s);
                    let offset = c - partition.boundaries()[s];
                    blocks[slot_of[s]].data[local * width + offset] = v;
                }
            }
            for &s in &segments {
                slot_of[s] = usize::MAX;
            }
            row_perm.extend_from_slice(&group.members);
            row_partition.push(row_perm.len());
            block_rows.push(blocks);
        }

        Ok(VbrMatrix {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
            row_partition,
            col_partition: partition.clone(),
            row_perm,
            block_rows,
            nnz: a.nnz(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of nonzeros in the source matrix.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn row_partition(&self) -> &[usize] {
        &self.row_partition
    }

    pub fn col_partition(&self) -> &ColumnPartition {
        &self.col_partition
    }

    /// `row_perm[p]` is the original index of permuted row `p`.
    pub fn row_perm(&self) -> &[usize] {
        &self.row_perm
    }

    pub fn n_block_rows(&self) -> usize {
        self.block_rows.len()
    }

    pub fn block_row(&self, i: usize) -> &[VbrBlock] {
        &self.block_rows[i]
    }

    pub fn block_rows(&self) -> &[Vec<VbrBlock>] {
        &self.block_rows
    }

    pub fn block_row_height(&self, i: usize) -> usize {
        self.row_partition[i + 1] - self.row_partition[i]
    }

    pub fn n_stored_blocks(&self) -> usize {
        self.block_rows.iter().map(Vec::len).sum()
    }

    /// Total number of stored scalars, zeros included.
    pub fn stored_area(&self) -> usize {
        self.block_rows
            .iter()
            .map(|row| row.iter().map(|b| b.data.len()).sum::<usize>())
            .sum()
    }

    /// Zeros stored inside stored blocks.
    pub fn fill_in(&self) -> usize {
        self.stored_area() - self.nnz
    }

    /// Dense matrix in the original row order.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, blocks) in self.block_rows.iter().enumerate() {
            let start = self.row_partition[i];
            let height = self.block_row_height(i);
            for block in blocks {
                let range = self.col_partition.segment_range(block.bcol);
                let width = range.len();
                for r in 0..height {
                    let orig = self.row_perm[start + r];
                    for (k, c) in range.clone().enumerate() {
                        d.set(orig, c, block.data[r * width + k]);
                    }
                }
            }
        }
        d
    }

    pub fn to_descriptor(&self) -> VbrDescriptor {
        VbrDescriptor {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_partition: self.row_partition.clone(),
            col_boundaries: self.col_partition.boundaries().to_vec(),
            row_perm: self.row_perm.clone(),
            blocks: self
                .block_rows
                .iter()
                .enumerate()
                .flat_map(|(brow, blocks)| {
                    blocks.iter().map(move |b| DescriptorBlock {
                        brow,
                        bcol: b.bcol,
                        data: b.data.clone(),
                    })
                })
                .collect(),
        }
    }

    pub fn from_descriptor(d: VbrDescriptor) -> Result<Self> {
        let col_partition = ColumnPartition::from_boundaries(d.col_boundaries)?;
        if col_partition.n_cols() != d.n_cols {
            return Err(Error::DimensionMismatch(
                "column boundaries do not end at n_cols".into(),
            ));
        }
        if d.row_partition.first() != Some(&0)
            || d.row_partition.last() != Some(&d.n_rows)
            || d.row_partition.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::InvalidParameter(
                "row_partition must run non-decreasing from 0 to n_rows".into(),
            ));
        }
        check_permutation(&d.row_perm, d.n_rows)?;
        let n_block_rows = d.row_partition.len() - 1;
        let mut block_rows: Vec<Vec<VbrBlock>> = vec![Vec::new(); n_block_rows];
        let mut nnz = 0;
        for b in d.blocks {
            if b.brow >= n_block_rows || b.bcol >= col_partition.n_segments() {
                return Err(Error::InvalidParameter(format!(
                    "block ({}, {}) out of range",
                    b.brow, b.bcol
                )));
            }
            let expected = (d.row_partition[b.brow + 1] - d.row_partition[b.brow])
                * col_partition.segment_width(b.bcol);
            if b.data.len() != expected {
                return Err(Error::DimensionMismatch(format!(
                    "block ({}, {}) has {} values, expected {expected}",
                    b.brow,
                    b.bcol,
                    b.data.len()
                )));
            }
            let row = &mut block_rows[b.brow];
            if row.last().is_some_and(|last| last.bcol >= b.bcol) {
                return Err(Error::InvalidParameter(format!(
                    "blocks in block row {} are not strictly increasing",
                    b.brow
                )));
            }
            nnz += b.data.iter().filter(|&&v| v != 0.0).count();
            row.push(VbrBlock {
                bcol: b.bcol,
                data: b.data,
            });
        }
        Ok(VbrMatrix {
            n_rows: d.n_rows,
            n_cols: d.n_cols,
            row_partition: d.row_partition,
            col_partition,
            row_perm: d.row_perm,
            block_rows,
            nnz,
        })
    }
}

/// JSON interchange form of a [`VbrMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VbrDescriptor {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_partition: Vec<usize>,
    pub col_boundaries: Vec<usize>,
    pub row_perm: Vec<usize>,
    pub blocks: Vec<DescriptorBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorBlock {
    pub brow: usize,
    pub bcol: usize,
    pub data: Vec<f64>,
}
