//! Quotient rows: a row projected onto the column partition, one bit per
//! segment that holds at least one of its nonzeros.

use std::collections::HashMap;

use crate::matrix::{ColumnPartition, CsrMatrix};

/// A quotient pattern together with every original row that projects onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientRow {
    /// Sorted, deduplicated segment indices.
    pub segments: Vec<usize>,
    /// Original row indices, ascending.
    pub source_rows: Vec<usize>,
}

/// Segments touched by a row with the given sorted column indices.
pub fn quotient_row(cols: &[usize], partition: &ColumnPartition) -> Vec<usize> {
    let mut segments: Vec<usize> = Vec::new();
    for &c in cols {
        let s = partition.segment_of(c);
        // Columns are sorted, so segments arrive non-decreasing.
        if segments.last() != Some(&s) {
            segments.push(s);
        }
    }
    segments
}

/// Sum of the (0-based) segment indices present in the pattern.
pub fn quotient_hash(segments: &[usize]) -> u64 {
    segments.iter().map(|&s| s as u64).sum()
}

/// One quotient row per matrix row, without merging identical patterns.
pub fn quotient_rows(a: &CsrMatrix, partition: &ColumnPartition) -> Vec<QuotientRow> {
    (0..a.n_rows())
        .map(|i| QuotientRow {
            segments: quotient_row(a.row_cols(i), partition),
            source_rows: vec![i],
        })
        .collect()
}

/// Hash-based compression: rows with identical quotient patterns collapse
/// into a single [`QuotientRow`].
///
/// Rows are bucketed by [`quotient_hash`] and collisions are resolved by
/// comparing the full patterns. Output is ordered by smallest source row.
pub fn compress_rows(a: &CsrMatrix, partition: &ColumnPartition) -> Vec<QuotientRow> {
    let mut out: Vec<QuotientRow> = Vec::new();
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    for i in 0..a.n_rows() {
        let segments = quotient_row(a.row_cols(i), partition);
        let bucket = buckets.entry(quotient_hash(&segments)).or_default();
        match bucket.iter().find(|&&k| out[k].segments == segments) {
            Some(&k) => out[k].source_rows.push(i),
            None => {
                bucket.push(out.len());
                out.push(QuotientRow {
                    segments,
                    source_rows: vec![i],
                });
            }
        }
    }
    out
}
