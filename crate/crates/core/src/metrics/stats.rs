use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ColumnPartition, CsrMatrix, RowGrouping};

/// Quality of one blocking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingStats {
    /// Nonzeros divided by the total area of stored blocks.
    pub rho_prime: f64,
    /// Mean height over stored (nonzero) blocks.
    pub delta_h_prime: f64,
    /// Mean height over groups that store at least one block.
    pub delta_h_prime_groups: f64,
    pub n_groups: usize,
    pub n_stored_blocks: usize,
    pub stored_area: usize,
    pub nnz: usize,
    pub fill_in: usize,
    /// Threshold of the run that produced the grouping, when known.
    pub tau: Option<f64>,
    /// Result of the per-group density check; only set for bounded runs.
    pub density_bound_ok: Option<bool>,
}

/// Counts the blocks implied by `grouping` and `partition` without
/// materialising their payloads.
pub fn blocking_stats(
    a: &CsrMatrix,
    grouping: &RowGrouping,
    partition: &ColumnPartition,
) -> Result<BlockingStats> {
    if grouping.n_rows() != a.n_rows() || partition.n_cols() != a.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "grouping over {} rows / partition over {} columns for a {}x{} matrix",
            grouping.n_rows(),
            partition.n_cols(),
            a.n_rows(),
            a.n_cols()
        )));
    }
    if a.nnz() == 0 {
        return Err(Error::EmptyMatrix);
    }

    let mut stamp = vec![usize::MAX; partition.n_segments()];
    let (mut n_blocks, mut area, mut height_sum) = (0usize, 0usize, 0usize);
    let (mut active_groups, mut active_rows) = (0usize, 0usize);
    for (g, group) in grouping.groups().iter().enumerate() {
        let h = group.members.len();
        let mut blocks = 0;
        for &r in &group.members {
            for &c in a.row_cols(r) {
                let s = partition.segment_of(c);
                if stamp[s] != g {
                    stamp[s] = g;
                    blocks += 1;
                    area += h * partition.segment_width(s);
                }
            }
        }
        if blocks > 0 {
            active_groups += 1;
            active_rows += h;
        }
        n_blocks += blocks;
        height_sum += blocks * h;
    }

    Ok(BlockingStats {
        rho_prime: a.nnz() as f64 / area as f64,
        delta_h_prime: height_sum as f64 / n_blocks as f64,
        delta_h_prime_groups: active_rows as f64 / active_groups as f64,
        n_groups: grouping.n_groups(),
        n_stored_blocks: n_blocks,
        stored_area: area,
        nnz: a.nnz(),
        fill_in: area - a.nnz(),
        tau: None,
        density_bound_ok: None,
    })
}
