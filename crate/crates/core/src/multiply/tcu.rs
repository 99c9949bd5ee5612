//! Analytical cost of block-based multiplication on an `(m, ℓ)` tensor unit.
//!
//! The unit multiplies `√m x √m` tiles in `m + ℓ` time, so an `r x c` by
//! `c x N` product costs `r c N / √m + c N ℓ / m`. All asymptotic constants
//! are taken as 1. Blocks are costed at their actual height; no padding to
//! `√m` rows is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::VbrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcuModel {
    /// Tile capacity; the unit works on `√m x √m` tiles.
    pub m: f64,
    /// Latency per tile product.
    pub ell: f64,
}

impl TcuModel {
    pub fn new(m: f64, ell: f64) -> Result<Self> {
        if !(m >= 1.0 && m.is_finite()) || !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "TCU model needs m >= 1 and ell > 0, got m={m}, ell={ell}"
            )));
        }
        Ok(TcuModel { m, ell })
    }

    /// Cost of an `rows x inner` by `inner x n` dense product.
    pub fn product_cost(&self, rows: f64, inner: f64, n: f64) -> f64 {
        rows * inner * n / self.m.sqrt() + inner * n * self.ell / self.m
    }

    /// `(2/τ)(K N / √m + K N ℓ / m^{3/2})`: the upper bound for blockings whose
    /// groups all have density at least `τ/2` and at least `√m` rows.
    pub fn density_bound(&self, nnz: usize, n: usize, tau: f64) -> f64 {
        let (k, n) = (nnz as f64, n as f64);
        (2.0 / tau) * (k * n / self.m.sqrt() + k * n * self.ell / self.m.powf(1.5))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcuCost {
    pub blocked: f64,
    pub trivial_dense: f64,
}

/// Per-block-row cost summed over groups, next to the cost of treating the
/// whole matrix as dense.
pub fn tcu_cost(v: &VbrMatrix, n_dense_cols: usize, model: &TcuModel) -> TcuCost {
    let n = n_dense_cols as f64;
    let blocked = (0..v.n_block_rows())
        .map(|i| group_cost(v, i, n, model))
        .sum();
    TcuCost {
        blocked,
        trivial_dense: model.product_cost(v.n_rows() as f64, v.n_cols() as f64, n),
    }
}

fn group_cost(v: &VbrMatrix, i: usize, n: f64, model: &TcuModel) -> f64 {
    let partition = v.col_partition();
    let columns: usize = v
        .block_row(i)
        .iter()
        .map(|b| partition.segment_width(b.bcol))
        .sum();
    if columns == 0 {
        0.0
    } else {
        model.product_cost(v.block_row_height(i) as f64, columns as f64, n)
    }
}

/// Cost restricted to block rows with at least `min_rows` rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilteredTcuCost {
    pub blocked: f64,
    /// Nonzeros inside the counted block rows.
    pub nnz: usize,
    pub groups: usize,
}

pub fn tcu_cost_tall_groups(
    v: &VbrMatrix,
    n_dense_cols: usize,
    model: &TcuModel,
    min_rows: usize,
) -> FilteredTcuCost {
    let n = n_dense_cols as f64;
    let mut out = FilteredTcuCost {
        blocked: 0.0,
        nnz: 0,
        groups: 0,
    };
    for i in 0..v.n_block_rows() {
        if v.block_row_height(i) < min_rows || v.block_row(i).is_empty() {
            continue;
        }
        out.blocked += group_cost(v, i, n, model);
        out.nnz += v
            .block_row(i)
            .iter()
            .flat_map(|b| b.data.iter())
            .filter(|&&x| x != 0.0)
            .count();
        out.groups += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ColumnPartition, CsrMatrix, RowGrouping};

    fn dense_square(n: usize) -> CsrMatrix {
        CsrMatrix::from_row_patterns(n, &vec![(0..n).collect::<Vec<_>>(); n]).unwrap()
    }

    #[test]
    fn single_block_cost() {
        let a = dense_square(64);
        let q = ColumnPartition::uniform(64, 64).unwrap();
        let v = VbrMatrix::from_grouping(&a, &RowGrouping::consecutive(64, 64), &q).unwrap();
        let model = TcuModel::new(256.0, 16.0).unwrap();
        let cost = tcu_cost(&v, 4096, &model);
        assert_eq!(cost.blocked, 1_064_960.0);
        assert_eq!(cost.blocked, cost.trivial_dense);
    }

    #[test]
    fn empty_costs_nothing() {
        let a = CsrMatrix::zeros(8, 8);
        let q = ColumnPartition::uniform(8, 4).unwrap();
        let v = VbrMatrix::from_grouping(&a, &RowGrouping::singletons(8), &q).unwrap();
        assert_eq!(
            tcu_cost(&v, 128, &TcuModel::new(16.0, 4.0).unwrap()).blocked,
            0.0
        );
    }

    #[test]
    fn filter_counts_tall_groups_only() {
        let a = dense_square(8);
        let q = ColumnPartition::uniform(8, 8).unwrap();
        let g = RowGrouping::consecutive(8, 5);
        let v = VbrMatrix::from_grouping(&a, &g, &q).unwrap();
        let model = TcuModel::new(16.0, 4.0).unwrap();
        let f = tcu_cost_tall_groups(&v, 10, &model, 4);
        assert_eq!(f.groups, 1);
        assert_eq!(f.nnz, 40);
        assert_eq!(f.blocked, model.product_cost(5.0, 8.0, 10.0));
    }

    #[test]
    fn model_validation() {
        assert!(TcuModel::new(0.5, 1.0).is_err());
        assert!(TcuModel::new(4.0, 0.0).is_err());
        assert!(TcuModel::new(f64::NAN, 1.0).is_err());
    }
}
