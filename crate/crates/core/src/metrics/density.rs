//! Per-group density check for bounded blockings.
//!
//! A group of `h` rows whose quotient rows OR to `λ` segments is measured
//! after dropping empty segments: the quotient density is
//! `Σ|v̂_i| / (h λ)` and must reach `τ/2`; the element density is
//! `Σ k_i / (h Σ width)` and must reach `τ / (2 ΔW)`, with `ΔW` the widest
//! segment. Comparisons are exact rationals.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::blocking::{cmp_ratio, quotient_row, union};
use crate::error::{Error, Result};
use crate::matrix::{ColumnPartition, CsrMatrix, RowGrouping};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDensity {
    pub group: usize,
    pub rows: usize,
    /// Non-empty segments in the group.
    pub segments: usize,
    pub quotient_nnz: usize,
    pub quotient_density: f64,
    pub element_nnz: usize,
    pub element_area: usize,
    pub element_density: f64,
    pub quotient_ok: bool,
    pub element_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub tau: f64,
    pub delta_w: usize,
    pub quotient_bound: f64,
    pub element_bound: f64,
    pub groups: Vec<GroupDensity>,
}

impl DensityReport {
    pub fn quotient_violations(&self) -> usize {
        self.groups.iter().filter(|g| !g.quotient_ok).count()
    }

    pub fn element_violations(&self) -> usize {
        self.groups.iter().filter(|g| !g.element_ok).count()
    }

    pub fn all_ok(&self) -> bool {
        self.groups.iter().all(|g| g.quotient_ok && g.element_ok)
    }

    pub fn min_quotient_density(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.quotient_density)
            .fold(f64::INFINITY, f64::min)
    }

    /// The group with the most rows (first on ties).
    pub fn largest_group(&self) -> Option<&GroupDensity> {
        self.groups.iter().rev().max_by_key(|g| g.rows)
    }
}

pub fn verify_density_bound(
    a: &CsrMatrix,
    grouping: &RowGrouping,
    partition: &ColumnPartition,
    tau: f64,
) -> Result<DensityReport> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    if grouping.n_rows() != a.n_rows() || partition.n_cols() != a.n_cols() {
        return Err(Error::DimensionMismatch(
            "grouping or partition does not match the matrix".into(),
        ));
    }
    let delta_w = partition.max_width();

    let groups = grouping
        .groups()
        .iter()
        .enumerate()
        .map(|(gi, group)| {
            let h = group.members.len();
            let mut pattern: Vec<usize> = Vec::new();
            let (mut quotient_nnz, mut element_nnz) = (0usize, 0usize);
            for &r in &group.members {
                let q = quotient_row(a.row_cols(r), partition);
                quotient_nnz += q.len();
                element_nnz += a.row_nnz(r);
                pattern = union(&pattern, &q);
            }
            let width: usize = pattern.iter().map(|&s| partition.segment_width(s)).sum();
            let quotient_area = h * pattern.len();
            let element_area = h * width;
            // A group with no nonzeros keeps nothing once empty segments are dropped.
            let (quotient_density, element_density, quotient_ok, element_ok) = if pattern.is_empty()
            {
                (1.0, 1.0, true, true)
            } else {
                (
                    quotient_nnz as f64 / quotient_area as f64,
                    element_nnz as f64 / element_area as f64,
                    cmp_ratio(2 * quotient_nnz as u64, quotient_area as u64, tau) != Ordering::Less,
                    cmp_ratio((2 * delta_w * element_nnz) as u64, element_area as u64, tau)
                        != Ordering::Less,
                )
            };
            GroupDensity {
                group: gi,
                rows: h,
                segments: pattern.len(),
                quotient_nnz,
                quotient_density,
                element_nnz,
                element_area,
                element_density,
                quotient_ok,
                element_ok,
            }
        })
        .collect();

    Ok(DensityReport {
        tau,
        delta_w,
        quotient_bound: tau / 2.0,
        element_bound: tau / (2.0 * delta_w.max(1) as f64),
        groups,
    })
}
