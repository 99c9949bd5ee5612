//! Blocking curves: the (Δ′H, ρ′) trade-off traced by sweeping τ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocking::{block_1sa, block_naive_sa, MergePolicy, Similarity};
use crate::error::{Error, Result};
use crate::matrix::{ColumnPartition, CsrMatrix, RowGrouping};
use crate::metrics::{blocking_stats, verify_density_bound, BlockingStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub stats: BlockingStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub delta_w: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingCurve {
    pub meta: CurveMeta,
    /// Ascending in `tau`.
    pub points: Vec<CurvePoint>,
}

/// Which blocking routine produces the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Quotient-row grouping against the column partition.
    #[default]
    #[serde(rename = "1sa")]
    OneSided,
    /// Raw column sets, seed-only comparisons, no cap.
    NaiveSa,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OneSided => "1sa",
            Algorithm::NaiveSa => "naive-sa",
        }
    }
}

/// Everything about a sweep except τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub algorithm: Algorithm,
    pub similarity: Similarity,
    pub bounded: bool,
    pub pattern_update: bool,
    pub use_compression: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            algorithm: Algorithm::OneSided,
            similarity: Similarity::Jaccard,
            bounded: true,
            pattern_update: true,
            use_compression: true,
        }
    }
}

impl SweepConfig {
    pub fn naive(similarity: Similarity) -> Self {
        SweepConfig {
            algorithm: Algorithm::NaiveSa,
            similarity,
            bounded: false,
            pattern_update: false,
            use_compression: true,
        }
    }

    pub fn policy(&self, tau: f64) -> Result<MergePolicy> {
        MergePolicy::new(self.similarity, tau, self.bounded, self.pattern_update)
    }

    /// Whether runs under this config carry the density guarantee.
    pub fn is_density_bounded(&self) -> bool {
        self.algorithm == Algorithm::OneSided
            && self.similarity == Similarity::Jaccard
            && self.bounded
            && self.pattern_update
    }

    pub fn run(&self, a: &CsrMatrix, partition: &ColumnPartition, tau: f64) -> Result<RowGrouping> {
        let policy = self.policy(tau)?;
        match self.algorithm {
            Algorithm::OneSided => block_1sa(a, partition, &policy, self.use_compression),
            Algorithm::NaiveSa => block_naive_sa(a, &policy),
        }
    }

    /// Blocks `a` at `tau` and measures the result against `partition`.
    pub fn evaluate(
        &self,
        a: &CsrMatrix,
        partition: &ColumnPartition,
        tau: f64,
    ) -> Result<BlockingStats> {
        let grouping = self.run(a, partition, tau)?;
        let mut stats = blocking_stats(a, &grouping, partition)?;
        stats.tau = Some(tau);
        if self.is_density_bounded() {
            stats.density_bound_ok =
                Some(verify_density_bound(a, &grouping, partition, tau)?.all_ok());
        }
        Ok(stats)
    }
}

/// Sorts and deduplicates `taus`, rejecting empty lists and values outside `[0, 1]`.
pub fn normalize_taus(taus: &[f64]) -> Result<Vec<f64>> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("tau list is empty".into()));
    }
    if let Some(t) = taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!("tau {t} outside [0, 1]")));
    }
    let mut out = taus.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// `0.1, 0.2, ..., 1.0`.
pub fn default_taus() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Runs one blocking per τ on the same input and collects the stats.
///
/// Points are computed on a pool of `jobs` threads (`0` means rayon's
/// default); the result does not depend on `jobs`.
pub fn blocking_curve(
    a: &CsrMatrix,
    partition: &ColumnPartition,
    taus: &[f64],
    config: &SweepConfig,
    jobs: usize,
) -> Result<BlockingCurve> {
    let taus = normalize_taus(taus)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let points = pool.install(|| {
        taus.par_iter()
            .map(|&tau| {
                config
                    .evaluate(a, partition, tau)
                    .map(|stats| CurvePoint { tau, stats })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(BlockingCurve {
        meta: CurveMeta {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
            nnz: a.nnz(),
            delta_w: partition.max_width(),
        },
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveTarget {
    /// Point whose Δ′H is closest to the given height.
    AtHeight(f64),
    /// Point whose ρ′ is closest to the given density.
    AtDensity(f64),
}

/// Closest point to the target; ties go to the larger τ.
pub fn curve_select(curve: &BlockingCurve, target: CurveTarget) -> Option<&CurvePoint> {
    let distance = |p: &CurvePoint| match target {
        CurveTarget::AtHeight(h) => (p.stats.delta_h_prime - h).abs(),
        CurveTarget::AtDensity(r) => (p.stats.rho_prime - r).abs(),
    };
    let mut best: Option<&CurvePoint> = None;
    for p in &curve.points {
        if best.is_none_or(|b| distance(p) <= distance(b)) {
            best = Some(p);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(tau: f64, h: f64, rho: f64) -> CurvePoint {
        CurvePoint {
            tau,
            stats: BlockingStats {
                rho_prime: rho,
                delta_h_prime: h,
                delta_h_prime_groups: h,
                n_groups: 1,
                n_stored_blocks: 1,
                stored_area: 1,
                nnz: 1,
                fill_in: 0,
                tau: Some(tau),
                density_bound_ok: None,
            },
        }
    }

    fn curve(points: Vec<CurvePoint>) -> BlockingCurve {
        BlockingCurve {
            meta: CurveMeta {
                n_rows: 0,
                n_cols: 0,
                nnz: 0,
                delta_w: 1,
            },
            points,
        }
    }

    #[test]
    fn select_exact_and_ties() {
        let c = curve(vec![
            point(0.1, 40.0, 0.1),
            point(0.2, 32.0, 0.2),
            point(0.3, 24.0, 0.3),
        ]);
        assert_eq!(
            curve_select(&c, CurveTarget::AtHeight(32.0)).unwrap().tau,
            0.2
        );
        assert_eq!(
            curve_select(&c, CurveTarget::AtHeight(36.0)).unwrap().tau,
            0.2
        );
        assert_eq!(
            curve_select(&c, CurveTarget::AtDensity(0.25)).unwrap().tau,
            0.3
        );
        let tied = curve(vec![point(0.4, 30.0, 0.5), point(0.6, 34.0, 0.5)]);
        assert_eq!(
            curve_select(&tied, CurveTarget::AtHeight(32.0))
                .unwrap()
                .tau,
            0.6
        );
        assert!(curve_select(&curve(vec![]), CurveTarget::AtHeight(1.0)).is_none());
    }

    #[test]
    fn taus_are_normalized() {
        assert_eq!(normalize_taus(&[0.5, 0.1, 0.5]).unwrap(), vec![0.1, 0.5]);
        assert!(normalize_taus(&[]).is_err());
        assert!(normalize_taus(&[0.2, 1.2]).is_err());
        assert_eq!(default_taus().len(), 10);
        assert_eq!(default_taus()[2], 0.3);
    }

    #[test]
    fn dense_matrix_curve_is_saturated() {
        let rows = vec![(0..8).collect::<Vec<_>>(); 6];
        let a = CsrMatrix::from_row_patterns(8, &rows).unwrap();
        let q = ColumnPartition::uniform(8, 4).unwrap();
        let c = blocking_curve(&a, &q, &default_taus(), &SweepConfig::default(), 2).unwrap();
        assert_eq!(c.points.len(), 10);
        assert!(c.points.iter().all(|p| p.stats.rho_prime == 1.0));
        assert!(c
            .points
            .iter()
            .all(|p| p.stats.density_bound_ok == Some(true)));
    }

    #[test]
    fn single_tau_matches_direct_run() {
        let a =
            CsrMatrix::from_row_patterns(6, &[vec![0, 1], vec![3], vec![2], vec![4, 5]]).unwrap();
        let q = ColumnPartition::uniform(6, 3).unwrap();
        let config = SweepConfig::default();
        let c = blocking_curve(&a, &q, &[0.5], &config, 1).unwrap();
        assert_eq!(c.points.len(), 1);
        let g = config.run(&a, &q, 0.5).unwrap();
        let mut direct = blocking_stats(&a, &g, &q).unwrap();
        direct.tau = Some(0.5);
        direct.density_bound_ok = Some(true);
        assert_eq!(c.points[0].stats, direct);
    }

    #[test]
    fn naive_config_has_no_bound_flag() {
        let a = CsrMatrix::from_row_patterns(4, &[vec![0, 1], vec![1, 2]]).unwrap();
        let q = ColumnPartition::uniform(4, 2).unwrap();
        let c = blocking_curve(&a, &q, &[0.3], &SweepConfig::naive(Similarity::Cosine), 1).unwrap();
        assert_eq!(c.points[0].stats.density_bound_ok, None);
    }
}
