//! The one-dimensional similarity grouping loop.
//!
//! Rows are scanned in index order. The first unassigned row seeds a group;
//! every later unassigned row is tested against the group's current pattern
//! and absorbed when the merge condition holds. With pattern updates on, the
//! pattern grows to the OR of everything merged so far.
//!
//! Under the bounded Jaccard policy each group's pattern is capped at
//! `λ0 / (1 - τ/2)` segments, where `λ0` is the seed's size. That cap is what
//! guarantees a quotient density of at least `τ/2` per group, and an element
//! density of at least `τ / (2 ΔW)` once empty segments are dropped.
//!
//! Cost is `O(N² k)` comparisons for `N` rows with at most `k` nonzeros each;
//! pattern updates do not change the worst case.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::blocking::quotient::{compress_rows, quotient_rows, QuotientRow};
use crate::blocking::similarity::{cmp_ratio, intersection_len, union, Similarity};
use crate::error::{Error, Result};
use crate::matrix::{ColumnPartition, CsrMatrix, RowGroup, RowGrouping};

/// How a candidate row is judged against a group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergePolicy {
    pub similarity: Similarity,
    /// Similarity threshold in `[0, 1]`.
    pub tau: f64,
    /// Cap the pattern size at `λ0 / (1 - τ/2)`.
    pub bounded: bool,
    /// OR each merged row into the group pattern.
    pub pattern_update: bool,
}

impl MergePolicy {
    pub fn new(
        similarity: Similarity,
        tau: f64,
        bounded: bool,
        pattern_update: bool,
    ) -> Result<Self> {
        let p = MergePolicy {
            similarity,
            tau,
            bounded,
            pattern_update,
        };
        p.validate()?;
        Ok(p)
    }

    /// Jaccard with the size cap and pattern updates: the density-guaranteed policy.
    pub fn bounded(tau: f64) -> Result<Self> {
        Self::new(Similarity::Jaccard, tau, true, true)
    }

    /// Jaccard with pattern updates and no size cap.
    pub fn plain(tau: f64) -> Result<Self> {
        Self::new(Similarity::Jaccard, tau, false, true)
    }

    /// Seed-only comparisons, no cap: the classic row-similarity baseline.
    pub fn naive(similarity: Similarity, tau: f64) -> Result<Self> {
        Self::new(similarity, tau, false, false)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.similarity, tau, self.bounded, self.pattern_update)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in [0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// A group while it is being built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupState {
    /// Pattern candidates are compared against.
    pub pattern: Vec<usize>,
    /// `λ0`: size of the seed's quotient row.
    pub seed_size: usize,
    /// Indices of the merged items, seed first.
    pub members: Vec<usize>,
}

impl GroupState {
    pub fn seed(index: usize, segments: &[usize]) -> Self {
        GroupState {
            pattern: segments.to_vec(),
            seed_size: segments.len(),
            members: vec![index],
        }
    }

    pub fn absorb(&mut self, index: usize, segments: &[usize], pattern_update: bool) {
        if pattern_update {
            self.pattern = union(&self.pattern, segments);
        }
        self.members.push(index);
    }
}

/// `λ <= λ0 / (1 - τ/2)`, decided exactly.
fn within_cap(lambda: usize, lambda0: usize, tau: f64) -> bool {
    if lambda <= lambda0 {
        return true;
    }
    // λ(1 - τ/2) <= λ0  <=>  2(λ - λ0) / λ <= τ
    cmp_ratio(2 * (lambda - lambda0) as u64, lambda as u64, tau) != Ordering::Greater
}

fn meets_threshold(inter: usize, a: usize, b: usize, policy: &MergePolicy) -> bool {
    if a == 0 && b == 0 {
        return true;
    }
    match policy.similarity {
        Similarity::Jaccard => {
            cmp_ratio(inter as u64, (a + b - inter) as u64, policy.tau) != Ordering::Less
        }
        Similarity::Cosine => {
            let sim = if a == 0 || b == 0 {
                0.0
            } else {
                inter as f64 / (a as f64 * b as f64).sqrt()
            };
            sim >= policy.tau
        }
    }
}

/// Whether `candidate` may join the group under `policy`.
pub fn merge_condition(group: &GroupState, candidate: &[usize], policy: &MergePolicy) -> bool {
    admits(
        group.pattern.len(),
        group.seed_size,
        candidate.len(),
        policy,
        || intersection_len(&group.pattern, candidate),
    )
}

/// Merge test on set sizes; the overlap is computed only when the size
/// checks leave the outcome open.
fn admits(
    p: usize,
    seed_size: usize,
    c: usize,
    policy: &MergePolicy,
    overlap: impl FnOnce() -> usize,
) -> bool {
    let (small, large) = (p.min(c), p.max(c));

    // Overlap is at most `small` and the union at least `large`.
    if !meets_threshold(small, small, large, policy) {
        return false;
    }
    if policy.bounded && !within_cap(large, seed_size, policy.tau) {
        return false;
    }

    let inter = overlap();
    if !meets_threshold(inter, p, c, policy) {
        return false;
    }
    !policy.bounded || within_cap(p + c - inter, seed_size, policy.tau)
}

/// Groups the rows of `a` against the fixed column partition.
///
/// With `use_compression`, rows sharing a quotient pattern are collapsed first
/// and join groups together; the scan then runs over the compressed rows in
/// order of their smallest source row.
pub fn block_1sa(
    a: &CsrMatrix,
    partition: &ColumnPartition,
    policy: &MergePolicy,
    use_compression: bool,
) -> Result<RowGrouping> {
    policy.validate()?;
    if partition.n_cols() != a.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} columns, matrix has {}",
            partition.n_cols(),
            a.n_cols()
        )));
    }
    let items = if use_compression {
        compress_rows(a, partition)
    } else {
        quotient_rows(a, partition)
    };
    group_quotient_rows(&items, policy, a.n_rows())
}

/// The classic baseline: raw column sets (unit-width partition), no pattern
/// update and no size cap, whatever `policy` says about those two flags.
pub fn block_naive_sa(a: &CsrMatrix, policy: &MergePolicy) -> Result<RowGrouping> {
    let unit = ColumnPartition::uniform(a.n_cols(), 1)?;
    let naive = MergePolicy::naive(policy.similarity, policy.tau)?;
    block_1sa(a, &unit, &naive, true)
}

/// Runs the grouping loop over prepared quotient rows.
pub fn group_quotient_rows(
    items: &[QuotientRow],
    policy: &MergePolicy,
    n_rows: usize,
) -> Result<RowGrouping> {
    let n_segments = items
        .iter()
        .filter_map(|q| q.segments.last())
        .max()
        .map_or(0, |&s| s + 1);
    // Membership bitmap of the current pattern; cleared after every group.
    let mut in_pattern = vec![false; n_segments];
    let mut remaining: Vec<usize> = (0..items.len()).collect();
    let mut groups = Vec::new();
    while let Some((&seed, rest)) = remaining.split_first() {
        let mut pattern = items[seed].segments.clone();
        let seed_size = pattern.len();
        for &s in &pattern {
            in_pattern[s] = true;
        }
        let mut members = vec![seed];
        let mut unmerged = Vec::with_capacity(rest.len());
        for &j in rest {
            let segs = &items[j].segments;
            let overlap = || segs.iter().filter(|&&s| in_pattern[s]).count();
            if admits(pattern.len(), seed_size, segs.len(), policy, overlap) {
                if policy.pattern_update {
                    for &s in segs {
                        if !in_pattern[s] {
                            in_pattern[s] = true;
                            pattern.push(s);
                        }
                    }
                }
                members.push(j);
            } else {
                unmerged.push(j);
            }
        }
        remaining = unmerged;
        for &s in &pattern {
            in_pattern[s] = false;
        }

        if !policy.pattern_update {
            pattern = members
                .iter()
                .fold(Vec::new(), |acc, &m| union(&acc, &items[m].segments));
        }
        pattern.sort_unstable();
        groups.push(RowGroup {
            members: members
                .iter()
                .flat_map(|&m| items[m].source_rows.iter().copied())
                .collect(),
            pattern,
            seed_size,
        });
    }
    RowGrouping::from_groups(n_rows, groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(pattern: Vec<usize>) -> GroupState {
        GroupState::seed(0, &pattern)
    }

    fn toy() -> CsrMatrix {
        CsrMatrix::from_row_patterns(6, &[vec![0, 1], vec![3], vec![2], vec![4, 5]]).unwrap()
    }

    #[test]
    fn merge_condition_examples() {
        let p = MergePolicy::bounded(0.8).unwrap();
        assert!(!merge_condition(
            &state(vec![0, 1, 2, 3]),
            &[0, 1, 2, 4],
            &p
        ));
        assert!(merge_condition(
            &state(vec![0, 1, 2, 3]),
            &[0, 1, 2, 3, 4],
            &p
        ));
        for tau in [0.0, 0.3, 0.77, 1.0] {
            let p = MergePolicy::bounded(tau).unwrap();
            assert!(merge_condition(&state(vec![1, 5, 9]), &[1, 5, 9], &p));
        }
    }

    #[test]
    fn cap_blocks_growth_even_when_similar() {
        // λ0 = 1, τ = 0.5: cap is 1/0.75 ≈ 1.33, so no second segment is allowed.
        let bounded = MergePolicy::bounded(0.5).unwrap();
        let plain = MergePolicy::plain(0.5).unwrap();
        assert!(!merge_condition(&state(vec![0]), &[0, 1], &bounded));
        assert!(merge_condition(&state(vec![0]), &[0, 1], &plain));
    }

    #[test]
    fn cap_is_real_valued() {
        // λ0 = 3, τ = 0.5: cap = 4. λ = 4 allowed, 5 not.
        assert!(within_cap(4, 3, 0.5));
        assert!(!within_cap(5, 3, 0.5));
        // λ0 = 4, τ = 0.8: cap = 6.67.
        assert!(within_cap(6, 4, 0.8));
        assert!(!within_cap(7, 4, 0.8));
        // τ = 0 never lets the pattern grow.
        assert!(!within_cap(2, 1, 0.0));
        assert!(within_cap(0, 0, 0.0));
    }

    #[test]
    fn hand_traced_grouping() {
        let q = ColumnPartition::uniform(6, 3).unwrap();
        let p = MergePolicy::plain(0.5).unwrap();
        for compress in [false, true] {
            let g = block_1sa(&toy(), &q, &p, compress).unwrap();
            assert_eq!(g.n_groups(), 2);
            assert_eq!(g.groups()[0].members, vec![0, 2]);
            assert_eq!(g.groups()[1].members, vec![1, 3]);
            assert_eq!(g.groups()[0].pattern, vec![0]);
            assert_eq!(g.groups()[1].pattern, vec![1]);
        }
    }

    #[test]
    fn identical_rows_form_one_group() {
        let rows = vec![vec![1, 4, 7]; 5];
        let a = CsrMatrix::from_row_patterns(8, &rows).unwrap();
        let q = ColumnPartition::uniform(8, 2).unwrap();
        let g = block_1sa(&a, &q, &MergePolicy::bounded(0.9).unwrap(), false).unwrap();
        assert_eq!(g.n_groups(), 1);
        assert_eq!(g.groups()[0].members, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn tau_one_on_distinct_rows_gives_singletons() {
        let a =
            CsrMatrix::from_row_patterns(4, &[vec![0], vec![0, 1], vec![1, 2], vec![3]]).unwrap();
        let q = ColumnPartition::uniform(4, 1).unwrap();
        let g = block_1sa(&a, &q, &MergePolicy::plain(1.0).unwrap(), false).unwrap();
        assert_eq!(g.n_groups(), 4);
    }

    #[test]
    fn tau_zero_unbounded_gives_one_group() {
        let a = CsrMatrix::from_row_patterns(4, &[vec![0], vec![], vec![2], vec![3]]).unwrap();
        let q = ColumnPartition::uniform(4, 1).unwrap();
        let g = block_1sa(&a, &q, &MergePolicy::plain(0.0).unwrap(), false).unwrap();
        assert_eq!(g.n_groups(), 1);
    }

    #[test]
    fn empty_rows_group_together() {
        let a = CsrMatrix::from_row_patterns(3, &[vec![], vec![1], vec![]]).unwrap();
        let q = ColumnPartition::uniform(3, 1).unwrap();
        let g = block_1sa(&a, &q, &MergePolicy::bounded(0.5).unwrap(), false).unwrap();
        assert_eq!(g.groups()[0].members, vec![0, 2]);
        assert_eq!(g.groups()[1].members, vec![1]);
    }

    #[test]
    fn pattern_update_changes_outcome() {
        // At τ = 0.25, {2,3} matches the grown pattern {0,1,2} (1/4) but not
        // the seed {0,1} (0).
        let a = CsrMatrix::from_row_patterns(4, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let q = ColumnPartition::uniform(4, 1).unwrap();
        let updating = block_1sa(&a, &q, &MergePolicy::plain(0.25).unwrap(), false).unwrap();
        let naive = block_1sa(
            &a,
            &q,
            &MergePolicy::naive(Similarity::Jaccard, 0.25).unwrap(),
            false,
        )
        .unwrap();
        assert_eq!(updating.n_groups(), 1);
        assert_eq!(naive.n_groups(), 2);
        // Reported patterns are always the OR of the members.
        assert_eq!(naive.groups()[0].pattern, vec![0, 1, 2]);
    }

    #[test]
    fn naive_sa_on_raw_columns() {
        let a = CsrMatrix::from_row_patterns(2, &[vec![0], vec![1]]).unwrap();
        let g = block_naive_sa(&a, &MergePolicy::plain(0.1).unwrap()).unwrap();
        assert_eq!(g.n_groups(), 2);
        let a = CsrMatrix::from_row_patterns(3, &[vec![0, 2], vec![0, 2]]).unwrap();
        let g = block_naive_sa(&a, &MergePolicy::plain(0.1).unwrap()).unwrap();
        assert_eq!(g.n_groups(), 1);
    }

    #[test]
    fn rejects_bad_tau_and_partition() {
        assert!(MergePolicy::bounded(1.5).is_err());
        assert!(MergePolicy::bounded(-0.1).is_err());
        assert!(MergePolicy::bounded(f64::NAN).is_err());
        let bad = MergePolicy {
            similarity: Similarity::Jaccard,
            tau: 2.0,
            bounded: false,
            pattern_update: true,
        };
        let q = ColumnPartition::uniform(6, 3).unwrap();
        assert!(block_1sa(&toy(), &q, &bad, false).is_err());
        let q = ColumnPartition::uniform(5, 3).unwrap();
        assert!(block_1sa(&toy(), &q, &MergePolicy::plain(0.5).unwrap(), false).is_err());
    }
}
