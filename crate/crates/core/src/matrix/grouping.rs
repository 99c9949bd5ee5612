use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One group of rows produced by a blocking run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowGroup {
    /// Original row indices in merge order; the first one is the seed.
    pub members: Vec<usize>,
    /// Sorted segment indices of the OR of the members' quotient rows.
    pub pattern: Vec<usize>,
    /// Size of the seed's quotient row.
    pub seed_size: usize,
}

/// Partition of the rows of a matrix into groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowGrouping {
    group_of: Vec<usize>,
    groups: Vec<RowGroup>,
}

impl RowGrouping {
    /// Builds a grouping from explicit groups over `n_rows` rows, checking that
    /// every row lands in exactly one group.
    pub fn from_groups(n_rows: usize, groups: Vec<RowGroup>) -> Result<Self> {
        let mut group_of = vec![usize::MAX; n_rows];
        for (g, group) in groups.iter().enumerate() {
            if group.members.is_empty() {
                return Err(Error::InvalidGrouping(format!("group {g} is empty")));
            }
            for &r in &group.members {
                if r >= n_rows {
                    return Err(Error::InvalidGrouping(format!(
                        "row {r} out of range for {n_rows} rows"
                    )));
                }
                if group_of[r] != usize::MAX {
                    return Err(Error::InvalidGrouping(format!(
                        "row {r} belongs to groups {} and {g}",
                        group_of[r]
                    )));
                }
                group_of[r] = g;
            }
        }
        if let Some(r) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(Error::InvalidGrouping(format!("row {r} is not assigned")));
        }
        Ok(RowGrouping { group_of, groups })
    }

    /// Every row in its own group, in row order. Patterns are left empty;
    /// recompute them against a partition if they are needed.
    pub fn singletons(n_rows: usize) -> Self {
        RowGrouping {
            group_of: (0..n_rows).collect(),
            groups: (0..n_rows)
                .map(|r| RowGroup {
                    members: vec![r],
                    pattern: Vec::new(),
                    seed_size: 0,
                })
                .collect(),
        }
    }

    /// Groups of `height` consecutive rows (the last may be shorter).
    pub fn consecutive(n_rows: usize, height: usize) -> Self {
        assert!(height > 0, "group height must be positive");
        let groups = (0..n_rows)
            .step_by(height)
            .map(|start| RowGroup {
                members: (start..(start + height).min(n_rows)).collect(),
                pattern: Vec::new(),
                seed_size: 0,
            })
            .collect();
        Self::from_groups(n_rows, groups).expect("consecutive groups cover all rows")
    }

    pub fn n_rows(&self) -> usize {
        self.group_of.len()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn groups(&self) -> &[RowGroup] {
        &self.groups
    }

    /// Row order that lists groups contiguously, by group id, members in merge order.
    pub fn row_order(&self) -> Vec<usize> {
        self.groups
            .iter()
            .flat_map(|g| g.members.iter().copied())
            .collect()
    }

    /// Merges group `b` into group `a` (members appended, patterns OR-ed).
    /// Group ids above `b` shift down by one.
    pub fn merge_groups(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.n_groups() || b >= self.n_groups() {
            return Err(Error::InvalidGrouping(format!(
                "cannot merge groups {a} and {b} of {}",
                self.n_groups()
            )));
        }
        let mut groups = self.groups.clone();
        let taken = groups[b].clone();
        let target = &mut groups[a];
        target.members.extend(taken.members);
        target.pattern = crate::blocking::union(&target.pattern, &taken.pattern);
        groups.remove(b);
        Self::from_groups(self.n_rows(), groups)
    }
}
