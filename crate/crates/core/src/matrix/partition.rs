use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed partition of the column range into contiguous segments.
///
/// `boundaries` starts at 0, ends at `n_cols` and is strictly increasing, so
/// segment `j` covers columns `boundaries[j]..boundaries[j + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnPartition {
    n_cols: usize,
    boundaries: Vec<usize>,
    #[serde(skip)]
    uniform_width: Option<usize>,
}

impl ColumnPartition {
    /// Segments of width `width`; the last one is narrower when `width` does
    /// not divide `n_cols`.
    pub fn uniform(n_cols: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidPartition(
                "segment width must be positive".into(),
            ));
        }
        let mut boundaries: Vec<usize> = (0..n_cols).step_by(width).collect();
        boundaries.push(n_cols);
        Ok(ColumnPartition {
            n_cols,
            boundaries,
            uniform_width: Some(width),
        })
    }

    pub fn from_boundaries(boundaries: Vec<usize>) -> Result<Self> {
        match (boundaries.first(), boundaries.last()) {
            (Some(0), Some(&n_cols)) => {
                if boundaries.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidPartition(
                        "boundaries must be strictly increasing".into(),
                    ));
                }
                Ok(ColumnPartition {
                    n_cols,
                    boundaries,
                    uniform_width: None,
                })
            }
            _ => Err(Error::InvalidPartition(
                "boundaries must start at 0 and be nonempty".into(),
            )),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn n_segments(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn segment_range(&self, j: usize) -> std::ops::Range<usize> {
        self.boundaries[j]..self.boundaries[j + 1]
    }

    pub fn segment_width(&self, j: usize) -> usize {
        self.boundaries[j + 1] - self.boundaries[j]
    }

    /// Widest segment; this is the width that enters the density bound.
    pub fn max_width(&self) -> usize {
        (0..self.n_segments())
            .map(|j| self.segment_width(j))
            .max()
            .unwrap_or(0)
    }

    /// Segment containing column `col`.
    #[inline]
    pub fn segment_of(&self, col: usize) -> usize {
        debug_assert!(col < self.n_cols);
        match self.uniform_width {
            Some(w) => col / w,
            None => self.boundaries.partition_point(|&b| b <= col) - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_divisible() {
        let q = ColumnPartition::uniform(9, 3).unwrap();
        assert_eq!(q.boundaries(), &[0, 3, 6, 9]);
        assert_eq!(q.n_segments(), 3);
        assert_eq!(q.segment_of(4), 1);
    }

    #[test]
    fn uniform_ragged_tail() {
        let q = ColumnPartition::uniform(10, 4).unwrap();
        assert_eq!(q.boundaries(), &[0, 4, 8, 10]);
        assert_eq!(q.segment_width(2), 2);
        assert_eq!(q.max_width(), 4);
        assert_eq!(q.segment_of(9), 2);
    }

    #[test]
    fn width_larger_than_matrix() {
        let q = ColumnPartition::uniform(5, 64).unwrap();
        assert_eq!(q.boundaries(), &[0, 5]);
    }

    #[test]
    fn zero_columns() {
        let q = ColumnPartition::uniform(0, 4).unwrap();
        assert_eq!(q.n_segments(), 0);
    }

    #[test]
    fn explicit_boundaries() {
        let q = ColumnPartition::from_boundaries(vec![0, 1, 5, 6]).unwrap();
        assert_eq!(q.segment_of(0), 0);
        assert_eq!(q.segment_of(4), 1);
        assert_eq!(q.segment_of(5), 2);
        assert!(ColumnPartition::from_boundaries(vec![0, 2, 2]).is_err());
        assert!(ColumnPartition::from_boundaries(vec![1, 2]).is_err());
        assert!(ColumnPartition::uniform(4, 0).is_err());
    }
}
