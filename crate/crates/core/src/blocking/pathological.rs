use crate::matrix::CsrMatrix;

/// Largest `r` with `r^4 <= n`.
pub fn fourth_root_floor(n: usize) -> usize {
    let mut r = (n as f64).powf(0.25) as usize;
    while (r + 1).checked_pow(4).is_some_and(|p| p <= n) {
        r += 1;
    }
    while r.checked_pow(4).is_none_or(|p| p > n) {
        r -= 1;
    }
    r
}

/// A matrix on which unbounded similarity merging builds a sparse group.
///
/// `l` rows hold a single nonzero in column 0; they are followed by
/// `r = ⌊l^{1/4}⌋` rows where row `l + j` fills columns `0..=j`. Merged in
/// order at `τ <= 0.5` without a size cap, everything lands in one group of
/// density `Θ(l^{-1/4})`.
pub fn pathological_matrix(l: usize) -> CsrMatrix {
    if l == 0 {
        return CsrMatrix::zeros(0, 0);
    }
    let r = fourth_root_floor(l);
    let rows: Vec<Vec<usize>> = std::iter::repeat_n(vec![0], l)
        .chain((0..r).map(|j| (0..=j).collect()))
        .collect();
    CsrMatrix::from_row_patterns(r.max(1), &rows).expect("columns are within 0..r")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_roots() {
        assert_eq!(fourth_root_floor(0), 0);
        assert_eq!(fourth_root_floor(15), 1);
        assert_eq!(fourth_root_floor(16), 2);
        assert_eq!(fourth_root_floor(80), 2);
        assert_eq!(fourth_root_floor(81), 3);
        assert_eq!(fourth_root_floor(65536), 16);
    }

    #[test]
    fn sixteen() {
        let a = pathological_matrix(16);
        assert_eq!(a.n_rows(), 18);
        assert_eq!(a.n_cols(), 2);
        for i in 0..17 {
            assert_eq!(a.row_cols(i), &[0]);
        }
        assert_eq!(a.row_cols(17), &[0, 1]);
    }

    #[test]
    fn empty() {
        let a = pathological_matrix(0);
        assert_eq!((a.n_rows(), a.n_cols(), a.nnz()), (0, 0, 0));
    }
}
