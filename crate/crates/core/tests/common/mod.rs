#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rowblock::generators::rng_from_seed;
use rowblock::matrix::{CsrMatrix, RowGrouping};

/// Bernoulli(density) pattern with values bounded away from zero.
pub fn random_matrix(n_rows: usize, n_cols: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = rng_from_seed(seed);
    let mut triplets = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen_bool(density) {
                triplets.push((r, c, signed_value(&mut rng)));
            }
        }
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets).unwrap()
}

/// Exactly `round(density * n_rows * n_cols)` nonzeros at uniform positions.
pub fn random_matrix_exact(n_rows: usize, n_cols: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = rng_from_seed(seed);
    let cells = n_rows * n_cols;
    let nnz = (density * cells as f64).round() as usize;
    let triplets: Vec<_> = index::sample(&mut rng, cells, nnz)
        .into_iter()
        .map(|cell| (cell / n_cols, cell % n_cols, 1.0))
        .collect();
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets).unwrap()
}

fn signed_value(rng: &mut impl Rng) -> f64 {
    let v: f64 = rng.gen_range(0.5..2.0);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

pub struct GroupCheck {
    pub quotient_ok: bool,
    pub element_ok: bool,
}

/// Recomputes both density bounds for every group straight from the matrix,
/// in integer arithmetic with `τ = tenths / 10` and segments `c / dw`.
pub fn density_oracle(a: &CsrMatrix, g: &RowGrouping, dw: usize, tenths: u64) -> Vec<GroupCheck> {
    g.groups()
        .iter()
        .map(|group| {
            let h = group.members.len() as u64;
            let mut seg_nnz: BTreeMap<usize, u64> = BTreeMap::new();
            let mut qnnz = 0u64;
            for &r in &group.members {
                let mut segs: Vec<usize> = a.row_cols(r).iter().map(|&c| c / dw).collect();
                segs.dedup();
                qnnz += segs.len() as u64;
                for &c in a.row_cols(r) {
                    *seg_nnz.entry(c / dw).or_default() += 1;
                }
            }
            let lambda = seg_nnz.len() as u64;
            if lambda == 0 {
                return GroupCheck {
                    quotient_ok: true,
                    element_ok: true,
                };
            }
            let nnz: u64 = seg_nnz.values().sum();
            let width: u64 = seg_nnz
                .keys()
                .map(|&s| (((s + 1) * dw).min(a.n_cols()) - s * dw) as u64)
                .sum();
            GroupCheck {
                // qnnz / (h λ) >= τ/2
                quotient_ok: 20 * qnnz >= tenths * h * lambda,
                // nnz / (h · width) >= τ / (2 ΔW)
                element_ok: 20 * dw as u64 * nnz >= tenths * h * width,
            }
        })
        .collect()
}
