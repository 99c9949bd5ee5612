//! Seeded synthetic inputs.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (crate
//! `rand_chacha` 0.3), which produces the same stream on every platform.
//! Sampling without replacement uses `rand::seq::index::sample`, shuffles use
//! `SliceRandom::shuffle` (Fisher-Yates).

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

pub type GenRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A(Δ, θ, ρ)`: a matrix cut into `Δ x Δ` tiles, a fraction `θ` of which are
/// nonzero, each holding a fraction `ρ` of nonzero cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockedMatrixSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub delta: usize,
    pub theta: f64,
    pub rho: f64,
    pub seed: u64,
}

impl BlockedMatrixSpec {
    pub fn validate(&self) -> Result<()> {
        if self.delta == 0
            || !self.n_rows.is_multiple_of(self.delta)
            || !self.n_cols.is_multiple_of(self.delta)
        {
            return Err(Error::InvalidParameter(format!(
                "block size {} must be positive and divide {}x{}",
                self.delta, self.n_rows, self.n_cols
            )));
        }
        for (name, v) in [("theta", self.theta), ("rho", self.rho)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        (self.n_rows / self.delta) * (self.n_cols / self.delta)
    }

    /// `round(θ B)`.
    pub fn nonzero_blocks(&self) -> usize {
        (self.theta * self.n_blocks() as f64).round() as usize
    }

    /// `round(ρ Δ²)`.
    pub fn cells_per_block(&self) -> usize {
        (self.rho * (self.delta * self.delta) as f64).round() as usize
    }

    pub fn expected_nnz(&self) -> usize {
        self.nonzero_blocks() * self.cells_per_block()
    }
}

pub fn gen_blocked(spec: &BlockedMatrixSpec) -> Result<CsrMatrix> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let delta = spec.delta;
    let blocks_per_row = spec.n_cols / delta;
    let cells = delta * delta;
    let per_block = spec.cells_per_block();

    let mut triplets = Vec::with_capacity(spec.expected_nnz());
    for b in index::sample(&mut rng, spec.n_blocks(), spec.nonzero_blocks()) {
        let (bi, bj) = (b / blocks_per_row, b % blocks_per_row);
        for cell in index::sample(&mut rng, cells, per_block) {
            triplets.push((bi * delta + cell / delta, bj * delta + cell % delta, 1.0));
        }
    }
    CsrMatrix::from_triplets(spec.n_rows, spec.n_cols, &triplets)
}

/// Probabilities used for the synthetic graph experiments.
pub const RMAT_DEFAULT_PROBABILITIES: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

/// Recursive-matrix graph: each edge picks one of four quadrants per level
/// with probabilities `(a, b, c, d)` = (top-left, top-right, bottom-left,
/// bottom-right).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmatSpec {
    pub log2_nodes: u32,
    pub avg_degree: usize,
    #[serde(default = "default_probabilities")]
    pub probabilities: [f64; 4],
    pub seed: u64,
}

fn default_probabilities() -> [f64; 4] {
    RMAT_DEFAULT_PROBABILITIES
}

impl RmatSpec {
    pub fn validate(&self) -> Result<()> {
        if self.log2_nodes > 31 {
            return Err(Error::InvalidParameter(format!(
                "log2_nodes {} is too large",
                self.log2_nodes
            )));
        }
        let p = self.probabilities;
        if p.iter().any(|&x| x.is_nan() || x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "quadrant probabilities {p:?} must be non-negative and sum to 1"
            )));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        1usize << self.log2_nodes
    }

    pub fn n_edge_draws(&self) -> usize {
        self.n_nodes() * self.avg_degree
    }

    /// Raw `(row, col)` draws in generation order, duplicates included.
    pub fn sample_edges(&self) -> Result<Vec<(usize, usize)>> {
        self.validate()?;
        let mut rng = rng_from_seed(self.seed);
        let [a, b, c, _] = self.probabilities;
        let (ab, abc) = (a + b, a + b + c);
        let edges = (0..self.n_edge_draws())
            .map(|_| {
                let (mut row, mut col) = (0usize, 0usize);
                for _ in 0..self.log2_nodes {
                    let u: f64 = rng.gen();
                    let (rb, cb) = if u < a {
                        (0, 0)
                    } else if u < ab {
                        (0, 1)
                    } else if u < abc {
                        (1, 0)
                    } else {
                        (1, 1)
                    };
                    row = (row << 1) | rb;
                    col = (col << 1) | cb;
                }
                (row, col)
            })
            .collect();
        Ok(edges)
    }
}

/// Adjacency pattern of an RMAT graph; duplicate draws collapse to one entry.
pub fn gen_rmat(spec: &RmatSpec) -> Result<CsrMatrix> {
    let mut edges = spec.sample_edges()?;
    edges.sort_unstable();
    edges.dedup();
    let n = spec.n_nodes();
    Ok(CsrMatrix::from_sorted_entries(
        n,
        n,
        edges.into_iter().map(|(r, c)| (r, c, 1.0)),
    ))
}

/// Uniformly random row permutation. Returns the permuted matrix and the
/// permutation, where output row `i` is input row `perm[i]`.
pub fn scramble(a: &CsrMatrix, seed: u64) -> (CsrMatrix, Vec<usize>) {
    let mut perm: Vec<usize> = (0..a.n_rows()).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    let permuted = a.permute_rows(&perm).expect("shuffle yields a permutation");
    (permuted, perm)
}
