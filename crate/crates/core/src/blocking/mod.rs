//! Row grouping against a fixed column partition.

mod pathological;
mod quotient;
mod sa;
mod similarity;

pub use pathological::{fourth_root_floor, pathological_matrix};
pub use quotient::{compress_rows, quotient_hash, quotient_row, quotient_rows, QuotientRow};
pub use sa::{
    block_1sa, block_naive_sa, group_quotient_rows, merge_condition, GroupState, MergePolicy,
};
pub use similarity::{intersection_len, similarity, union, Similarity};

pub(crate) use similarity::cmp_ratio;
