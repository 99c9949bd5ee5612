//! Reference multiplication kernels and the tensor-unit cost model.

mod spmm;
mod tcu;

pub use spmm::{spmm_csr, spmm_vbr};
pub use tcu::{tcu_cost, tcu_cost_tall_groups, FilteredTcuCost, TcuCost, TcuModel};
