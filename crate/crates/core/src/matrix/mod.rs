//! Matrix representations shared by every other module: CSR input, dense
//! operands, the column partition, row groupings and VBR storage.

mod csr;
mod dense;
mod grouping;
mod mtx;
mod partition;
mod vbr;

pub use csr::{check_permutation, invert_permutation, CsrMatrix};
pub use dense::DenseMatrix;
pub use grouping::{RowGroup, RowGrouping};
pub use mtx::{
    parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to,
};
pub use partition::ColumnPartition;
pub use vbr::{DescriptorBlock, VbrBlock, VbrDescriptor, VbrMatrix};
