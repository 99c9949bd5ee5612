//! Blocking-quality measurement.

mod curve;
mod density;
mod stats;

pub use curve::{
    blocking_curve, curve_select, default_taus, normalize_taus, Algorithm, BlockingCurve,
    CurveMeta, CurvePoint, CurveTarget, SweepConfig,
};
pub use density::{verify_density_bound, DensityReport, GroupDensity};
pub use stats::{blocking_stats, BlockingStats};
