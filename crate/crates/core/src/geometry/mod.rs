//! Coordinate tensor calculus on a pseudo-Riemannian chart.

mod chart;
pub mod curvature;
mod metric;
pub mod oracle;
mod sample;
mod tensor;

pub use chart::CoordinateChart;
pub use curvature::{
    christoffel, codazzi_defect, coordinate_sectional_curvature, covariant_derivative, differential, divergence,
    grad_norm_sq, gradient, hessian, is_locally_conformally_flat, laplacian, lcf_at, raise, ricci,
    ricci_part_of_curvature, riemann, riemann_operator, scalar_curvature, schouten, trace, weyl, LcfCriterion,
    LcfVerdict,
};
pub use metric::MetricField;
pub use oracle::{fd_curvature, oracle_deviation, FdCurvature, OracleDeviation, ORACLE_STEP};
pub use sample::{SamplePlan, DEFAULT_INTERVAL, DEFAULT_POINT_COUNT, DEFAULT_SEED, DEFAULT_TOLERANCE, MAX_REJECTIONS};
pub use tensor::{TensorField, Variance};
