//! Symbolic-numeric tensor calculus for Lorentzian quasi-Einstein geometry.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: scalar expressions in chart coordinates (parse, differentiate,
//!   evaluate).
//! * [`geometry`]: charts, metrics, tensor fields, curvature and covariant
//!   derivatives.
//! * [`qe`]: residuals of `ρ + Hes_f − μ df⊗df = λ g` and its trace and
//!   divergence identities.
//! * [`ppwave`], [`warped`]: constructive families and their closed forms.
//! * [`ode`]: the potential ODEs of the null-gradient branch.
//! * [`classify`]: the decision pipeline over all of the above.
//!
//! Identities are certified numerically: tensors are built symbolically and
//! evaluated at deterministic sample points.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod geometry;
mod linalg;
pub mod ode;
pub mod ppwave;
pub mod qe;
pub mod warped;

pub use classify::{classify, Branch, ClassificationReport, Thresholds};
pub use error::{Error, ExprError, Result};
pub use expr::{parse, parse_with, EvalPoint, Expr, SymbolTable};
pub use geometry::{CoordinateChart, MetricField, SamplePlan, TensorField};
pub use ode::OdeSolution;
pub use ppwave::PpWaveSpec;
pub use qe::{PotentialData, QeReport};
pub use warped::WarpedSpec;
