//! Finite truncations of graded (pre-Fréchet) spaces.

mod diagnostics;
mod gauge;
mod metric;
mod phi;
mod seminorm;
mod trig;

pub use diagnostics::{log_grid, RayPoint, ScalarBound, StrictnessReport, SCALAR_BOUND_TOL};
pub use gauge::{BoundKind, GaugeOptions, GaugeValue, EXACT_REL_TOL};
pub use metric::{
    FrechetMetric, GradedVector, GradingConfig, MetricMode, ModelId, RAY_BISECTION_CAP, RAY_BISECTION_TOL,
};
pub use phi::Phi;
pub use seminorm::{Seminorm, SeminormFamily};
pub use trig::TrigBasis;
