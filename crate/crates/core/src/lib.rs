//! Group-penalized regression by group descent.
//!
//! Fits linear and logistic models with the group lasso, group MCP, and
//! group SCAD penalties. Each group of the design is orthonormalized so the
//! block update has a closed form, which makes full regularization paths
//! cheap to compute with warm starts. Cross-validation and data generators
//! for benchmark scenarios are included.
//!
//! Everything is generic over the scalar type through the [`float::Float`]
//! trait (`f32` or `f64`); the aliases at the crate root pin the common
//! double-precision case.

pub mod cv;
pub mod design;
pub mod error;
pub mod float;
pub mod linear;
pub mod logistic;
#[doc(hidden)]
pub mod oracle;
pub mod ortho;
pub mod path;
pub mod penalty;
pub mod sim;

pub use cv::{cross_validate, CVResult, Metric};
pub use design::{GroupedDesign, Loss};
pub use error::{Error, Result};
pub use linear::{fit_linear, stationarity_gap, LinearFit, SolverControls};
pub use logistic::{fit_logistic, LogisticFit, MMState};
pub use ortho::{orthonormalize, orthonormalize_with, OrthonormalDesign, OrthoTransform};
pub use path::{build_grid, fit_path, lambda_max, FitPath, PathControls};
pub use penalty::{mv_threshold, PenaltyFamily, PenaltySpec};
pub use sim::{generate, run_study, score, Scenario, ScenarioKind, Score, StudyResult, Truth};

/// Double-precision grouped design.
pub type GroupedDesignF64 = GroupedDesign<f64>;
/// Double-precision fitted path.
pub type FitPathF64 = FitPath<f64>;
/// Double-precision path controls.
pub type PathControlsF64 = PathControls<f64>;
/// Double-precision penalty specification.
pub type PenaltySpecF64 = PenaltySpec<f64>;
/// Double-precision cross-validation result.
pub type CVResultF64 = CVResult<f64>;
