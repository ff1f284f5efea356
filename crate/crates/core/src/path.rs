//! Regularization paths: penalty grids, warm-started sweeps, and the
//! original-scale solution path.

use ndarray::{Array1, Array2, ArrayView1};

use crate::design::{GroupedDesign, Loss};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::linear::{self, SolverControls};
use crate::logistic::{self, sigmoid};
use crate::ortho::{orthonormalize, OrthonormalDesign, OrthoTransform};
use crate::penalty::{self, PenaltySpec};

/// Relative headroom added to the computed penalty ceiling so a fit at the
/// returned value is null even after rounding.
const LAMBDA_MAX_HEADROOM: f64 = 1e-12;

/// Controls for building and fitting a penalty path.
#[derive(Debug, Clone)]
pub struct PathControls<F: Float> {
    /// Number of grid points when the grid is built internally.
    pub n_lambda: usize,
    /// Ratio of the smallest to the largest penalty; `None` picks 0.001
    /// when `n > p` and 0.05 otherwise.
    pub min_ratio: Option<F>,
    /// Explicit grid override (strictly decreasing, positive). Used by
    /// cross-validation so every fold is fit at the same penalties.
    pub lambdas: Option<Vec<F>>,
    pub solver: SolverControls<F>,
    /// Initialize each fit from the previous solution. Disabling this
    /// restarts every penalty level from scratch.
    pub warm_starts: bool,
}

impl<F: Float> Default for PathControls<F> {
    fn default() -> Self {
        PathControls {
            n_lambda: 100,
            min_ratio: None,
            lambdas: None,
            solver: SolverControls::default(),
            warm_starts: true,
        }
    }
}

/// A fitted regularization path on the original coefficient scale.
#[derive(Debug, Clone)]
pub struct FitPath<F: Float> {
    /// Strictly decreasing penalty levels that were kept.
    pub lambdas: Vec<F>,
    pub intercepts: Vec<F>,
    /// One row per penalty level; columns in the caller's original order.
    pub coefficients: Array2<F>,
    /// Mean loss at each penalty level: `1/(2n)‖y−η‖²` or the mean
    /// negative log-likelihood.
    pub loss: Vec<F>,
    /// Number of groups with a nonzero coefficient norm.
    pub df_groups: Vec<usize>,
    /// Solver cycles spent at each penalty level.
    pub iters: Vec<usize>,
    pub converged: Vec<bool>,
    /// When the logistic path explained more than 99% of the null deviance,
    /// the number of entries kept; the saturated penalty and everything
    /// after it were dropped.
    pub saturated_at: Option<usize>,
    /// Column means subtracted before fitting, in original column order.
    pub column_means: Array1<F>,
    /// Group index of each column, original order.
    pub group_of: Vec<usize>,
    pub group_labels: Vec<String>,
    pub loss_kind: Loss,
    pub n_samples: usize,
}

impl<F: Float> FitPath<F> {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn coefficients_at(&self, index: usize) -> ArrayView1<'_, F> {
        self.coefficients.row(index)
    }

    /// Euclidean norm of one group's coefficients at one penalty level.
    pub fn group_norm(&self, index: usize, group: usize) -> F {
        let row = self.coefficients.row(index);
        let mut sq = F::zero();
        for (c, &g) in self.group_of.iter().enumerate() {
            if g == group {
                sq += row[c] * row[c];
            }
        }
        sq.sqrt()
    }

    /// Index of the penalty level closest to `lam` (absolute distance).
    pub fn nearest_index(&self, lam: F) -> usize {
        let mut best = 0;
        let mut best_dist = F::infinity();
        for (i, &l) in self.lambdas.iter().enumerate() {
            let d = (l - lam).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Linear predictor for new rows given in the caller's column order.
    pub fn linear_predictor_at(&self, index: usize, x: &Array2<F>) -> Result<Array1<F>> {
        if index >= self.len() {
            return Err(Error::Dimension(format!(
                "path index {index} out of bounds for {} penalty levels",
                self.len()
            )));
        }
        if x.ncols() != self.coefficients.ncols() {
            return Err(Error::Dimension(format!(
                "prediction rows have {} columns, path was fit with {}",
                x.ncols(),
                self.coefficients.ncols()
            )));
        }
        let centered = x - &self.column_means.view().insert_axis(ndarray::Axis(0));
        Ok(centered.dot(&self.coefficients.row(index)) + self.intercepts[index])
    }

    /// Predictions on the response scale: the linear predictor for the
    /// linear loss, fitted probabilities for the logistic loss.
    pub fn predict_response_at(&self, index: usize, x: &Array2<F>) -> Result<Array1<F>> {
        let eta = self.linear_predictor_at(index, x)?;
        Ok(match self.loss_kind {
            Loss::Linear => eta,
            Loss::Logistic => eta.mapv(sigmoid),
        })
    }
}

/// One solver solution in the unified shape the path assembler consumes.
struct Solution<F: Float> {
    beta0: F,
    beta: Array1<F>,
    /// `y − η` for the linear loss, `y − π` for the logistic loss.
    score_vec: Array1<F>,
    loss: F,
    deviance: Option<F>,
    iters: usize,
    converged: bool,
}

fn solve<F: Float>(
    ortho: &OrthonormalDesign<F>,
    lam: F,
    spec: &PenaltySpec<F>,
    warm: Option<(F, &Array1<F>)>,
    controls: &SolverControls<F>,
) -> Result<Solution<F>> {
    match ortho.loss() {
        Loss::Linear => {
            let fit = linear::fit_linear(ortho, lam, spec, warm.map(|(_, b)| b), controls)?;
            let n2 = F::cast(2.0) * F::from_count(ortho.n());
            let loss = fit.residuals.iter().map(|&r| r * r).sum::<F>() / n2;
            Ok(Solution {
                beta0: fit.beta0,
                beta: fit.beta,
                score_vec: fit.residuals,
                loss,
                deviance: None,
                iters: fit.iters,
                converged: fit.converged,
            })
        }
        Loss::Logistic => {
            let fit = logistic::fit_logistic(ortho, lam, spec, warm, controls)?;
            let state = fit.state;
            let loss = state.deviance / (F::cast(2.0) * F::from_count(ortho.n()));
            Ok(Solution {
                beta0: state.beta0,
                beta: state.beta,
                score_vec: ortho.y() - &state.pi,
                loss,
                deviance: Some(state.deviance),
                iters: fit.iters,
                converged: fit.converged,
            })
        }
    }
}

fn solve_base<F: Float>(
    ortho: &OrthonormalDesign<F>,
    spec: &PenaltySpec<F>,
    controls: &SolverControls<F>,
) -> Result<Solution<F>> {
    match ortho.loss() {
        Loss::Linear => {
            let fit = linear::fit_linear_base(ortho, spec, controls)?;
            let n2 = F::cast(2.0) * F::from_count(ortho.n());
            let loss = fit.residuals.iter().map(|&r| r * r).sum::<F>() / n2;
            Ok(Solution {
                beta0: fit.beta0,
                beta: fit.beta,
                score_vec: fit.residuals,
                loss,
                deviance: None,
                iters: fit.iters,
                converged: fit.converged,
            })
        }
        Loss::Logistic => {
            let fit = logistic::fit_logistic_base(ortho, spec, controls)?;
            let state = fit.state;
            let loss = state.deviance / (F::cast(2.0) * F::from_count(ortho.n()));
            Ok(Solution {
                beta0: state.beta0,
                beta: state.beta,
                score_vec: ortho.y() - &state.pi,
                loss,
                deviance: Some(state.deviance),
                iters: fit.iters,
                converged: fit.converged,
            })
        }
    }
}

/// Smallest penalty that keeps every penalized group at zero: the largest
/// `‖(1/n) X̃_jᵀ s‖ / m_j` over penalized groups, where `s` is the score
/// vector of the reference fit (the model with only unpenalized covariates;
/// intercept-only when every group is penalized). For the logistic loss this
/// equals `v‖z_j‖/m_j` with `z_j` the working coefficients at that fit.
pub fn lambda_max<F: Float>(ortho: &OrthonormalDesign<F>, spec: &PenaltySpec<F>) -> Result<F> {
    let base = solve_base(ortho, spec, &SolverControls::default())?;
    lambda_max_from(ortho, spec, &base)
}

fn lambda_max_from<F: Float>(
    ortho: &OrthonormalDesign<F>,
    spec: &PenaltySpec<F>,
    base: &Solution<F>,
) -> Result<F> {
    let multipliers = spec.resolved_multipliers(ortho.original_dims())?;
    if multipliers.iter().all(|&m| m == F::zero()) {
        return Err(Error::Config(
            "every group is unpenalized; there is no penalty path to fit".into(),
        ));
    }
    let n = F::from_count(ortho.n());
    let mut max = F::zero();
    for j in 0..ortho.n_groups() {
        if multipliers[j] == F::zero() {
            continue;
        }
        let z = ortho.block(j).t().dot(&base.score_vec) / n;
        let candidate = penalty::l2_norm(z.view()) / multipliers[j];
        if candidate > max {
            max = candidate;
        }
    }
    if !(max > F::zero()) {
        return Err(Error::Numerical(
            "degenerate penalty ceiling: every penalized group has zero score".into(),
        ));
    }
    Ok(max * (F::one() + F::cast(LAMBDA_MAX_HEADROOM)))
}

/// Log-spaced penalty grid from `lam_max` down to `lam_max * min_ratio`.
/// The first value is `lam_max` bitwise and the last is exactly
/// `lam_max * min_ratio`; `min_ratio` defaults to 0.001 when `n > p` and
/// 0.05 otherwise.
pub fn build_grid<F: Float>(
    lam_max: F,
    n: usize,
    p: usize,
    n_lambda: usize,
    min_ratio: Option<F>,
) -> Result<Vec<F>> {
    if !(lam_max > F::zero()) || !lam_max.is_finite() {
        return Err(Error::Config(format!(
            "grid requires a positive finite lambda_max, got {lam_max}"
        )));
    }
    if n_lambda < 2 {
        return Err(Error::Config(format!(
            "grid needs at least 2 penalty levels, got {n_lambda}"
        )));
    }
    let ratio = match min_ratio {
        Some(r) => {
            if !(r > F::zero() && r < F::one()) {
                return Err(Error::Config(format!(
                    "min_ratio must lie in (0, 1), got {r}"
                )));
            }
            r
        }
        None => {
            if n > p {
                F::cast(0.001)
            } else {
                F::cast(0.05)
            }
        }
    };
    let last = F::from_count(n_lambda - 1);
    let grid = (0..n_lambda)
        .map(|i| {
            if i == 0 {
                lam_max
            } else if i == n_lambda - 1 {
                lam_max * ratio
            } else {
                lam_max * ratio.powf(F::from_count(i) / last)
            }
        })
        .collect();
    Ok(grid)
}

fn validate_supplied_grid<F: Float>(lambdas: &[F]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Config("supplied penalty grid is empty".into()));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !l.is_finite() || l < F::zero() {
            return Err(Error::Config(format!(
                "supplied penalty grid has invalid value {l} at index {i}"
            )));
        }
    }
    for w in lambdas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config(
                "supplied penalty grid must be strictly decreasing".into(),
            ));
        }
    }
    Ok(())
}

fn with_lambda_context<F: Float>(err: Error, index: usize, lam: F) -> Error {
    let attach = |msg: String| format!("{msg} (path index {index}, lambda {lam})");
    match err {
        Error::Config(m) => Error::Config(attach(m)),
        Error::Dimension(m) => Error::Dimension(attach(m)),
        Error::Data(m) => Error::Data(attach(m)),
        Error::Numerical(m) => Error::Numerical(attach(m)),
    }
}

/// Fits the full regularization path: orthonormalizes once, sweeps the grid
/// from the largest penalty down with warm starts, and returns solutions on
/// the original scale. When the grid is built internally its first entry is
/// the reference fit itself, so the path starts at an exactly null model.
pub fn fit_path<F: Float>(
    design: &GroupedDesign<F>,
    spec: &PenaltySpec<F>,
    controls: &PathControls<F>,
) -> Result<FitPath<F>> {
    if design.loss() != spec.loss {
        return Err(Error::Config(format!(
            "penalty spec is for the {} loss but the design holds a {} response",
            spec.loss.label(),
            design.loss().label()
        )));
    }
    let (ortho, transform) = orthonormalize(design)?;
    fit_path_on(design, &ortho, &transform, spec, controls)
}

fn fit_path_on<F: Float>(
    design: &GroupedDesign<F>,
    ortho: &OrthonormalDesign<F>,
    transform: &OrthoTransform<F>,
    spec: &PenaltySpec<F>,
    controls: &PathControls<F>,
) -> Result<FitPath<F>> {
    let base = solve_base(ortho, spec, &controls.solver)?;
    let (grid, self_built) = match &controls.lambdas {
        Some(lambdas) => {
            validate_supplied_grid(lambdas)?;
            (lambdas.clone(), false)
        }
        None => {
            let lam_max = lambda_max_from(ortho, spec, &base)?;
            let grid = build_grid(
                lam_max,
                design.n(),
                design.p(),
                controls.n_lambda,
                controls.min_ratio,
            )?;
            (grid, true)
        }
    };

    let null_dev = match design.loss() {
        Loss::Logistic => logistic::null_deviance(design.y()),
        Loss::Linear => F::zero(),
    };

    let mut lambdas = Vec::with_capacity(grid.len());
    let mut intercepts = Vec::with_capacity(grid.len());
    let mut rows: Vec<Array1<F>> = Vec::with_capacity(grid.len());
    let mut loss = Vec::with_capacity(grid.len());
    let mut df_groups = Vec::with_capacity(grid.len());
    let mut iters = Vec::with_capacity(grid.len());
    let mut converged = Vec::with_capacity(grid.len());
    let mut saturated_at = None;
    let mut previous: Option<(F, Array1<F>)> = Some((base.beta0, base.beta.clone()));

    for (i, &lam) in grid.iter().enumerate() {
        let solution = if self_built && i == 0 {
            solve_base(ortho, spec, &controls.solver)
                .map_err(|e| with_lambda_context(e, i, lam))?
        } else {
            let warm = if controls.warm_starts {
                previous.as_ref().map(|(b0, b)| (*b0, b))
            } else {
                None
            };
            solve(ortho, lam, spec, warm, &controls.solver)
                .map_err(|e| with_lambda_context(e, i, lam))?
        };
        if !solution.converged {
            log::warn!(
                "fit at path index {i} (lambda {lam}) stopped at max_iter without converging"
            );
        }
        if let Some(dev) = solution.deviance {
            if F::one() - dev / null_dev > F::cast(0.99) {
                saturated_at = Some(i);
                log::info!(
                    "path saturated at index {i} (lambda {lam}): deviance {dev} against null {null_dev}"
                );
                break;
            }
        }
        let df = (0..ortho.n_groups())
            .filter(|&j| {
                solution
                    .beta
                    .slice(ndarray::s![ortho.tilde_range(j)])
                    .iter()
                    .any(|&b| b != F::zero())
            })
            .count();
        lambdas.push(lam);
        intercepts.push(solution.beta0);
        rows.push(transform.back_transform(&solution.beta));
        loss.push(solution.loss);
        df_groups.push(df);
        iters.push(solution.iters);
        converged.push(solution.converged);
        previous = Some((solution.beta0, solution.beta));
    }

    let p = design.p();
    let mut coefficients = Array2::zeros((rows.len(), p));
    for (i, row) in rows.into_iter().enumerate() {
        coefficients.row_mut(i).assign(&row);
    }
    Ok(FitPath {
        lambdas,
        intercepts,
        coefficients,
        loss,
        df_groups,
        iters,
        converged,
        saturated_at,
        column_means: transform.column_means().clone(),
        group_of: design.group_of_original(),
        group_labels: design.group_labels().to_vec(),
        loss_kind: design.loss(),
        n_samples: design.n(),
    })
}

/// Fits a path reusing an existing orthonormalization. The design must be
/// the one the orthonormalization was built from.
pub fn fit_path_orthonormalized<F: Float>(
    design: &GroupedDesign<F>,
    ortho: &OrthonormalDesign<F>,
    transform: &OrthoTransform<F>,
    spec: &PenaltySpec<F>,
    controls: &PathControls<F>,
) -> Result<FitPath<F>> {
    if design.loss() != spec.loss || ortho.loss() != spec.loss {
        return Err(Error::Config(format!(
            "penalty spec is for the {} loss but the design holds a {} response",
            spec.loss.label(),
            design.loss().label()
        )));
    }
    fit_path_on(design, ortho, transform, spec, controls)
}
