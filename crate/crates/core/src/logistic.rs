//! Group descent for the penalized logistic model.
//!
//! The logistic loss is majorized by a quadratic with fixed curvature
//! `v = 1/4`, the largest possible value of `π(1−π)`. Each cycle minimizes
//! that majorizer over the intercept and then over every group in turn; a
//! group update is a single thresholding step on the curvature-scaled
//! working coefficients. The update therefore descends the logistic loss
//! plus the penalty evaluated on the scaled norms `v‖β_j‖` (see
//! [`mm_objective`]), which coincides with the plain penalized objective for
//! the group lasso.

use ndarray::Array1;

use crate::design::Loss;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::linear::{SolverControls, RESYNC_EVERY};
use crate::ortho::OrthonormalDesign;
use crate::penalty::{self, mv_threshold, Objective, PenaltySpec};

/// Curvature bound of the logistic majorizer.
pub fn curvature<F: Float>() -> F {
    F::cast(0.25)
}

/// Numerically stable logistic function.
pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        let e = (-x).exp();
        (F::one() + e).recip()
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

fn logit<F: Float>(p: F) -> F {
    (p / (F::one() - p)).ln()
}

/// Binomial deviance `−2 Σ [y log π + (1−y) log(1−π)]`, with probabilities
/// clamped to `[1e-10, 1−1e-10]` so saturated fits stay finite. The clamp is
/// applied only here, never inside the solver updates.
pub fn binomial_deviance<F: Float>(y: &Array1<F>, pi: &Array1<F>) -> F {
    let lo = F::cast(1e-10);
    let hi = F::one() - lo;
    let mut dev = F::zero();
    for (&yi, &pii) in y.iter().zip(pi.iter()) {
        let p = pii.max(lo).min(hi);
        dev -= F::cast(2.0) * (yi * p.ln() + (F::one() - yi) * (F::one() - p).ln());
    }
    dev
}

/// Deviance of the intercept-only model, fitted probability `ȳ`.
pub fn null_deviance<F: Float>(y: &Array1<F>) -> F {
    let mean = y.sum() / F::from_count(y.len());
    let pi = Array1::from_elem(y.len(), mean);
    binomial_deviance(y, &pi)
}

/// Solver state for the logistic model, kept mutually consistent: `π` is
/// the stable logistic transform of `η`, the pseudo-residuals are
/// `(y − π)/v`, and `deviance` matches `π`.
#[derive(Debug, Clone)]
pub struct MMState<F: Float> {
    pub beta0: F,
    /// Coefficients on the orthonormalized scale.
    pub beta: Array1<F>,
    pub eta: Array1<F>,
    pub pi: Array1<F>,
    /// Working residuals `(y − π)/v`.
    pub pseudo_residuals: Array1<F>,
    /// Curvature bound, exactly 1/4.
    pub v: F,
    pub deviance: F,
}

impl<F: Float> MMState<F> {
    /// Builds a consistent state from an intercept and coefficient vector.
    pub fn new(design: &OrthonormalDesign<F>, beta0: F, beta: Array1<F>) -> Result<Self> {
        if beta.len() != design.p_tilde() {
            return Err(Error::Dimension(format!(
                "coefficient vector has length {}, design has {} orthonormalized columns",
                beta.len(),
                design.p_tilde()
            )));
        }
        let eta = design.linear_predictor(beta0, &beta);
        let mut state = MMState {
            beta0,
            beta,
            eta,
            pi: Array1::zeros(design.n()),
            pseudo_residuals: Array1::zeros(design.n()),
            v: curvature(),
            deviance: F::zero(),
        };
        state.refresh(design);
        Ok(state)
    }

    /// Recomputes `π`, the pseudo-residuals, and the deviance from `η`.
    fn refresh(&mut self, design: &OrthonormalDesign<F>) {
        self.pi = self.eta.mapv(sigmoid);
        self.pseudo_residuals = (design.y() - &self.pi) / self.v;
        self.deviance = binomial_deviance(design.y(), &self.pi);
    }

    fn resync(&mut self, design: &OrthonormalDesign<F>) {
        self.eta = design.linear_predictor(self.beta0, &self.beta);
        self.refresh(design);
    }
}

/// Result of a penalized logistic fit.
#[derive(Debug, Clone)]
pub struct LogisticFit<F: Float> {
    pub state: MMState<F>,
    /// Full cycles used.
    pub iters: usize,
    pub converged: bool,
    /// Majorized objective ([`mm_objective`]) after each cycle, when
    /// requested.
    pub objective_trace: Option<Vec<F>>,
}

/// Runs one full majorize-minimize cycle: intercept update, then one
/// thresholding update per group, then a refresh of `π` and the
/// pseudo-residuals from the new linear predictor. Returns the largest
/// absolute coefficient change.
pub fn mm_cycle<F: Float>(
    state: &mut MMState<F>,
    design: &OrthonormalDesign<F>,
    lam: F,
    spec: &PenaltySpec<F>,
) -> Result<F> {
    let multipliers = spec.resolved_multipliers(design.original_dims())?;
    let active = vec![true; design.n_groups()];
    Ok(cycle_with(state, design, lam, spec, &multipliers, &active))
}

fn cycle_with<F: Float>(
    state: &mut MMState<F>,
    design: &OrthonormalDesign<F>,
    lam: F,
    spec: &PenaltySpec<F>,
    multipliers: &[F],
    active: &[bool],
) -> F {
    let n = F::from_count(design.n());
    let v = state.v;
    // Working response of the majorizer built at the current state. The
    // sweep keeps pseudo_residuals equal to ytilde minus the implicit
    // linear predictor, so eta is recovered in O(n) at the end.
    let ytilde = &state.eta + &state.pseudo_residuals;

    let delta0 = state.pseudo_residuals.sum() / n;
    state.beta0 += delta0;
    state.pseudo_residuals.mapv_inplace(|r| r - delta0);
    let mut max_delta = delta0.abs();

    for j in 0..design.n_groups() {
        if !active[j] {
            continue;
        }
        let block = design.block(j);
        let range = design.tilde_range(j);
        let z = block.t().dot(&state.pseudo_residuals) / n
            + &state.beta.slice(ndarray::s![range.clone()]);
        let scaled = &z * v;
        let updated = mv_threshold(scaled.view(), lam * multipliers[j], spec) / v;
        let mut changed = false;
        for (idx, tilde) in range.clone().enumerate() {
            let delta = updated[idx] - state.beta[tilde];
            if delta != F::zero() {
                changed = true;
            }
            if delta.abs() > max_delta {
                max_delta = delta.abs();
            }
        }
        if changed {
            let old = state.beta.slice(ndarray::s![range.clone()]).to_owned();
            let delta = &updated - &old;
            state.pseudo_residuals -= &block.dot(&delta);
            state.beta.slice_mut(ndarray::s![range]).assign(&updated);
        }
    }

    state.eta = ytilde - &state.pseudo_residuals;
    state.refresh(design);
    max_delta
}

/// Fits the penalized logistic model at one penalty level. A warm start
/// supplies the intercept and coefficients; otherwise the fit starts from
/// the intercept-only model.
pub fn fit_logistic<F: Float>(
    design: &OrthonormalDesign<F>,
    lam: F,
    spec: &PenaltySpec<F>,
    warm: Option<(F, &Array1<F>)>,
    controls: &SolverControls<F>,
) -> Result<LogisticFit<F>> {
    check_logistic(design, spec)?;
    if !(lam >= F::zero()) {
        return Err(Error::Config(format!(
            "penalty level must be non-negative, got {lam}"
        )));
    }
    let multipliers = spec.resolved_multipliers(design.original_dims())?;
    let active = vec![true; design.n_groups()];
    run_mm(design, lam, spec, &multipliers, &active, warm, controls)
}

/// Fits only the unpenalized groups plus the intercept, pinning penalized
/// groups at zero.
pub(crate) fn fit_logistic_base<F: Float>(
    design: &OrthonormalDesign<F>,
    spec: &PenaltySpec<F>,
    controls: &SolverControls<F>,
) -> Result<LogisticFit<F>> {
    check_logistic(design, spec)?;
    let multipliers = spec.resolved_multipliers(design.original_dims())?;
    let active: Vec<bool> = multipliers.iter().map(|&m| m == F::zero()).collect();
    run_mm(design, F::zero(), spec, &multipliers, &active, None, controls)
}

fn check_logistic<F: Float>(design: &OrthonormalDesign<F>, spec: &PenaltySpec<F>) -> Result<()> {
    if design.loss() != Loss::Logistic || spec.loss != Loss::Logistic {
        return Err(Error::Config(
            "logistic solver called with a non-logistic design or penalty spec".into(),
        ));
    }
    Ok(())
}

fn run_mm<F: Float>(
    design: &OrthonormalDesign<F>,
    lam: F,
    spec: &PenaltySpec<F>,
    multipliers: &[F],
    active: &[bool],
    warm: Option<(F, &Array1<F>)>,
    controls: &SolverControls<F>,
) -> Result<LogisticFit<F>> {
    let mut state = match warm {
        Some((beta0, beta)) => MMState::new(design, beta0, beta.clone())?,
        None => MMState::new(
            design,
            logit(design.y_mean()),
            Array1::zeros(design.p_tilde()),
        )?,
    };
    let mut trace = if controls.record_objective {
        let start = mm_objective(design, state.beta0, &state.beta, lam, spec)?.value;
        Some(vec![start])
    } else {
        None
    };

    let mut iters = 0;
    let mut converged = false;
    while iters < controls.max_iter {
        let max_delta = cycle_with(&mut state, design, lam, spec, multipliers, active);
        iters += 1;
        if !max_delta.is_finite() {
            return Err(Error::Numerical(
                "non-finite coefficient update in logistic group descent".into(),
            ));
        }
        if iters % RESYNC_EVERY == 0 {
            state.resync(design);
        }
        if let Some(trace) = trace.as_mut() {
            trace.push(mm_objective(design, state.beta0, &state.beta, lam, spec)?.value);
        }
        if max_delta < controls.tol {
            converged = true;
            break;
        }
    }

    Ok(LogisticFit {
        state,
        iters,
        converged,
        objective_trace: trace,
    })
}

/// The objective the logistic cycles descend: mean negative log-likelihood
/// plus `Σ_j (1/v) p(v‖β_j‖, λ m_j)`. Identical to the plain penalized
/// objective for the group lasso; for the concave families the curvature
/// scaling is what the fixed-curvature majorizer actually minimizes.
pub fn mm_objective<F: Float>(
    design: &OrthonormalDesign<F>,
    beta0: F,
    beta: &Array1<F>,
    lam: F,
    spec: &PenaltySpec<F>,
) -> Result<Objective<F>> {
    if beta.len() != design.p_tilde() {
        return Err(Error::Dimension(format!(
            "coefficient vector has length {}, design has {} orthonormalized columns",
            beta.len(),
            design.p_tilde()
        )));
    }
    let multipliers = spec.resolved_multipliers(design.original_dims())?;
    let v = curvature::<F>();
    let eta = design.linear_predictor(beta0, beta);
    let n = F::from_count(design.n());
    let mut nll = F::zero();
    for (yi, ei) in design.y().iter().zip(eta.iter()) {
        nll += penalty::log1p_exp(*ei) - *yi * *ei;
    }
    let loss_part = nll / n;
    let mut penalty_part = F::zero();
    for j in 0..design.n_groups() {
        let norm = penalty::l2_norm(beta.slice(ndarray::s![design.tilde_range(j)]));
        penalty_part += penalty::penalty_value(v * norm, lam * multipliers[j], spec) / v;
    }
    Ok(Objective {
        value: loss_part + penalty_part,
        loss_part,
        penalty_part,
    })
}

/// Whether a fit explains more than 99% of the null deviance, the signal to
/// stop extending the path toward smaller penalties.
pub fn check_saturation<F: Float>(state: &MMState<F>, null_deviance: F) -> bool {
    F::one() - state.deviance / null_deviance > F::cast(0.99)
}
