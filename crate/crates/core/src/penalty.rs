//! Penalty families, thresholding operators, and objective evaluation.
//!
//! The scalar operators act on the norm of a group; [`mv_threshold`] lifts
//! them to vectors by rescaling along the input direction. All thresholding
//! here takes the penalty level `lam` already multiplied by the group's
//! multiplier, so callers resolve `lam * m_j` first.

use ndarray::{Array1, ArrayView1};

use crate::design::Loss;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::ortho::OrthonormalDesign;

/// Penalty family applied to group norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyFamily {
    GroupLasso,
    GroupMcp,
    GroupScad,
}

impl PenaltyFamily {
    /// Conventional default for the concavity parameter: 3 for MCP, 4 for
    /// SCAD. Unused by the group lasso.
    pub fn default_gamma<F: Float>(self) -> F {
        match self {
            PenaltyFamily::GroupLasso => F::zero(),
            PenaltyFamily::GroupMcp => F::cast(3.0),
            PenaltyFamily::GroupScad => F::cast(4.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PenaltyFamily::GroupLasso => "grlasso",
            PenaltyFamily::GroupMcp => "grmcp",
            PenaltyFamily::GroupScad => "grscad",
        }
    }
}

/// Full description of the penalty applied to a grouped fit.
///
/// `multipliers` rescales the penalty level per group: group `j` is
/// thresholded at `lam * multipliers[j]`. `None` defers to the default rule
/// (square root of the original group dimension). A multiplier of zero marks
/// the group unpenalized. The concavity parameter `gamma` is never rescaled
/// per group.
#[derive(Debug, Clone)]
pub struct PenaltySpec<F: Float> {
    pub family: PenaltyFamily,
    pub gamma: F,
    pub multipliers: Option<Vec<F>>,
    pub loss: Loss,
}

impl<F: Float> PenaltySpec<F> {
    /// Builds a spec with the family's default `gamma` and default
    /// multipliers.
    pub fn new(family: PenaltyFamily, loss: Loss) -> Self {
        let spec = PenaltySpec {
            family,
            gamma: family.default_gamma(),
            multipliers: None,
            loss,
        };
        spec.warn_on_small_gamma();
        spec
    }

    /// Under the logistic loss the group update is only guaranteed convex
    /// for `gamma > 1/v = 4` (MCP) or `gamma > 1 + 1/v = 5` (SCAD). Smaller
    /// values are common in practice, so they warn instead of failing.
    fn warn_on_small_gamma(&self) {
        if self.loss != Loss::Logistic {
            return;
        }
        let bound = match self.family {
            PenaltyFamily::GroupLasso => return,
            PenaltyFamily::GroupMcp => F::cast(4.0),
            PenaltyFamily::GroupScad => F::cast(5.0),
        };
        if self.gamma <= bound {
            log::warn!(
                "gamma = {} is at or below {bound} for {} with the logistic loss; \
                 the group update may be non-convex",
                self.gamma,
                self.family.label()
            );
        }
    }

    /// Replaces `gamma`, enforcing the convexity bounds of the group-update
    /// subproblem: `gamma > 1` for MCP and `gamma > 2` for SCAD.
    pub fn with_gamma(mut self, gamma: F) -> Result<Self> {
        match self.family {
            PenaltyFamily::GroupLasso => {}
            PenaltyFamily::GroupMcp => {
                if !(gamma > F::one()) {
                    return Err(Error::Config(format!(
                        "gamma must exceed 1 for group MCP, got {gamma}"
                    )));
                }
            }
            PenaltyFamily::GroupScad => {
                if !(gamma > F::cast(2.0)) {
                    return Err(Error::Config(format!(
                        "gamma must exceed 2 for group SCAD, got {gamma}"
                    )));
                }
            }
        }
        self.gamma = gamma;
        self.warn_on_small_gamma();
        Ok(self)
    }

    /// Replaces the per-group multipliers. Zero marks a group unpenalized.
    pub fn with_multipliers(mut self, multipliers: Vec<F>) -> Result<Self> {
        for (j, &m) in multipliers.iter().enumerate() {
            if !m.is_finite() || m < F::zero() {
                return Err(Error::Config(format!(
                    "multiplier for group {j} must be finite and non-negative, got {m}"
                )));
            }
        }
        self.multipliers = Some(multipliers);
        Ok(self)
    }

    /// Resolves the multipliers against a design with the given original
    /// group dimensions; defaults to `sqrt(K_j)`.
    pub fn resolved_multipliers(&self, original_dims: &[usize]) -> Result<Vec<F>> {
        match &self.multipliers {
            Some(m) => {
                if m.len() != original_dims.len() {
                    return Err(Error::Dimension(format!(
                        "{} multipliers supplied for {} groups",
                        m.len(),
                        original_dims.len()
                    )));
                }
                Ok(m.clone())
            }
            None => Ok(original_dims
                .iter()
                .map(|&k| F::from_count(k).sqrt())
                .collect()),
        }
    }
}

/// Soft-thresholding operator `sign(z) * max(|z| - lam, 0)`.
pub fn soft_threshold<F: Float>(z: F, lam: F) -> F {
    let shrunk = z.abs() - lam;
    if shrunk > F::zero() {
        z.signum() * shrunk
    } else {
        F::zero()
    }
}

/// Firm-thresholding operator, the univariate MCP solution. Requires
/// `gamma > 1`; interpolates between soft thresholding (`gamma` large) and
/// hard thresholding (`gamma` near 1).
pub fn firm_mcp<F: Float>(z: F, lam: F, gamma: F) -> F {
    assert!(gamma > F::one(), "firm_mcp requires gamma > 1");
    if z.abs() <= gamma * lam {
        soft_threshold(z, lam) / (F::one() - F::one() / gamma)
    } else {
        z
    }
}

/// Univariate SCAD solution. Requires `gamma > 2`.
pub fn firm_scad<F: Float>(z: F, lam: F, gamma: F) -> F {
    assert!(gamma > F::cast(2.0), "firm_scad requires gamma > 2");
    let az = z.abs();
    if az <= F::cast(2.0) * lam {
        soft_threshold(z, lam)
    } else if az <= gamma * lam {
        let shifted = gamma * lam / (gamma - F::one());
        soft_threshold(z, shifted) / (F::one() - F::one() / (gamma - F::one()))
    } else {
        z
    }
}

fn scalar_op<F: Float>(znorm: F, lam: F, spec: &PenaltySpec<F>) -> F {
    match spec.family {
        PenaltyFamily::GroupLasso => soft_threshold(znorm, lam),
        PenaltyFamily::GroupMcp => firm_mcp(znorm, lam, spec.gamma),
        PenaltyFamily::GroupScad => firm_scad(znorm, lam, spec.gamma),
    }
}

/// Multivariate thresholding: applies the family's scalar operator to
/// `‖z‖` and rescales `z` to that length, so the output is exactly
/// collinear with `z`. The zero vector maps to itself.
pub fn mv_threshold<F: Float>(z: ArrayView1<'_, F>, lam: F, spec: &PenaltySpec<F>) -> Array1<F> {
    let norm = l2_norm(z);
    if norm == F::zero() {
        return Array1::zeros(z.len());
    }
    let len = scalar_op(norm, lam, spec);
    if len == F::zero() {
        return Array1::zeros(z.len());
    }
    let scale = len / norm;
    z.to_owned() * scale
}

/// Penalty evaluated at a group norm, with penalty level `lam` (already
/// including the group multiplier).
pub fn penalty_value<F: Float>(norm: F, lam: F, spec: &PenaltySpec<F>) -> F {
    let two = F::cast(2.0);
    match spec.family {
        PenaltyFamily::GroupLasso => lam * norm,
        PenaltyFamily::GroupMcp => {
            let gamma = spec.gamma;
            if norm <= gamma * lam {
                lam * norm - norm * norm / (two * gamma)
            } else {
                gamma * lam * lam / two
            }
        }
        PenaltyFamily::GroupScad => {
            let gamma = spec.gamma;
            if norm <= lam {
                lam * norm
            } else if norm <= gamma * lam {
                (gamma * lam * norm - (norm * norm + lam * lam) / two) / (gamma - F::one())
            } else {
                lam * lam * (gamma * gamma - F::one()) / (two * (gamma - F::one()))
            }
        }
    }
}

/// Derivative of the penalty with respect to the group norm, for norm > 0.
/// At 0 the value is the right derivative `lam`.
pub fn penalty_derivative<F: Float>(norm: F, lam: F, spec: &PenaltySpec<F>) -> F {
    match spec.family {
        PenaltyFamily::GroupLasso => lam,
        PenaltyFamily::GroupMcp => {
            let gamma = spec.gamma;
            if norm <= gamma * lam {
                lam - norm / gamma
            } else {
                F::zero()
            }
        }
        PenaltyFamily::GroupScad => {
            let gamma = spec.gamma;
            if norm <= lam {
                lam
            } else if norm <= gamma * lam {
                (gamma * lam - norm) / (gamma - F::one())
            } else {
                F::zero()
            }
        }
    }
}

/// Penalized objective split into its parts.
#[derive(Debug, Clone, Copy)]
pub struct Objective<F: Float> {
    pub value: F,
    pub loss_part: F,
    pub penalty_part: F,
}

/// Evaluates the penalized objective on the orthonormalized scale:
/// squared-error loss `1/(2n)‖y − η‖²` for the linear family or the mean
/// negative log-likelihood for the logistic family, plus
/// `Σ_j p(‖β_j‖, lam·m_j)`.
pub fn objective<F: Float>(
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
    let eta = design.linear_predictor(beta0, beta);
    let n = F::from_count(design.n());
    let loss_part = match spec.loss {
        Loss::Linear => {
            let mut sse = F::zero();
            for (yi, ei) in design.y().iter().zip(eta.iter()) {
                let r = *yi - *ei;
                sse += r * r;
            }
            sse / (F::cast(2.0) * n)
        }
        Loss::Logistic => {
            let mut nll = F::zero();
            for (yi, ei) in design.y().iter().zip(eta.iter()) {
                nll += log1p_exp(*ei) - *yi * *ei;
            }
            nll / n
        }
    };
    let mut penalty_part = F::zero();
    for j in 0..design.n_groups() {
        let norm = l2_norm(beta.slice(ndarray::s![design.tilde_range(j)]));
        penalty_part += penalty_value(norm, lam * multipliers[j], spec);
    }
    Ok(Objective {
        value: loss_part + penalty_part,
        loss_part,
        penalty_part,
    })
}

/// Numerically stable `ln(1 + exp(x))`.
pub(crate) fn log1p_exp<F: Float>(x: F) -> F {
    if x > F::zero() {
        x + x.neg().exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn l2_norm<F: Float>(v: ArrayView1<'_, F>) -> F {
    v.iter().map(|&x| x * x).sum::<F>().sqrt()
}
