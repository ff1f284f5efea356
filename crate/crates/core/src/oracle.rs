//! Reference implementations for certifying the solvers on small
//! instances: a from-scratch objective evaluation and a derivative-free
//! multi-start minimizer. Correctness over speed throughout; both are
//! guarded to small dimensions and kept off the documented surface.

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::design::Loss;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::ortho::OrthonormalDesign;
use crate::penalty::{PenaltyFamily, PenaltySpec};

const NAIVE_MAX_COLUMNS: usize = 50;
const SEARCH_MAX_DIMENSION: usize = 8;
const INITIAL_STEP: f64 = 0.5;
const TERMINAL_STEP: f64 = 1e-8;
const EVAL_BUDGET: usize = 200_000;

/// Best point found by [`brute_minimize`], with the final objective of
/// every start for convexity diagnostics.
#[derive(Debug, Clone)]
pub struct OracleSolution<F: Float> {
    pub beta0: F,
    /// Coefficients on the orthonormalized scale.
    pub beta: Array1<F>,
    pub objective: F,
    pub n_starts: usize,
    pub per_start_values: Vec<F>,
}

/// Evaluates the penalized objective by direct summation, sharing no
/// arithmetic with the solver code paths. Guarded to at most 50 columns.
pub fn naive_objective<F: Float>(
    design: &OrthonormalDesign<F>,
    beta0: F,
    beta: &Array1<F>,
    lam: F,
    spec: &PenaltySpec<F>,
) -> Result<F> {
    if design.p_tilde() > NAIVE_MAX_COLUMNS {
        return Err(Error::Config(format!(
            "naive objective is limited to {NAIVE_MAX_COLUMNS} columns, got {}",
            design.p_tilde()
        )));
    }
    if beta.len() != design.p_tilde() {
        return Err(Error::Dimension(format!(
            "coefficient vector has length {}, design has {} columns",
            beta.len(),
            design.p_tilde()
        )));
    }
    let n = design.n();
    let y = design.y();
    let mut eta = vec![beta0; n];
    for j in 0..design.n_groups() {
        let block = design.block(j);
        let range = design.tilde_range(j);
        for i in 0..n {
            for (c, col) in (range.start..range.end).enumerate() {
                eta[i] = eta[i] + block[[i, c]] * beta[col];
            }
        }
    }

    let mut loss = F::zero();
    match design.loss() {
        Loss::Linear => {
            for i in 0..n {
                let r = y[i] - eta[i];
                loss = loss + r * r;
            }
            loss = loss / (F::cast(2.0) * F::from_count(n));
        }
        Loss::Logistic => {
            for i in 0..n {
                let e = eta[i];
                let log_denom = if e > F::zero() {
                    e + (-e).exp().ln_1p()
                } else {
                    e.exp().ln_1p()
                };
                loss = loss + log_denom - y[i] * e;
            }
            loss = loss / F::from_count(n);
        }
    }

    let gamma = spec.gamma;
    let mut penalty = F::zero();
    for j in 0..design.n_groups() {
        let m = match &spec.multipliers {
            Some(values) => values[j],
            None => F::from_count(design.original_dims()[j]).sqrt(),
        };
        let range = design.tilde_range(j);
        let mut sq = F::zero();
        for c in range.start..range.end {
            sq = sq + beta[c] * beta[c];
        }
        let t = sq.sqrt();
        let reg = lam * m;
        penalty = penalty
            + match spec.family {
                PenaltyFamily::GroupLasso => reg * t,
                PenaltyFamily::GroupMcp => {
                    if t <= gamma * reg {
                        reg * t - t * t / (F::cast(2.0) * gamma)
                    } else {
                        gamma * reg * reg / F::cast(2.0)
                    }
                }
                PenaltyFamily::GroupScad => {
                    if t <= reg {
                        reg * t
                    } else if t <= gamma * reg {
                        (gamma * reg * t - (t * t + reg * reg) / F::cast(2.0))
                            / (gamma - F::one())
                    } else {
                        reg * reg * (gamma + F::one()) / F::cast(2.0)
                    }
                }
            };
    }
    Ok(loss + penalty)
}

/// Minimizes [`naive_objective`] by compass-and-random pattern search from
/// `n_starts` seeded random points plus the zero vector and the
/// unpenalized least-squares point. Guarded to 8 search dimensions (the
/// logistic intercept counts as one).
pub fn brute_minimize<F: Float>(
    design: &OrthonormalDesign<F>,
    lam: F,
    spec: &PenaltySpec<F>,
    n_starts: usize,
    seed: u64,
) -> Result<OracleSolution<F>> {
    if spec.loss != design.loss() {
        return Err(Error::Config(format!(
            "penalty configured for {} loss, design uses {} loss",
            spec.loss.label(),
            design.loss().label()
        )));
    }
    let p = design.p_tilde();
    let with_intercept = design.loss() == Loss::Logistic;
    let dim = p + usize::from(with_intercept);
    if dim > SEARCH_MAX_DIMENSION {
        return Err(Error::Config(format!(
            "brute-force search is limited to {SEARCH_MAX_DIMENSION} dimensions, got {dim}"
        )));
    }

    let fixed_intercept = design.y_mean();
    let evaluate = |v: &[F]| -> F {
        let (beta0, coefs) = if with_intercept {
            (v[0], &v[1..])
        } else {
            (fixed_intercept, v)
        };
        let beta = Array1::from(coefs.to_vec());
        naive_objective(design, beta0, &beta, lam, spec)
            .expect("guards checked before the search")
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<F>> = Vec::with_capacity(n_starts + 2);
    starts.push(vec![F::zero(); dim]);
    let mut ls = least_squares_start(design);
    if with_intercept {
        let y_mean = design.y_mean();
        let clipped = y_mean
            .max(F::cast(1e-3))
            .min(F::one() - F::cast(1e-3));
        ls.insert(0, (clipped / (F::one() - clipped)).ln());
    }
    starts.push(ls);
    for _ in 0..n_starts {
        starts.push(
            (0..dim)
                .map(|_| F::cast(rng.sample::<f64, _>(StandardNormal)))
                .collect(),
        );
    }

    let mut per_start_values = Vec::with_capacity(starts.len());
    let mut best: Option<(Vec<F>, F)> = None;
    for start in starts {
        let (point, value) = pattern_search(start, &evaluate, &mut rng);
        per_start_values.push(value);
        if best.as_ref().map_or(true, |(_, b)| value < *b) {
            best = Some((point, value));
        }
    }
    let (point, objective) = best.expect("at least the zero start ran");
    let (beta0, coefs) = if with_intercept {
        (point[0], point[1..].to_vec())
    } else {
        (fixed_intercept, point)
    };
    Ok(OracleSolution {
        beta0,
        beta: Array1::from(coefs),
        objective,
        n_starts: per_start_values.len(),
        per_start_values,
    })
}

/// Unpenalized least squares of the centered response on the orthonormal
/// columns, via Gauss-Jordan elimination on the normal equations. Falls
/// back to zero on a singular system.
fn least_squares_start<F: Float>(design: &OrthonormalDesign<F>) -> Vec<F> {
    let n = design.n();
    let p = design.p_tilde();
    let y = design.y();
    let y_mean = design.y_mean();
    let x = design.tilde_matrix();
    let mut a = vec![vec![F::zero(); p + 1]; p];
    for r in 0..p {
        for c in 0..p {
            let mut dot = F::zero();
            for i in 0..n {
                dot = dot + x[[i, r]] * x[[i, c]];
            }
            a[r][c] = dot;
        }
        let mut rhs = F::zero();
        for i in 0..n {
            rhs = rhs + x[[i, r]] * (y[i] - y_mean);
        }
        a[r][p] = rhs;
    }
    for col in 0..p {
        let pivot_row = (col..p)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .abs()
                    .partial_cmp(&a[r2][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot_row][col].abs() < F::cast(1e-12) {
            return vec![F::zero(); p];
        }
        a.swap(col, pivot_row);
        let pivot = a[col][col];
        for c in col..=p {
            a[col][c] = a[col][c] / pivot;
        }
        for r in 0..p {
            if r != col {
                let factor = a[r][col];
                if factor != F::zero() {
                    for c in col..=p {
                        a[r][c] = a[r][c] - factor * a[col][c];
                    }
                }
            }
        }
    }
    (0..p).map(|r| a[r][p]).collect()
}

/// Compass search with extra random poll directions: moves to the best
/// improving poll point, halving the step from 0.5 down to 1e-8 when no
/// direction improves.
fn pattern_search<F: Float>(
    start: Vec<F>,
    evaluate: &impl Fn(&[F]) -> F,
    rng: &mut ChaCha8Rng,
) -> (Vec<F>, F) {
    let dim = start.len();
    let mut x = start;
    let mut fx = evaluate(&x);
    let mut step = F::cast(INITIAL_STEP);
    let terminal = F::cast(TERMINAL_STEP);
    let mut budget = EVAL_BUDGET;
    let mut candidate = x.clone();
    while step > terminal && budget > 0 {
        let mut best_value = fx;
        let mut best_point: Option<Vec<F>> = None;
        let poll = |point: &mut Vec<F>,
                        best_value: &mut F,
                        best_point: &mut Option<Vec<F>>,
                        budget: &mut usize| {
            if *budget == 0 {
                return;
            }
            *budget -= 1;
            let value = evaluate(point);
            if value < *best_value {
                *best_value = value;
                *best_point = Some(point.clone());
            }
        };
        for i in 0..dim {
            for sign in [F::one(), -F::one()] {
                candidate.copy_from_slice(&x);
                candidate[i] = candidate[i] + sign * step;
                poll(&mut candidate, &mut best_value, &mut best_point, &mut budget);
            }
        }
        for _ in 0..8 {
            let mut direction: Vec<F> = (0..dim)
                .map(|_| F::cast(rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let norm = direction
                .iter()
                .map(|&d| d * d)
                .sum::<F>()
                .sqrt();
            if norm == F::zero() {
                continue;
            }
            for d in direction.iter_mut() {
                *d = *d / norm;
            }
            candidate.copy_from_slice(&x);
            for (c, d) in candidate.iter_mut().zip(direction.iter()) {
                *c = *c + step * *d;
            }
            poll(&mut candidate, &mut best_value, &mut best_point, &mut budget);
        }
        match best_point {
            Some(point) => {
                x = point;
                fx = best_value;
            }
            None => step = step * F::cast(0.5),
        }
    }
    (x, fx)
}
