//! K-fold cross-validation over a shared penalty grid.
//!
//! One master grid is built from the full data; every fold then fits its
//! training portion at exactly those penalties so per-level errors are
//! comparable across folds. Folds run in parallel and are aggregated in
//! fold order, so results are deterministic given the seed.

use ndarray::{Array1, Array2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::design::{GroupedDesign, Loss};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::logistic;
use crate::ortho::orthonormalize;
use crate::path::{self, FitPath, PathControls};
use crate::penalty::PenaltySpec;

/// Held-out error metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Root mean squared held-out prediction error (linear loss).
    RootPredictionError,
    /// Share of held-out observations misclassified at threshold 1/2
    /// (logistic loss).
    Misclassification,
    /// Mean held-out binomial deviance (logistic loss).
    Deviance,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::RootPredictionError => "rpe",
            Metric::Misclassification => "misclass",
            Metric::Deviance => "deviance",
        }
    }

    pub fn default_for(loss: Loss) -> Metric {
        match loss {
            Loss::Linear => Metric::RootPredictionError,
            Loss::Logistic => Metric::Misclassification,
        }
    }

    fn validate(self, loss: Loss) -> Result<()> {
        let ok = match self {
            Metric::RootPredictionError => loss == Loss::Linear,
            Metric::Misclassification | Metric::Deviance => loss == Loss::Logistic,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "metric {} does not apply to the {} loss",
                self.label(),
                loss.label()
            )))
        }
    }
}

/// Cross-validation curve over the penalty grid.
#[derive(Debug, Clone)]
pub struct CVResult<F: Float> {
    /// Penalty levels scored by at least one fold.
    pub lambdas: Vec<F>,
    /// Mean fold error per penalty level.
    pub cve: Vec<F>,
    /// Standard error of the fold errors per penalty level.
    pub cvse: Vec<F>,
    /// Index of the smallest error; ties break toward the larger penalty.
    pub lambda_min_index: usize,
    /// Fold id of every observation.
    pub fold_assignment: Vec<usize>,
    pub metric: Metric,
}

impl<F: Float> CVResult<F> {
    pub fn lambda_min(&self) -> F {
        self.lambdas[self.lambda_min_index]
    }
}

/// Seeded fold assignment with sizes differing by at most one; logistic
/// responses are stratified so each class spreads evenly over folds.
pub fn assign_folds<F: Float>(design: &GroupedDesign<F>, k: usize, seed: u64) -> Vec<usize> {
    let n = design.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    match design.loss() {
        Loss::Linear => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            for (slot, &row) in order.iter().enumerate() {
                assignment[row] = slot % k;
            }
        }
        Loss::Logistic => {
            let one = F::one();
            let mut ones: Vec<usize> = (0..n).filter(|&i| design.y()[i] == one).collect();
            let mut zeros: Vec<usize> = (0..n).filter(|&i| design.y()[i] != one).collect();
            ones.shuffle(&mut rng);
            zeros.shuffle(&mut rng);
            let mut slot = 0usize;
            for &row in ones.iter().chain(zeros.iter()) {
                assignment[row] = slot % k;
                slot += 1;
            }
        }
    }
    assignment
}

/// Cross-validates with seeded fold construction.
pub fn cross_validate<F: Float>(
    design: &GroupedDesign<F>,
    spec: &PenaltySpec<F>,
    k: usize,
    seed: u64,
    metric: Option<Metric>,
    controls: &PathControls<F>,
) -> Result<CVResult<F>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > design.n() {
        return Err(Error::Config(format!(
            "{k} folds requested for {} observations",
            design.n()
        )));
    }
    let folds = assign_folds(design, k, seed);
    cross_validate_with_folds(design, spec, &folds, metric, controls)
}

/// Cross-validates with a caller-supplied fold assignment (one fold id per
/// observation, ids covering `0..k`).
pub fn cross_validate_with_folds<F: Float>(
    design: &GroupedDesign<F>,
    spec: &PenaltySpec<F>,
    folds: &[usize],
    metric: Option<Metric>,
    controls: &PathControls<F>,
) -> Result<CVResult<F>> {
    let n = design.n();
    if folds.len() != n {
        return Err(Error::Dimension(format!(
            "fold assignment has length {}, design has {n} rows",
            folds.len()
        )));
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    for f in 0..k {
        if !folds.iter().any(|&id| id == f) {
            return Err(Error::Config(format!("fold {f} has no observations")));
        }
    }
    let metric = metric.unwrap_or_else(|| Metric::default_for(design.loss()));
    metric.validate(design.loss())?;

    let master = match &controls.lambdas {
        Some(lambdas) => lambdas.clone(),
        None => {
            let (ortho, _) = orthonormalize(design)?;
            let lam_max = path::lambda_max(&ortho, spec)?;
            path::build_grid(
                lam_max,
                design.n(),
                design.p(),
                controls.n_lambda,
                controls.min_ratio,
            )?
        }
    };

    let fold_errors: Vec<Vec<F>> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<Vec<F>> {
            let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
            let train_design = design.subset_rows(&train).map_err(|e| match e {
                Error::Data(m) => Error::Data(format!("training fold {f}: {m}")),
                other => other,
            })?;
            let fold_controls = PathControls {
                lambdas: Some(master.clone()),
                solver: controls.solver.clone(),
                warm_starts: controls.warm_starts,
                n_lambda: controls.n_lambda,
                min_ratio: controls.min_ratio,
            };
            let fold_path = path::fit_path(&train_design, spec, &fold_controls)?;
            let x_test = design.rows_in_original_order(&test);
            let y_test = design.y().select(Axis(0), &test);
            score_path(&fold_path, &x_test, &y_test, metric)
        })
        .collect::<Result<Vec<_>>>()?;

    let scored = fold_errors.iter().map(Vec::len).max().unwrap_or(0);
    if scored == 0 {
        return Err(Error::Numerical(
            "no penalty level was scored by any fold".into(),
        ));
    }
    let mut cve = Vec::with_capacity(scored);
    let mut cvse = Vec::with_capacity(scored);
    for l in 0..scored {
        let vals: Vec<F> = fold_errors
            .iter()
            .filter_map(|errs| errs.get(l).copied())
            .collect();
        let count = F::from_count(vals.len());
        let mean = vals.iter().copied().sum::<F>() / count;
        let se = if vals.len() > 1 {
            let var = vals
                .iter()
                .map(|&v| (v - mean) * (v - mean))
                .sum::<F>()
                / (count - F::one());
            (var / count).sqrt()
        } else {
            F::zero()
        };
        cve.push(mean);
        cvse.push(se);
    }
    let lambda_min_index = argmin_first(&cve);
    Ok(CVResult {
        lambdas: master[..scored].to_vec(),
        cve,
        cvse,
        lambda_min_index,
        fold_assignment: folds.to_vec(),
        metric,
    })
}

/// Scores every penalty level of a fitted path on held-out rows.
pub fn score_path<F: Float>(
    path: &FitPath<F>,
    x_test: &Array2<F>,
    y_test: &Array1<F>,
    metric: Metric,
) -> Result<Vec<F>> {
    let m = F::from_count(y_test.len());
    let half = F::cast(0.5);
    let mut out = Vec::with_capacity(path.len());
    for l in 0..path.len() {
        let err = match metric {
            Metric::RootPredictionError => {
                let pred = path.linear_predictor_at(l, x_test)?;
                let mse = y_test
                    .iter()
                    .zip(pred.iter())
                    .map(|(&y, &p)| (y - p) * (y - p))
                    .sum::<F>()
                    / m;
                mse.sqrt()
            }
            Metric::Misclassification => {
                let pi = path.predict_response_at(l, x_test)?;
                let wrong = y_test
                    .iter()
                    .zip(pi.iter())
                    .filter(|&(&y, &p)| (p > half) != (y == F::one()))
                    .count();
                F::from_count(wrong) / m
            }
            Metric::Deviance => {
                let pi = path.predict_response_at(l, x_test)?;
                logistic::binomial_deviance(y_test, &pi) / m
            }
        };
        out.push(err);
    }
    Ok(out)
}

fn argmin_first<F: Float>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}
