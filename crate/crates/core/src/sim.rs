//! Data generators for three benchmark scenarios and the accuracy metrics
//! used to compare penalty families on them.
//!
//! The three scenarios are a basic grouped-signal design (equal-sized
//! normal groups, a handful carrying coefficients of alternating sign), a
//! semiparametric design (uniform variables with fixed nonlinear effects,
//! expanded per variable into a B-spline basis), and a genetic-association
//! design (three-level genotypes expanded into two indicators, with one
//! dominant, one recessive, and one additive causal effect).

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cv::{self, Metric};
use crate::design::{GroupedDesign, Loss};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::path::{self, FitPath, PathControls};
use crate::penalty::{PenaltyFamily, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Basic,
    Semiparametric,
    Snp,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Basic => "basic",
            ScenarioKind::Semiparametric => "semiparametric",
            ScenarioKind::Snp => "snp",
        }
    }
}

/// Parameters of one simulated dataset. The constructors fill in the
/// benchmark defaults; every field stays adjustable.
#[derive(Debug, Clone)]
pub struct Scenario<F: Float> {
    pub kind: ScenarioKind,
    pub n: usize,
    /// Number of groups: coefficient groups, continuous variables, or SNPs.
    pub n_groups: usize,
    /// Columns per group: fixed coefficients per group (basic), B-spline
    /// basis size (semiparametric); ignored for SNPs, which always expand
    /// to two indicators.
    pub group_size: usize,
    /// Signal scale: the coefficient magnitude (basic), a multiplier on the
    /// nonlinear effects (semiparametric), or the per-SNP contribution
    /// standard deviation (SNP).
    pub effect_magnitude: F,
    /// Number of signal groups (basic scenario only; the others fix their
    /// causal structure).
    pub n_signal: usize,
    /// Minor-allele frequency under Hardy-Weinberg proportions (SNP only).
    pub maf: F,
    /// Indices of the dominant, recessive, and additive causal SNPs.
    pub causal: [usize; 3],
    pub seed: u64,
}

impl<F: Float> Scenario<F> {
    /// 100 groups of 4 standard-normal covariates, 5 signal groups with
    /// coefficients of alternating sign, n = 100.
    pub fn basic(effect_magnitude: F, seed: u64) -> Self {
        Scenario {
            kind: ScenarioKind::Basic,
            n: 100,
            n_groups: 100,
            group_size: 4,
            effect_magnitude,
            n_signal: 5,
            maf: F::cast(0.3),
            causal: [0, 1, 2],
            seed,
        }
    }

    /// 100 uniform(0,1) variables, the first six with fixed nonlinear
    /// effects, each expanded into a 6-term cubic B-spline basis, n = 200.
    pub fn semiparametric(seed: u64) -> Self {
        Scenario {
            kind: ScenarioKind::Semiparametric,
            n: 200,
            n_groups: 100,
            group_size: 6,
            effect_magnitude: F::one(),
            n_signal: 6,
            maf: F::cast(0.3),
            causal: [0, 1, 2],
            seed,
        }
    }

    /// 500 SNPs on 250 subjects, each expanded into two genotype
    /// indicators; one dominant, one recessive, and one additive causal
    /// SNP, each contributing unit variance by default.
    pub fn snp(effect_magnitude: F, seed: u64) -> Self {
        Scenario {
            kind: ScenarioKind::Snp,
            n: 250,
            n_groups: 500,
            group_size: 2,
            effect_magnitude,
            n_signal: 3,
            maf: F::cast(0.3),
            causal: [0, 1, 2],
            seed,
        }
    }
}

/// The generating truth kept for scoring.
#[derive(Debug, Clone)]
pub struct Truth<F: Float> {
    /// True coefficients in the design's original column order, when the
    /// generating model lives in the fitted coefficient space.
    pub coefficients: Option<Array1<F>>,
    /// True mean of each observation.
    pub mean: Array1<F>,
    /// Groups with a truly nonzero effect.
    pub signal_groups: Vec<usize>,
}

/// Fixed nonlinear effects of the semiparametric scenario. Each maps
/// `[0, 1]` onto `[-1, 1]`.
pub fn nonlinear_effect<F: Float>(which: usize, x: F) -> F {
    let one = F::one();
    let two = F::cast(2.0);
    match which {
        0 => {
            let e10 = F::cast(-10.0).exp();
            two * ((F::cast(-10.0) * x).exp() - e10) / (one - e10) - one
        }
        1 => -nonlinear_effect::<F>(0, x),
        2 => two * x - one,
        3 => one - two * x,
        4 => F::cast(8.0) * (x - F::cast(0.5)) * (x - F::cast(0.5)) - one,
        5 => -nonlinear_effect::<F>(4, x),
        _ => panic!("only six nonlinear effects are defined"),
    }
}

/// Generates one dataset plus its truth; bit-for-bit reproducible for a
/// given scenario.
pub fn generate<F: Float>(scenario: &Scenario<F>) -> Result<(GroupedDesign<F>, Truth<F>)> {
    if scenario.n < 2 || scenario.n_groups == 0 {
        return Err(Error::Config(format!(
            "scenario needs n >= 2 and at least one group, got n = {}, groups = {}",
            scenario.n, scenario.n_groups
        )));
    }
    match scenario.kind {
        ScenarioKind::Basic => generate_basic(scenario),
        ScenarioKind::Semiparametric => generate_semiparametric(scenario),
        ScenarioKind::Snp => generate_snp(scenario),
    }
}

fn generate_basic<F: Float>(scenario: &Scenario<F>) -> Result<(GroupedDesign<F>, Truth<F>)> {
    if scenario.n_signal > scenario.n_groups {
        return Err(Error::Config(format!(
            "{} signal groups requested from {} groups",
            scenario.n_signal, scenario.n_groups
        )));
    }
    if scenario.group_size == 0 {
        return Err(Error::Config("group_size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let (n, j, k) = (scenario.n, scenario.n_groups, scenario.group_size);
    let p = j * k;
    let x = Array2::from_shape_fn((n, p), |_| F::cast(rng.sample::<f64, _>(StandardNormal)));
    let magnitude = scenario.effect_magnitude;
    let mut beta = Array1::zeros(p);
    for g in 0..scenario.n_signal {
        for c in 0..k {
            let sign = if c % 2 == 0 { F::one() } else { -F::one() };
            beta[g * k + c] = sign * magnitude;
        }
    }
    let mean = x.dot(&beta);
    let noise = Array1::from_shape_fn(n, |_| F::cast(rng.sample::<f64, _>(StandardNormal)));
    let y = &mean + &noise;
    let group_of: Vec<usize> = (0..p).map(|c| c / k).collect();
    let design = GroupedDesign::new(x, y, &group_of, Loss::Linear)?;
    let signal_groups = if magnitude == F::zero() {
        Vec::new()
    } else {
        (0..scenario.n_signal).collect()
    };
    Ok((
        design,
        Truth {
            coefficients: Some(beta),
            mean,
            signal_groups,
        },
    ))
}

fn generate_semiparametric<F: Float>(
    scenario: &Scenario<F>,
) -> Result<(GroupedDesign<F>, Truth<F>)> {
    if scenario.n_groups < 6 {
        return Err(Error::Config(
            "the semiparametric scenario needs at least 6 variables".into(),
        ));
    }
    if scenario.group_size < 4 {
        return Err(Error::Config(
            "cubic B-splines need a basis of at least 4 terms".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let (n, j, k) = (scenario.n, scenario.n_groups, scenario.group_size);
    let vars = Array2::from_shape_fn((n, j), |_| F::cast(rng.random::<f64>()));
    let mut mean = Array1::zeros(n);
    for v in 0..6 {
        for i in 0..n {
            mean[i] += scenario.effect_magnitude * nonlinear_effect(v, vars[[i, v]]);
        }
    }
    let noise = Array1::from_shape_fn(n, |_| F::cast(rng.sample::<f64, _>(StandardNormal)));
    let y = &mean + &noise;

    let mut x = Array2::zeros((n, j * k));
    for v in 0..j {
        let col: Vec<F> = vars.column(v).to_vec();
        let basis = BSplineBasis::from_values(&col, k)?;
        for i in 0..n {
            let row = basis.evaluate(vars[[i, v]]);
            for (b, &val) in row.iter().enumerate() {
                x[[i, v * k + b]] = val;
            }
        }
    }
    let group_of: Vec<usize> = (0..j * k).map(|c| c / k).collect();
    let design = GroupedDesign::new(x, y, &group_of, Loss::Linear)?;
    Ok((
        design,
        Truth {
            coefficients: None,
            mean,
            signal_groups: (0..6).collect(),
        },
    ))
}

fn generate_snp<F: Float>(scenario: &Scenario<F>) -> Result<(GroupedDesign<F>, Truth<F>)> {
    let maf = scenario.maf.to_f64().unwrap_or(0.0);
    if !(0.0 < maf && maf <= 0.5) {
        return Err(Error::Config(format!(
            "minor-allele frequency must lie in (0, 0.5], got {maf}"
        )));
    }
    let [dom, rec, add] = scenario.causal;
    if dom == rec || dom == add || rec == add {
        return Err(Error::Config("causal SNP indices must be distinct".into()));
    }
    if scenario.causal.iter().any(|&c| c >= scenario.n_groups) {
        return Err(Error::Config(format!(
            "causal SNP index out of range for {} SNPs",
            scenario.n_groups
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let (n, j) = (scenario.n, scenario.n_groups);
    let p_hom_major = (1.0 - maf) * (1.0 - maf);
    let p_het = 2.0 * maf * (1.0 - maf);

    let mut genotypes = Array2::<u8>::zeros((n, j));
    for s in 0..j {
        loop {
            for i in 0..n {
                let u = rng.random::<f64>();
                genotypes[[i, s]] = if u < p_hom_major {
                    0
                } else if u < p_hom_major + p_het {
                    1
                } else {
                    2
                };
            }
            let first = genotypes[[0, s]];
            if (1..n).any(|i| genotypes[[i, s]] != first) {
                break;
            }
        }
    }

    // Each causal mechanism is scaled so its contribution has variance
    // effect_magnitude^2 under the genotype distribution.
    let var_dom = (1.0 - p_hom_major) * p_hom_major;
    let var_rec = maf * maf * (1.0 - maf * maf);
    let var_add = 2.0 * maf * (1.0 - maf);
    let c_dom = scenario.effect_magnitude * F::cast(1.0 / var_dom.sqrt());
    let c_rec = scenario.effect_magnitude * F::cast(1.0 / var_rec.sqrt());
    let c_add = scenario.effect_magnitude * F::cast(1.0 / var_add.sqrt());

    let mut mean = Array1::zeros(n);
    for i in 0..n {
        let g_dom = genotypes[[i, dom]];
        let g_rec = genotypes[[i, rec]];
        let g_add = genotypes[[i, add]];
        if g_dom >= 1 {
            mean[i] += c_dom;
        }
        if g_rec == 2 {
            mean[i] += c_rec;
        }
        mean[i] += c_add * F::from_count(g_add as usize);
    }
    let noise = Array1::from_shape_fn(n, |_| F::cast(rng.sample::<f64, _>(StandardNormal)));
    let y = &mean + &noise;

    let p = 2 * j;
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        for s in 0..j {
            match genotypes[[i, s]] {
                1 => x[[i, 2 * s]] = F::one(),
                2 => x[[i, 2 * s + 1]] = F::one(),
                _ => {}
            }
        }
    }
    let mut beta = Array1::zeros(p);
    beta[2 * dom] = c_dom;
    beta[2 * dom + 1] = c_dom;
    beta[2 * rec + 1] = c_rec;
    beta[2 * add] = c_add;
    beta[2 * add + 1] = F::cast(2.0) * c_add;

    let group_of: Vec<usize> = (0..p).map(|c| c / 2).collect();
    let design = GroupedDesign::new(x, y, &group_of, Loss::Linear)?;
    let mut signal = vec![dom, rec, add];
    signal.sort_unstable();
    Ok((
        design,
        Truth {
            coefficients: Some(beta),
            mean,
            signal_groups: signal,
        },
    ))
}

/// Cubic (order 4) B-spline basis over the range of a set of values, with
/// interior knots at equally spaced quantiles, sized to a fixed number of
/// basis functions.
pub(crate) struct BSplineBasis<F: Float> {
    knots: Vec<F>,
    n_basis: usize,
    order: usize,
}

impl<F: Float> BSplineBasis<F> {
    pub(crate) fn from_values(values: &[F], n_basis: usize) -> Result<Self> {
        let order = 4usize;
        if n_basis < order {
            return Err(Error::Config(format!(
                "a cubic B-spline basis needs at least {order} terms, got {n_basis}"
            )));
        }
        let mut sorted: Vec<F> = values.to_vec();
        if sorted.is_empty() {
            return Err(Error::Data("no values to build a spline basis from".into()));
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let lo = sorted[0];
        let hi = sorted[sorted.len() - 1];
        if !(hi > lo) {
            return Err(Error::Data(
                "spline basis needs at least two distinct values".into(),
            ));
        }
        let interior = n_basis - order;
        let mut knots = vec![lo; order];
        for q in 1..=interior {
            let alpha = F::from_count(q) / F::from_count(interior + 1);
            knots.push(quantile(&sorted, alpha));
        }
        knots.extend(std::iter::repeat(hi).take(order));
        Ok(BSplineBasis {
            knots,
            n_basis,
            order,
        })
    }

    /// Basis function values at `x`, by the standard two-term recursion on
    /// the knot vector. Values at the right boundary are assigned to the
    /// last interval so the basis still sums to one there.
    pub(crate) fn evaluate(&self, x: F) -> Vec<F> {
        let m = self.n_basis;
        let hi = self.knots[self.knots.len() - 1];
        let mut values = vec![F::zero(); m];
        if x >= hi {
            // Right-endpoint limit: only the final basis function is 1.
            values[m - 1] = F::one();
            return values;
        }
        let t = &self.knots;
        let mut b = vec![F::zero(); t.len() - 1];
        for i in 0..t.len() - 1 {
            if t[i] <= x && x < t[i + 1] {
                b[i] = F::one();
            }
        }
        for degree in 1..self.order {
            for i in 0..t.len() - 1 - degree {
                let left_den = t[i + degree] - t[i];
                let right_den = t[i + degree + 1] - t[i + 1];
                let mut v = F::zero();
                if left_den > F::zero() {
                    v += (x - t[i]) / left_den * b[i];
                }
                if right_den > F::zero() {
                    v += (t[i + degree + 1] - x) / right_den * b[i + 1];
                }
                b[i] = v;
            }
        }
        values.copy_from_slice(&b[..m]);
        values
    }
}

fn quantile<F: Float>(sorted: &[F], alpha: F) -> F {
    let n = sorted.len();
    let h = alpha * F::from_count(n - 1);
    let lo = h.floor();
    let idx = lo.to_usize().unwrap_or(0).min(n - 1);
    if idx + 1 >= n {
        return sorted[n - 1];
    }
    sorted[idx] + (h - lo) * (sorted[idx + 1] - sorted[idx])
}

/// Accuracy of one fitted model against the generating truth.
#[derive(Debug, Clone, Copy)]
pub struct Score<F: Float> {
    /// Root mean squared coefficient error, when true coefficients exist.
    pub rmse: Option<F>,
    /// Root mean squared error of the fitted means.
    pub rme: F,
    pub model_size_groups: usize,
    /// Selected groups with a truly nonzero effect.
    pub true_discoveries: usize,
    /// Selected groups with no effect.
    pub false_discoveries: usize,
}

/// Scores the model at one path index against the truth on the training
/// design.
pub fn score<F: Float>(
    path: &FitPath<F>,
    index: usize,
    design: &GroupedDesign<F>,
    truth: &Truth<F>,
) -> Result<Score<F>> {
    if index >= path.len() {
        return Err(Error::Dimension(format!(
            "path index {index} out of bounds for {} penalty levels",
            path.len()
        )));
    }
    if truth.mean.len() != design.n() {
        return Err(Error::Dimension(format!(
            "truth mean has length {}, design has {} rows",
            truth.mean.len(),
            design.n()
        )));
    }
    let rows: Vec<usize> = (0..design.n()).collect();
    let x = design.rows_in_original_order(&rows);
    let fitted = path.linear_predictor_at(index, &x)?;
    let n = F::from_count(design.n());
    let rme = truth
        .mean
        .iter()
        .zip(fitted.iter())
        .map(|(&m, &f)| (m - f) * (m - f))
        .sum::<F>()
        / n;
    let rmse = truth.coefficients.as_ref().map(|beta| {
        let row = path.coefficients_at(index);
        let p = F::from_count(beta.len());
        (beta
            .iter()
            .zip(row.iter())
            .map(|(&b, &e)| (b - e) * (b - e))
            .sum::<F>()
            / p)
            .sqrt()
    });
    let selected: Vec<usize> = (0..design.n_groups())
        .filter(|&g| path.group_norm(index, g) > F::zero())
        .collect();
    let true_discoveries = selected
        .iter()
        .filter(|g| truth.signal_groups.contains(g))
        .count();
    Ok(Score {
        rmse,
        rme: rme.sqrt(),
        model_size_groups: selected.len(),
        true_discoveries,
        false_discoveries: selected.len() - true_discoveries,
    })
}

/// Mean and standard error of a batch of values.
#[derive(Debug, Clone, Copy)]
pub struct Aggregate<F: Float> {
    pub mean: F,
    pub se: F,
}

pub fn aggregate<F: Float>(values: &[F]) -> Aggregate<F> {
    let n = F::from_count(values.len());
    let mean = values.iter().copied().sum::<F>() / n;
    let se = if values.len() > 1 {
        let var = values
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<F>()
            / (n - F::one());
        (var / n).sqrt()
    } else {
        F::zero()
    };
    Aggregate { mean, se }
}

/// Results of a replicated comparison of the three penalty families on one
/// scenario: per-family, per-replicate scores of the cross-validated model.
#[derive(Debug, Clone)]
pub struct StudyResult<F: Float> {
    pub scenario_kind: ScenarioKind,
    pub replicates: usize,
    pub families: Vec<PenaltyFamily>,
    /// `scores[f][r]` is the score of family `f` on replicate `r`.
    pub scores: Vec<Vec<Score<F>>>,
}

impl<F: Float> StudyResult<F> {
    /// Summary rows (metric, per-family mean, per-family standard error) in
    /// a fixed order, skipping the coefficient error when no scenario
    /// truth coefficients exist.
    pub fn summary_rows(&self) -> Vec<(String, Vec<Aggregate<F>>)> {
        let mut rows = Vec::new();
        let has_rmse = self
            .scores
            .iter()
            .flatten()
            .all(|s| s.rmse.is_some());
        if has_rmse {
            rows.push((
                "rmse".to_string(),
                self.collect(|s| s.rmse.unwrap_or_else(F::zero)),
            ));
        }
        rows.push(("rme".to_string(), self.collect(|s| s.rme)));
        rows.push((
            "model_size_groups".to_string(),
            self.collect(|s| F::from_count(s.model_size_groups)),
        ));
        rows.push((
            "true_discoveries".to_string(),
            self.collect(|s| F::from_count(s.true_discoveries)),
        ));
        rows.push((
            "false_discoveries".to_string(),
            self.collect(|s| F::from_count(s.false_discoveries)),
        ));
        rows
    }

    fn collect(&self, f: impl Fn(&Score<F>) -> F) -> Vec<Aggregate<F>> {
        self.scores
            .iter()
            .map(|family| {
                let vals: Vec<F> = family.iter().map(&f).collect();
                aggregate(&vals)
            })
            .collect()
    }
}

/// Runs the full comparison: for each replicate, generates one dataset,
/// fits a penalty path per family, selects the penalty by k-fold
/// cross-validation, and scores the selected model against the truth. All
/// three families see the same data within a replicate; replicate `r` uses
/// seed `scenario.seed + r`.
pub fn run_study<F: Float>(
    scenario: &Scenario<F>,
    replicates: usize,
    folds: usize,
    controls: &PathControls<F>,
) -> Result<StudyResult<F>> {
    if replicates == 0 {
        return Err(Error::Config("need at least one replicate".into()));
    }
    let families = vec![
        PenaltyFamily::GroupLasso,
        PenaltyFamily::GroupMcp,
        PenaltyFamily::GroupScad,
    ];
    let per_replicate: Vec<Vec<Score<F>>> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<Score<F>>> {
            let mut rep = scenario.clone();
            rep.seed = scenario.seed.wrapping_add(r as u64);
            let (design, truth) = generate(&rep)?;
            let fold_seed = rep.seed.wrapping_mul(0x9e3779b97f4a7c15);
            families
                .iter()
                .map(|&family| {
                    let spec = PenaltySpec::new(family, Loss::Linear);
                    let full = path::fit_path(&design, &spec, controls)?;
                    let cv_controls = PathControls {
                        lambdas: Some(full.lambdas.clone()),
                        solver: controls.solver.clone(),
                        warm_starts: controls.warm_starts,
                        n_lambda: controls.n_lambda,
                        min_ratio: controls.min_ratio,
                    };
                    let cv = cv::cross_validate(
                        &design,
                        &spec,
                        folds,
                        fold_seed,
                        Some(Metric::RootPredictionError),
                        &cv_controls,
                    )?;
                    score(&full, cv.lambda_min_index, &design, &truth)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let scores = (0..families.len())
        .map(|f| per_replicate.iter().map(|rep| rep[f]).collect())
        .collect();
    Ok(StudyResult {
        scenario_kind: scenario.kind,
        replicates,
        families,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ortho::orthonormalize;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nonlinear_effects_hit_printed_values() {
        assert_abs_diff_eq!(nonlinear_effect::<f64>(2, 0.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nonlinear_effect::<f64>(2, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nonlinear_effect::<f64>(4, 0.5), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nonlinear_effect::<f64>(5, 0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nonlinear_effect::<f64>(0, 0.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nonlinear_effect::<f64>(0, 1.0), -1.0, epsilon = 1e-12);
        for x in [0.0, 0.21, 0.5, 0.83, 1.0] {
            assert_abs_diff_eq!(
                nonlinear_effect::<f64>(1, x),
                -nonlinear_effect::<f64>(0, x),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                nonlinear_effect::<f64>(3, x),
                -nonlinear_effect::<f64>(2, x),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn basic_layout_and_reproducibility() {
        let scenario = Scenario::basic(1.0, 7);
        let (design, truth) = generate(&scenario).unwrap();
        assert_eq!(design.n(), 100);
        assert_eq!(design.p(), 400);
        assert_eq!(design.n_groups(), 100);
        let beta = truth.coefficients.as_ref().unwrap();
        assert_eq!(&beta.to_vec()[..4], &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(&beta.to_vec()[16..20], &[1.0, -1.0, 1.0, -1.0]);
        assert!(beta.iter().skip(20).all(|&b| b == 0.0));
        assert_eq!(truth.signal_groups, vec![0, 1, 2, 3, 4]);

        let (again, truth2) = generate(&scenario).unwrap();
        assert_eq!(design.y(), again.y());
        assert_eq!(truth.mean, truth2.mean);
        let (other, _) = generate(&Scenario::basic(1.0, 8)).unwrap();
        assert_ne!(design.y(), other.y());
    }

    #[test]
    fn basic_zero_effect_has_empty_truth() {
        let (_, truth) = generate(&Scenario::<f64>::basic(0.0, 3)).unwrap();
        assert!(truth.signal_groups.is_empty());
        assert!(truth
            .coefficients
            .as_ref()
            .unwrap()
            .iter()
            .all(|&b| b == 0.0));
        assert!(truth.mean.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn bspline_partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..80).map(|_| rng.random::<f64>()).collect();
        let basis = BSplineBasis::from_values(&values, 6).unwrap();
        for &x in values.iter().chain([0.0001, 0.5, 0.9999].iter()) {
            let b = basis.evaluate(x.clamp(
                *values
                    .iter()
                    .min_by(|a, b| a.partial_cmp(b).unwrap())
                    .unwrap(),
                *values
                    .iter()
                    .max_by(|a, b| a.partial_cmp(b).unwrap())
                    .unwrap(),
            ));
            assert_eq!(b.len(), 6);
            let sum: f64 = b.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(b.iter().all(|&v| v >= 0.0));
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let at_min = basis.evaluate(min);
        let at_max = basis.evaluate(max);
        assert_abs_diff_eq!(at_min[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at_max[5], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn semiparametric_groups_are_rank_deficient_by_one() {
        let mut scenario = Scenario::<f64>::semiparametric(11);
        scenario.n_groups = 8;
        scenario.n = 60;
        let (design, truth) = generate(&scenario).unwrap();
        assert_eq!(design.p(), 48);
        assert!(truth.coefficients.is_none());
        assert_eq!(truth.signal_groups, vec![0, 1, 2, 3, 4, 5]);
        let (_, transform) = orthonormalize(&design).unwrap();
        for &r in transform.ranks() {
            assert_eq!(r, 5);
        }
    }

    #[test]
    fn snp_truth_reflects_the_three_mechanisms() {
        let mut scenario = Scenario::<f64>::snp(1.0, 13);
        scenario.n_groups = 40;
        scenario.n = 200;
        let (design, truth) = generate(&scenario).unwrap();
        assert_eq!(design.p(), 80);
        assert_eq!(truth.signal_groups, vec![0, 1, 2]);
        let beta = truth.coefficients.as_ref().unwrap();
        let c_dom = beta[0];
        assert_eq!(beta[1], c_dom);
        assert_eq!(beta[2], 0.0);
        let c_rec = beta[3];
        assert!(c_rec > 0.0);
        let c_add = beta[4];
        assert_abs_diff_eq!(beta[5], 2.0 * c_add, epsilon = 1e-15);
        assert!(beta.iter().skip(6).all(|&b| b == 0.0));

        // Unit-variance scaling for each mechanism at maf 0.3.
        assert_abs_diff_eq!(c_dom, 1.0 / (0.51f64 * 0.49).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            c_rec,
            1.0 / (0.09f64 * 0.91).sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(c_add, 1.0 / (0.42f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn snp_recessive_mean_is_flat_below_two_copies() {
        let mut scenario = Scenario::<f64>::snp(1.0, 29);
        scenario.n_groups = 30;
        scenario.n = 150;
        let (design, truth) = generate(&scenario).unwrap();
        let rows: Vec<usize> = (0..design.n()).collect();
        let x = design.rows_in_original_order(&rows);
        let beta = truth.coefficients.as_ref().unwrap();
        for i in 0..design.n() {
            let mut mu = 0.0;
            for c in 0..design.p() {
                mu += x[[i, c]] * beta[c];
            }
            assert_abs_diff_eq!(mu, truth.mean[i], epsilon = 1e-12);
        }
        // At the recessive SNP, genotypes 0 and 1 contribute identically:
        // the heterozygote indicator of that SNP carries no weight.
        assert_eq!(beta[2], 0.0);
    }

    #[test]
    fn snp_genotype_frequencies_near_expectation() {
        let scenario = Scenario::<f64>::snp(1.0, 3);
        let (design, _) = generate(&scenario).unwrap();
        let rows: Vec<usize> = (0..design.n()).collect();
        let x = design.rows_in_original_order(&rows);
        let total = (design.n() * 500) as f64;
        let mut het = 0.0;
        let mut hom = 0.0;
        for i in 0..design.n() {
            for s in 0..500 {
                het += x[[i, 2 * s]];
                hom += x[[i, 2 * s + 1]];
            }
        }
        assert_abs_diff_eq!(het / total, 0.42, epsilon = 0.01);
        assert_abs_diff_eq!(hom / total, 0.09, epsilon = 0.01);
    }

    #[test]
    fn score_is_zero_at_the_truth_and_exact_at_null() {
        let scenario = Scenario::basic(0.8, 17);
        let (design, truth) = generate(&scenario).unwrap();
        let spec = PenaltySpec::new(PenaltyFamily::GroupLasso, Loss::Linear);
        let controls = PathControls {
            n_lambda: 12,
            ..PathControls::default()
        };
        let path = path::fit_path(&design, &spec, &controls).unwrap();
        let null = score(&path, 0, &design, &truth).unwrap();
        let b = 0.8;
        assert_abs_diff_eq!(
            null.rmse.unwrap(),
            b * (20.0f64 / 400.0).sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(null.model_size_groups, 0);
        assert_eq!(null.true_discoveries, 0);
        assert_eq!(null.false_discoveries, 0);

        let perfect = Truth {
            coefficients: Some(Array1::from(path.coefficients_at(5).to_vec())),
            mean: {
                let rows: Vec<usize> = (0..design.n()).collect();
                let x = design.rows_in_original_order(&rows);
                path.linear_predictor_at(5, &x).unwrap()
            },
            signal_groups: truth.signal_groups.clone(),
        };
        let s = score(&path, 5, &design, &perfect).unwrap();
        assert_abs_diff_eq!(s.rmse.unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.rme, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn study_runs_and_aggregates() {
        let mut scenario = Scenario::<f64>::basic(1.0, 23);
        scenario.n = 50;
        scenario.n_groups = 12;
        scenario.n_signal = 2;
        let controls = PathControls {
            n_lambda: 25,
            ..PathControls::default()
        };
        let result = run_study(&scenario, 2, 3, &controls).unwrap();
        assert_eq!(result.families.len(), 3);
        assert_eq!(result.scores.len(), 3);
        assert!(result.scores.iter().all(|f| f.len() == 2));
        let rows = result.summary_rows();
        assert_eq!(rows[0].0, "rmse");
        assert!(rows.iter().all(|(_, aggs)| aggs.len() == 3));
        for (_, aggs) in &rows {
            for a in aggs {
                assert!(a.mean.is_finite() && a.se.is_finite());
            }
        }
    }

    #[test]
    fn aggregate_mean_and_se() {
        let a = aggregate(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(a.mean, 2.5, epsilon = 1e-15);
        let sd: f64 = (10.0f64 / 6.0).sqrt();
        assert_abs_diff_eq!(a.se, sd / 2.0, epsilon = 1e-12);
        let single = aggregate(&[5.0]);
        assert_eq!(single.se, 0.0);
    }
}
