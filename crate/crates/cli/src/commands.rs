//! Subcommand implementations: path fitting, cross-validation, prediction
//! from a stored artifact, replicated benchmark studies, and the hidden
//! oracle self-check.

use std::fmt::Write as _;
use std::path::Path;

use grpdesc::cv::Metric;
use grpdesc::logistic::sigmoid;
use grpdesc::oracle::{brute_minimize, naive_objective};
use grpdesc::ortho::orthonormalize;
use grpdesc::penalty::objective;
use grpdesc::sim::{run_study, Scenario};
use grpdesc::{
    cross_validate, fit_linear, fit_path, GroupedDesign, Loss, PathControls, PenaltyFamily,
    PenaltySpec, SolverControls,
};
use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::artifact::{file_digest, PathArtifact};
use crate::cli::{CvArgs, FitArgs, PredictArgs, SelfcheckArgs, SimulateArgs};
use crate::dataset::{load_dataset, load_matrix, LoadedDataset};
use crate::errors::{CliError, Result};
use crate::plot;

fn build_spec(
    family: PenaltyFamily,
    gamma: Option<f64>,
    loss: Loss,
    multipliers: Option<Vec<f64>>,
) -> Result<PenaltySpec<f64>> {
    let mut spec = PenaltySpec::new(family, loss);
    if let Some(g) = gamma {
        spec = spec.with_gamma(g)?;
    }
    if let Some(m) = multipliers {
        spec = spec.with_multipliers(m)?;
    }
    Ok(spec)
}

fn path_controls(n_lambda: usize, min_ratio: Option<f64>) -> PathControls<f64> {
    PathControls {
        n_lambda,
        min_ratio,
        ..PathControls::default()
    }
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn prepare_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    Ok(())
}

fn report_loaded(loaded: &LoadedDataset) {
    println!(
        "loaded {} rows, {} predictors in {} groups",
        loaded.design.n(),
        loaded.design.p(),
        loaded.design.n_groups()
    );
}

pub fn run_fit(args: &FitArgs) -> Result<()> {
    let loss = args.data.loss.into();
    let loaded = load_dataset(&args.data.data, &args.data.groups, &args.data.response, loss)?;
    report_loaded(&loaded);
    let spec = build_spec(
        args.model.family.into(),
        args.model.gamma,
        loss,
        loaded.multipliers.clone(),
    )?;
    let controls = path_controls(args.model.n_lambda, args.model.min_ratio);
    let path = fit_path(&loaded.design, &spec, &controls)?;
    println!(
        "fit {} path with {} penalty levels (lambda {} to {})",
        spec.family.label(),
        path.len(),
        path.lambdas[0],
        path.lambdas[path.len() - 1]
    );
    if let Some(kept) = path.saturated_at {
        println!("deviance saturation truncated the grid to {kept} levels");
    }

    prepare_out_dir(&args.out)?;
    let digest = file_digest(&args.data.data)?;
    log::debug!("input digest {digest}");
    let artifact = PathArtifact::from_fit(
        &path,
        spec.family.label(),
        spec.gamma,
        digest,
        args.data.response.clone(),
        loaded.columns.clone(),
        loaded.group_names.clone(),
    );
    let artifact_path = args.out.join("path.json");
    artifact.write(&artifact_path)?;
    println!("wrote {}", artifact_path.display());

    let mut coef_table = String::from("lambda_index\tlambda\tcolumn\tgroup\tcoefficient\n");
    for i in 0..path.len() {
        let row = path.coefficients_at(i);
        for (c, name) in loaded.columns.iter().enumerate() {
            let _ = writeln!(
                coef_table,
                "{i}\t{}\t{name}\t{}\t{}",
                path.lambdas[i], loaded.group_names[c], row[c]
            );
        }
    }
    write_text(&args.out.join("coefficients.tsv"), &coef_table)?;

    let mut summary = String::from("index\tlambda\tdf_groups\tloss\titers\tconverged\n");
    for i in 0..path.len() {
        let _ = writeln!(
            summary,
            "{i}\t{}\t{}\t{}\t{}\t{}",
            path.lambdas[i], path.df_groups[i], path.loss[i], path.iters[i], path.converged[i]
        );
    }
    write_text(&args.out.join("path_summary.tsv"), &summary)?;

    if args.plots {
        let group_of = loaded.design.group_of_original();
        let coefs: Vec<Vec<f64>> = (0..path.len())
            .map(|i| path.coefficients_at(i).to_vec())
            .collect();
        let svg = plot::coefficient_paths_svg(&path.lambdas, &coefs, &group_of);
        write_text(&args.out.join("coefficient_paths.svg"), &svg)?;
    }
    Ok(())
}

pub fn run_cv(args: &CvArgs) -> Result<()> {
    let loss = args.data.loss.into();
    let loaded = load_dataset(&args.data.data, &args.data.groups, &args.data.response, loss)?;
    report_loaded(&loaded);
    let spec = build_spec(
        args.model.family.into(),
        args.model.gamma,
        loss,
        loaded.multipliers.clone(),
    )?;
    let controls = path_controls(args.model.n_lambda, args.model.min_ratio);
    let metric = args.metric.map(Metric::from);
    log::debug!(
        "assigning {} rows to {} folds with seed {}",
        loaded.design.n(),
        args.folds,
        args.seed
    );
    let cv = cross_validate(&loaded.design, &spec, args.folds, args.seed, metric, &controls)?;
    println!(
        "cross-validated {} over {} penalty levels with {} folds",
        spec.family.label(),
        cv.lambdas.len(),
        args.folds
    );
    let best = cv.lambda_min_index;
    println!(
        "selected lambda {} (index {best}): {} {} (se {})",
        cv.lambdas[best],
        cv.metric.label(),
        cv.cve[best],
        cv.cvse[best]
    );

    prepare_out_dir(&args.out)?;
    let mut table = String::from("index\tlambda\tcve\tcvse\tselected\n");
    for i in 0..cv.lambdas.len() {
        let _ = writeln!(
            table,
            "{i}\t{}\t{}\t{}\t{}",
            cv.lambdas[i],
            cv.cve[i],
            cv.cvse[i],
            if i == best { 1 } else { 0 }
        );
    }
    write_text(&args.out.join("cv.tsv"), &table)?;

    if args.plots {
        let svg = plot::cv_curve_svg(&cv.lambdas, &cv.cve, &cv.cvse, best);
        write_text(&args.out.join("cv_error.svg"), &svg)?;
    }
    Ok(())
}

pub fn run_predict(args: &PredictArgs) -> Result<()> {
    let artifact = PathArtifact::read(&args.model)?;
    let x = load_matrix(&args.data, &artifact.columns)?;
    let index = match (args.lambda, args.index) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "pass either --lambda or --index, not both".to_string(),
            ))
        }
        (Some(lam), None) => artifact.nearest_index(lam),
        (None, Some(i)) => {
            if i >= artifact.len() {
                return Err(CliError::Usage(format!(
                    "--index {i} out of bounds for {} penalty levels",
                    artifact.len()
                )));
            }
            i
        }
        (None, None) => artifact.len() - 1,
    };
    let eta = artifact.linear_predictor(index, &x)?;
    let logistic = artifact.loss_kind()? == Loss::Logistic;
    println!(
        "predicted {} rows at lambda {} (index {index})",
        x.nrows(),
        artifact.lambdas[index]
    );

    prepare_out_dir(&args.out)?;
    let header = if logistic { "row\tprobability" } else { "row\tprediction" };
    let mut table = String::from(header);
    table.push('\n');
    for (i, &e) in eta.iter().enumerate() {
        let value = if logistic { sigmoid(e) } else { e };
        let _ = writeln!(table, "{i}\t{value}");
    }
    write_text(&args.out.join("predictions.tsv"), &table)?;
    Ok(())
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let mut scenario: Scenario<f64> = match args.kind {
        crate::cli::KindArg::Basic => Scenario::basic(args.beta, args.seed),
        crate::cli::KindArg::Semiparametric => Scenario::semiparametric(args.seed),
        crate::cli::KindArg::Snp => Scenario::snp(args.beta, args.seed),
    };
    if let Some(n) = args.n {
        scenario.n = n;
    }
    if let Some(groups) = args.n_groups {
        scenario.n_groups = groups;
    }
    let controls = path_controls(args.n_lambda, None);
    let result = run_study(&scenario, args.replicates, args.folds, &controls)?;

    println!(
        "scenario {}: {} replicates, {}-fold selection, {} groups of data per replicate",
        scenario.kind.label(),
        args.replicates,
        args.folds,
        scenario.n_groups
    );
    let labels: Vec<&str> = result.families.iter().map(|f| f.label()).collect();
    let rows = result.summary_rows();
    let mut header = format!("{:<22}", "metric");
    for label in &labels {
        let _ = write!(header, "{:<22}", label);
    }
    println!("{}", header.trim_end());
    for (metric, aggregates) in &rows {
        let mut line = format!("{metric:<22}");
        for a in aggregates {
            let _ = write!(line, "{:<22}", format!("{:.4} ({:.4})", a.mean, a.se));
        }
        println!("{}", line.trim_end());
    }

    prepare_out_dir(&args.out)?;
    let mut table = String::from("metric");
    for label in &labels {
        let _ = write!(table, "\t{label}_mean\t{label}_se");
    }
    table.push('\n');
    for (metric, aggregates) in &rows {
        let _ = write!(table, "{metric}");
        for a in aggregates {
            let _ = write!(table, "\t{}\t{}", a.mean, a.se);
        }
        table.push('\n');
    }
    write_text(
        &args.out.join(format!("simulate_{}.tsv", scenario.kind.label())),
        &table,
    )?;
    Ok(())
}

pub fn run_selfcheck(args: &SelfcheckArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut checks = 0usize;

    for instance in 0..4u64 {
        let n = 24;
        let group_of = [0usize, 0, 1, 1];
        let x = Array2::from_shape_fn((n, 4), |_| rng.sample::<f64, _>(StandardNormal));
        let y = Array1::from_shape_fn(n, |i| {
            x[[i, 0]] - 0.5 * x[[i, 3]] + 0.3 * rng.sample::<f64, _>(StandardNormal)
        });
        let design = GroupedDesign::new(x, y, &group_of, Loss::Linear)?;
        let (ortho, _) = orthonormalize(&design)?;
        let spec = PenaltySpec::new(PenaltyFamily::GroupLasso, Loss::Linear);
        let lam = 0.05 + 0.1 * instance as f64;

        let solution = brute_minimize(&ortho, lam, &spec, 8, args.seed + instance)?;
        let controls = SolverControls {
            tol: 1e-12,
            ..SolverControls::default()
        };
        let fit = fit_linear(&ortho, lam, &spec, None, &controls)?;
        let solver_value = objective(&ortho, fit.beta0, &fit.beta, lam, &spec)?.value;
        let gap = (solver_value - solution.objective).abs() / solution.objective.max(1.0);
        if gap > 1e-6 {
            return Err(CliError::Numerical(format!(
                "solver missed the oracle optimum on instance {instance}: relative gap {gap:e}"
            )));
        }
        println!("oracle equivalence instance {instance}: relative gap {gap:.2e}");
        checks += 1;

        let beta = Array1::from_shape_fn(ortho.p_tilde(), |_| {
            rng.sample::<f64, _>(StandardNormal)
        });
        let naive = naive_objective(&ortho, fit.beta0, &beta, lam, &spec)?;
        let core = objective(&ortho, fit.beta0, &beta, lam, &spec)?.value;
        let diff = (naive - core).abs() / core.abs().max(1.0);
        if diff > 1e-12 {
            return Err(CliError::Numerical(format!(
                "objective implementations disagree on instance {instance}: {diff:e}"
            )));
        }
        checks += 1;
    }
    println!("selfcheck passed ({checks} checks)");
    Ok(())
}
