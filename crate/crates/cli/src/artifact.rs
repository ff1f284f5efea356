//! Stored path artifact: the fitted path plus enough metadata to apply it
//! to new data and to audit where it came from. Serialized as structured
//! human-readable text with a format-version field; writing is
//! deterministic, so write-read-write round-trips byte-identically.

use std::path::Path;

use grpdesc::{FitPath, Loss};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::errors::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PathArtifact {
    pub format_version: u32,
    pub software_version: String,
    pub family: String,
    pub gamma: f64,
    pub loss: String,
    pub input_sha256: String,
    pub response_column: String,
    /// Predictor names in the column order of `coefficients`.
    pub columns: Vec<String>,
    /// Group name of each predictor.
    pub groups: Vec<String>,
    pub n_samples: usize,
    pub lambdas: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// Training-column means subtracted before applying coefficients.
    pub column_means: Vec<f64>,
    /// Original-scale coefficients, one row per penalty level.
    pub coefficients: Vec<Vec<f64>>,
    pub df_groups: Vec<usize>,
    pub loss_values: Vec<f64>,
    pub iters: Vec<usize>,
    pub converged: Vec<bool>,
    pub saturated_at: Option<usize>,
}

impl PathArtifact {
    pub fn from_fit(
        path: &FitPath<f64>,
        family: &str,
        gamma: f64,
        input_sha256: String,
        response_column: String,
        columns: Vec<String>,
        groups: Vec<String>,
    ) -> Self {
        PathArtifact {
            format_version: FORMAT_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            family: family.to_string(),
            gamma,
            loss: path.loss_kind.label().to_string(),
            input_sha256,
            response_column,
            columns,
            groups,
            n_samples: path.n_samples,
            lambdas: path.lambdas.clone(),
            intercepts: path.intercepts.clone(),
            column_means: path.column_means.to_vec(),
            coefficients: (0..path.len())
                .map(|i| path.coefficients_at(i).to_vec())
                .collect(),
            df_groups: path.df_groups.clone(),
            loss_values: path.loss.clone(),
            iters: path.iters.clone(),
            converged: path.converged.clone(),
            saturated_at: path.saturated_at,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("could not serialize the artifact: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let artifact: PathArtifact = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: not a path artifact: {e}", path.display())))?;
        if artifact.format_version != FORMAT_VERSION {
            return Err(CliError::Data(format!(
                "{}: artifact format version {} is not supported (expected {FORMAT_VERSION})",
                path.display(),
                artifact.format_version
            )));
        }
        Ok(artifact)
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn loss_kind(&self) -> Result<Loss> {
        match self.loss.as_str() {
            "linear" => Ok(Loss::Linear),
            "logistic" => Ok(Loss::Logistic),
            other => Err(CliError::Data(format!("unknown loss '{other}' in artifact"))),
        }
    }

    /// Index of the penalty level closest to `lam`.
    pub fn nearest_index(&self, lam: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &l) in self.lambdas.iter().enumerate() {
            let d = (l - lam).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Linear predictor at one penalty level for rows in artifact column
    /// order.
    pub fn linear_predictor(&self, index: usize, x: &Array2<f64>) -> Result<Array1<f64>> {
        if index >= self.len() {
            return Err(CliError::Data(format!(
                "penalty index {index} out of bounds for {} levels",
                self.len()
            )));
        }
        if x.ncols() != self.columns.len() {
            return Err(CliError::Data(format!(
                "prediction rows have {} columns, model expects {}",
                x.ncols(),
                self.columns.len()
            )));
        }
        let coefs = &self.coefficients[index];
        let mut eta = Array1::from_elem(x.nrows(), self.intercepts[index]);
        for i in 0..x.nrows() {
            for c in 0..x.ncols() {
                eta[i] += (x[[i, c]] - self.column_means[c]) * coefs[c];
            }
        }
        Ok(eta)
    }
}

/// Hex SHA-256 digest of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
