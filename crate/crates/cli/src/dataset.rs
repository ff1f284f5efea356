//! Dataset and group-map ingestion: delimiter-sniffed tabular text with a
//! header row, plus a two-column file assigning each predictor to a group.

use std::collections::HashMap;
use std::path::Path;

use grpdesc::{GroupedDesign, Loss};
use ndarray::{Array1, Array2};

use crate::errors::{CliError, Result};

/// Group names that mark covariates as never penalized.
const UNPENALIZED_NAMES: [&str; 2] = ["0", "unpenalized"];

#[derive(Debug)]
pub struct LoadedDataset {
    pub design: GroupedDesign<f64>,
    /// Per-group multipliers when any group is unpenalized; `None` leaves
    /// the default `sqrt(K_j)` weighting to the fitting engine.
    pub multipliers: Option<Vec<f64>>,
    /// Predictor column names in file order.
    pub columns: Vec<String>,
    /// Group name of each predictor column.
    pub group_names: Vec<String>,
}

/// Splits one line of delimiter-separated text.
fn split_line(line: &str, delimiter: char) -> Vec<String> {
    if delimiter == ' ' {
        line.split_whitespace().map(str::to_string).collect()
    } else {
        line.split(delimiter).map(|f| f.trim().to_string()).collect()
    }
}

/// Picks the delimiter as the most frequent of tab, comma, and semicolon
/// in the header, falling back to runs of whitespace.
fn sniff_delimiter(header: &str) -> char {
    let counts = [
        ('\t', header.matches('\t').count()),
        (',', header.matches(',').count()),
        (';', header.matches(';').count()),
    ];
    counts
        .iter()
        .max_by_key(|(_, c)| *c)
        .filter(|(_, c)| *c > 0)
        .map(|(d, _)| *d)
        .unwrap_or(' ')
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Parses the column-to-group map: one "column group" pair per line,
/// separated by the same delimiters as the data file.
fn read_group_map(path: &Path) -> Result<Vec<(String, String)>> {
    let lines = read_lines(path)?;
    let mut pairs = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_line(line, sniff_delimiter(line));
        if fields.len() != 2 {
            return Err(CliError::Data(format!(
                "{} line {}: expected 'column group', found {} fields",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        pairs.push((fields[0].clone(), fields[1].clone()));
    }
    if pairs.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no column-to-group assignments",
            path.display()
        )));
    }
    Ok(pairs)
}

/// Parses one numeric cell, rejecting missing markers.
fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("na") || trimmed.eq_ignore_ascii_case("nan")
    {
        return Err(CliError::Data(format!(
            "missing value at row {row}, column '{column}'"
        )));
    }
    trimmed.parse::<f64>().map_err(|_| {
        CliError::Data(format!(
            "non-numeric value '{trimmed}' at row {row}, column '{column}'"
        ))
    })
}

/// Reads a header-and-rows table, returning column names and row-major
/// values. Row numbers in errors are 1-based and exclude the header.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let lines = read_lines(path)?;
    let mut nonempty = lines.iter().filter(|l| !l.trim().is_empty());
    let header = nonempty
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty file", path.display())))?;
    let delimiter = sniff_delimiter(header);
    let columns = split_line(header, delimiter);
    let mut rows = Vec::new();
    for (i, line) in nonempty.enumerate() {
        let fields = split_line(line, delimiter);
        if fields.len() != columns.len() {
            return Err(CliError::Data(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                fields.len(),
                columns.len()
            )));
        }
        let mut row = Vec::with_capacity(fields.len());
        for (field, column) in fields.iter().zip(columns.iter()) {
            row.push(parse_cell(field, i + 1, column)?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok((columns, rows))
}

/// Loads a grouped design: every non-response column must be assigned a
/// group; group "0" or "unpenalized" collects covariates fit without
/// penalty.
pub fn load_dataset(
    data_path: &Path,
    groups_path: &Path,
    response: &str,
    loss: Loss,
) -> Result<LoadedDataset> {
    let (columns, rows) = read_table(data_path)?;
    let group_map = read_group_map(groups_path)?;

    let response_index = columns.iter().position(|c| c == response).ok_or_else(|| {
        CliError::Data(format!(
            "response column '{response}' not found in {}",
            data_path.display()
        ))
    })?;

    let mut assignment: HashMap<&str, &str> = HashMap::new();
    for (column, group) in &group_map {
        if assignment.insert(column.as_str(), group.as_str()).is_some() {
            return Err(CliError::Data(format!(
                "column '{column}' is assigned to more than one group"
            )));
        }
    }
    for (column, _) in &group_map {
        if !columns.iter().any(|c| c == column) {
            return Err(CliError::Data(format!(
                "groups file maps column '{column}' that is not in the data"
            )));
        }
        if column == response {
            return Err(CliError::Data(format!(
                "response column '{column}' cannot be assigned a group"
            )));
        }
    }

    let mut predictor_names = Vec::new();
    let mut group_names = Vec::new();
    for (c, name) in columns.iter().enumerate() {
        if c == response_index {
            continue;
        }
        let group = assignment.get(name.as_str()).ok_or_else(|| {
            CliError::Data(format!("column '{name}' has no group assignment"))
        })?;
        predictor_names.push(name.clone());
        group_names.push(if UNPENALIZED_NAMES.contains(group) {
            "unpenalized".to_string()
        } else {
            (*group).to_string()
        });
    }

    let n = rows.len();
    let p = predictor_names.len();
    if p == 0 {
        return Err(CliError::Data("no predictor columns".to_string()));
    }
    let mut x = Array2::zeros((n, p));
    let mut y = Array1::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let mut k = 0usize;
        for (c, &value) in row.iter().enumerate() {
            if c == response_index {
                y[i] = value;
            } else {
                x[[i, k]] = value;
                k += 1;
            }
        }
    }
    for (k, name) in predictor_names.iter().enumerate() {
        let first = x[[0, k]];
        if (1..n).all(|i| x[[i, k]] == first) {
            return Err(CliError::Data(format!("column '{name}' is constant")));
        }
    }

    let mut group_ids = Vec::with_capacity(p);
    let mut id_of: HashMap<&str, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    for name in &group_names {
        let next = id_of.len();
        let id = *id_of.entry(name.as_str()).or_insert(next);
        if id == labels.len() {
            labels.push(name.clone());
        }
        group_ids.push(id);
    }

    let mut design = GroupedDesign::new(x, y, &group_ids, loss)?;
    design.set_group_labels(labels.clone())?;

    let multipliers = if labels.iter().any(|l| l == "unpenalized") {
        let mut sizes = vec![0usize; labels.len()];
        for &g in &group_ids {
            sizes[g] += 1;
        }
        Some(
            labels
                .iter()
                .zip(sizes.iter())
                .map(|(label, &k)| {
                    if label == "unpenalized" {
                        0.0
                    } else {
                        (k as f64).sqrt()
                    }
                })
                .collect(),
        )
    } else {
        None
    };

    Ok(LoadedDataset {
        design,
        multipliers,
        columns: predictor_names,
        group_names,
    })
}

/// Reads prediction rows containing at least the given columns, in any
/// order; extra columns are ignored.
pub fn load_matrix(data_path: &Path, wanted: &[String]) -> Result<Array2<f64>> {
    let (columns, rows) = read_table(data_path)?;
    let mut index = Vec::with_capacity(wanted.len());
    for name in wanted {
        let pos = columns.iter().position(|c| c == name).ok_or_else(|| {
            CliError::Data(format!(
                "column '{name}' required by the model is missing from {}",
                data_path.display()
            ))
        })?;
        index.push(pos);
    }
    let mut x = Array2::zeros((rows.len(), wanted.len()));
    for (i, row) in rows.iter().enumerate() {
        for (k, &pos) in index.iter().enumerate() {
            x[[i, k]] = row[pos];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::TempDir;

    fn write_file(dir: &TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_comma_separated_with_groups() {
        let dir = TempDir::new().unwrap();
        let data = write_file(
            &dir,
            "d.csv",
            "y,x1,x2,x3\n1.0,0.5,1.0,2.0\n2.0,1.5,0.0,1.0\n0.5,2.5,1.0,0.0\n",
        );
        let groups = write_file(&dir, "g.txt", "x1 a\nx2 a\nx3 b\n");
        let loaded = load_dataset(&data, &groups, "y", Loss::Linear).unwrap();
        assert_eq!(loaded.design.n(), 3);
        assert_eq!(loaded.design.p(), 3);
        assert_eq!(loaded.design.n_groups(), 2);
        assert_eq!(loaded.columns, vec!["x1", "x2", "x3"]);
        assert!(loaded.multipliers.is_none());
    }

    #[test]
    fn single_group_of_two_predictors() {
        let dir = TempDir::new().unwrap();
        let data = write_file(&dir, "d.tsv", "y\tx1\tx2\n1\t2\t3\n2\t4\t1\n3\t0\t5\n");
        let groups = write_file(&dir, "g.txt", "x1 g\nx2 g\n");
        let loaded = load_dataset(&data, &groups, "y", Loss::Linear).unwrap();
        assert_eq!(loaded.design.n_groups(), 1);
        assert_eq!(loaded.design.p(), 2);
    }

    #[test]
    fn unpenalized_marker_zeroes_the_multiplier() {
        let dir = TempDir::new().unwrap();
        let data = write_file(
            &dir,
            "d.csv",
            "y,x1,x2,x3\n1,2,1,4\n2,3,2,2\n3,1,0,1\n4,5,3,3\n",
        );
        let groups = write_file(&dir, "g.txt", "x1 0\nx2 a\nx3 a\n");
        let loaded = load_dataset(&data, &groups, "y", Loss::Linear).unwrap();
        let m = loaded.multipliers.unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0], 0.0);
        assert!((m[1] - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(loaded.design.group_labels()[0], "unpenalized");
    }

    #[test]
    fn errors_carry_coordinates() {
        let dir = TempDir::new().unwrap();
        let data = write_file(&dir, "d.csv", "y,x1\n1.0,oops\n2.0,3.0\n");
        let groups = write_file(&dir, "g.txt", "x1 a\n");
        let err = load_dataset(&data, &groups, "y", Loss::Linear).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("x1"), "{msg}");

        let data = write_file(&dir, "d2.csv", "y,x1\n1.0,\n2.0,3.0\n");
        let err = load_dataset(&data, &groups, "y", Loss::Linear).unwrap_err();
        assert!(err.to_string().contains("missing value"), "{err}");
    }

    #[test]
    fn absent_mapped_column_and_unmapped_column_are_rejected() {
        let dir = TempDir::new().unwrap();
        let data = write_file(&dir, "d.csv", "y,x1,x2\n1,2,3\n2,4,5\n3,0,1\n");
        let both = write_file(&dir, "g1.txt", "x1 a\nx2 a\nghost b\n");
        let err = load_dataset(&data, &both, "y", Loss::Linear).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");

        let partial = write_file(&dir, "g2.txt", "x1 a\n");
        let err = load_dataset(&data, &partial, "y", Loss::Linear).unwrap_err();
        assert!(err.to_string().contains("x2"), "{err}");
    }

    #[test]
    fn constant_column_is_rejected_by_name() {
        let dir = TempDir::new().unwrap();
        let data = write_file(&dir, "d.csv", "y,x1,x2\n1,2,7\n2,4,7\n3,0,7\n");
        let groups = write_file(&dir, "g.txt", "x1 a\nx2 b\n");
        let err = load_dataset(&data, &groups, "y", Loss::Linear).unwrap_err();
        assert!(err.to_string().contains("'x2' is constant"), "{err}");
    }
}
