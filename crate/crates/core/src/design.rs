//! Response plus column-grouped design matrix.

use ndarray::{Array1, Array2, Axis, s};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::float::Float;

/// Loss family of the fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Linear,
    Logistic,
}

impl Loss {
    pub fn label(self) -> &'static str {
        match self {
            Loss::Linear => "linear",
            Loss::Logistic => "logistic",
        }
    }
}

/// A design matrix whose columns are partitioned into non-overlapping
/// groups, together with the response.
///
/// Columns are permuted at construction so each group occupies a contiguous
/// span; `original_index` maps the internal column order back to the order
/// the caller supplied. Group order follows first appearance in `group_of`.
#[derive(Debug, Clone)]
pub struct GroupedDesign<F: Float> {
    x: Array2<F>,
    y: Array1<F>,
    loss: Loss,
    group_ranges: Vec<Range<usize>>,
    group_labels: Vec<String>,
    original_index: Vec<usize>,
}

impl<F: Float> GroupedDesign<F> {
    /// Builds a design from a matrix in caller column order and a per-column
    /// group id. Ids are arbitrary; groups are ordered by first appearance.
    pub fn new(x: Array2<F>, y: Array1<F>, group_of: &[usize], loss: Loss) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Data("design matrix is empty".into()));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!(
                "response has length {}, design has {n} rows",
                y.len()
            )));
        }
        if group_of.len() != p {
            return Err(Error::Dimension(format!(
                "group map has length {}, design has {p} columns",
                group_of.len()
            )));
        }
        if let Some((i, j)) = first_non_finite(&x) {
            return Err(Error::Data(format!(
                "non-finite value in design at row {i}, column {j}"
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite response at row {i}")));
        }
        if loss == Loss::Logistic {
            validate_binary(&y)?;
        }

        let mut group_ids: Vec<usize> = Vec::new();
        for &g in group_of {
            if !group_ids.contains(&g) {
                group_ids.push(g);
            }
        }
        let mut order: Vec<usize> = Vec::with_capacity(p);
        let mut group_ranges = Vec::with_capacity(group_ids.len());
        for &g in &group_ids {
            let start = order.len();
            order.extend(group_of.iter().enumerate().filter(|(_, &id)| id == g).map(|(c, _)| c));
            group_ranges.push(start..order.len());
        }
        let mut original_index = vec![0usize; p];
        let mut xp = Array2::zeros((n, p));
        for (internal, &orig) in order.iter().enumerate() {
            xp.column_mut(internal).assign(&x.column(orig));
            original_index[internal] = orig;
        }
        let group_labels = group_ids.iter().map(|g| format!("g{g}")).collect();
        Ok(GroupedDesign {
            x: xp,
            y,
            loss,
            group_ranges,
            group_labels,
            original_index,
        })
    }

    /// Replaces the default group labels; one label per group.
    pub fn set_group_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.group_ranges.len() {
            return Err(Error::Dimension(format!(
                "{} labels supplied for {} groups",
                labels.len(),
                self.group_ranges.len()
            )));
        }
        self.group_labels = labels;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.group_ranges.len()
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn y(&self) -> &Array1<F> {
        &self.y
    }

    /// Design matrix in internal (group-contiguous) column order.
    pub fn x(&self) -> &Array2<F> {
        &self.x
    }

    /// Column span of group `j` in internal order.
    pub fn group_range(&self, j: usize) -> Range<usize> {
        self.group_ranges[j].clone()
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    /// Original group dimensions `K_j`.
    pub fn original_dims(&self) -> Vec<usize> {
        self.group_ranges.iter().map(|r| r.len()).collect()
    }

    /// Maps internal column position to the caller's column index.
    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    /// Group index of each column in the caller's original order.
    pub fn group_of_original(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.p()];
        for (j, range) in self.group_ranges.iter().enumerate() {
            for internal in range.clone() {
                out[self.original_index[internal]] = j;
            }
        }
        out
    }

    /// Extracts the given rows with columns restored to caller order.
    pub fn rows_in_original_order(&self, rows: &[usize]) -> Array2<F> {
        let mut out = Array2::zeros((rows.len(), self.p()));
        for (r, &row) in rows.iter().enumerate() {
            for internal in 0..self.p() {
                out[[r, self.original_index[internal]]] = self.x[[row, internal]];
            }
        }
        out
    }

    /// Row-subset design sharing the group structure, used by
    /// cross-validation. Fails if a logistic subset loses a class.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("row subset is empty".into()));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::Dimension(format!(
                "row index {bad} out of bounds for {} rows",
                self.n()
            )));
        }
        let y = self.y.select(Axis(0), rows);
        if self.loss == Loss::Logistic {
            validate_binary(&y)?;
        }
        Ok(GroupedDesign {
            x: self.x.select(Axis(0), rows),
            y,
            loss: self.loss,
            group_ranges: self.group_ranges.clone(),
            group_labels: self.group_labels.clone(),
            original_index: self.original_index.clone(),
        })
    }

    pub(crate) fn group_columns(&self, j: usize) -> ndarray::ArrayView2<'_, F> {
        self.x.slice(s![.., self.group_ranges[j].clone()])
    }
}

fn validate_binary<F: Float>(y: &Array1<F>) -> Result<()> {
    let one = F::one();
    let zero = F::zero();
    if let Some(i) = y.iter().position(|&v| v != zero && v != one) {
        return Err(Error::Data(format!(
            "logistic response must be 0 or 1, found {} at row {i}",
            y[i]
        )));
    }
    let ones = y.iter().filter(|&&v| v == one).count();
    if ones == 0 || ones == y.len() {
        return Err(Error::Data(
            "logistic response contains a single class".into(),
        ));
    }
    Ok(())
}

fn first_non_finite<F: Float>(x: &Array2<F>) -> Option<(usize, usize)> {
    for ((i, j), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Some((i, j));
        }
    }
    None
}
