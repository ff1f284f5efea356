//! Per-group orthonormalization of a grouped design.
//!
//! Each group block `X_j` (after column centering) is decomposed as
//! `(1/n) X_jᵀX_j = Q Λ Qᵀ` and replaced by `B_j = X_j Q_r Λ_r^{-1/2}`,
//! keeping only eigenvalues above a relative tolerance. The resulting block
//! satisfies `(1/n) B_jᵀB_j = I`, which makes every group update of the
//! solvers a closed-form thresholding step. Rank-deficient groups simply get
//! fewer orthonormalized columns; the back transform returns coefficients on
//! the original scale and in the caller's column order.

use ndarray::{Array1, Array2, s};
use std::ops::Range;

use crate::design::{GroupedDesign, Loss};
use crate::error::{Error, Result};
use crate::float::Float;

/// Default relative eigenvalue cutoff: directions with eigenvalue at or
/// below `EIGEN_TOLERANCE` times the group's largest are dropped.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

/// A grouped design after centering and per-group orthonormalization.
///
/// The response is kept on its original scale; for the linear loss the
/// optimal intercept is therefore the response mean at every penalty level,
/// because all predictor columns are centered.
#[derive(Debug, Clone)]
pub struct OrthonormalDesign<F: Float> {
    blocks: Vec<Array2<F>>,
    y: Array1<F>,
    y_mean: F,
    loss: Loss,
    tilde_ranges: Vec<Range<usize>>,
    original_dims: Vec<usize>,
    group_labels: Vec<String>,
}

impl<F: Float> OrthonormalDesign<F> {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Total number of orthonormalized columns across groups.
    pub fn p_tilde(&self) -> usize {
        self.tilde_ranges.last().map_or(0, |r| r.end)
    }

    pub fn n_groups(&self) -> usize {
        self.blocks.len()
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn y(&self) -> &Array1<F> {
        &self.y
    }

    pub fn y_mean(&self) -> F {
        self.y_mean
    }

    /// Orthonormalized block of group `j`, shape `n × rank_j`.
    pub fn block(&self, j: usize) -> &Array2<F> {
        &self.blocks[j]
    }

    /// Span of group `j` within a concatenated coefficient vector.
    pub fn tilde_range(&self, j: usize) -> Range<usize> {
        self.tilde_ranges[j].clone()
    }

    /// Original (pre-orthonormalization) group dimensions `K_j`.
    pub fn original_dims(&self) -> &[usize] {
        &self.original_dims
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    /// Linear predictor `beta0 + Σ_j B_j β_j` on the orthonormalized scale.
    pub fn linear_predictor(&self, beta0: F, beta: &Array1<F>) -> Array1<F> {
        let mut eta = Array1::from_elem(self.n(), beta0);
        for (j, block) in self.blocks.iter().enumerate() {
            let coef = beta.slice(s![self.tilde_ranges[j].clone()]);
            if coef.iter().any(|&c| c != F::zero()) {
                eta += &block.dot(&coef);
            }
        }
        eta
    }

    /// Concatenates the group blocks into a single `n × p_tilde` matrix.
    pub fn tilde_matrix(&self) -> Array2<F> {
        let mut out = Array2::zeros((self.n(), self.p_tilde()));
        for (j, block) in self.blocks.iter().enumerate() {
            out.slice_mut(s![.., self.tilde_ranges[j].clone()])
                .assign(block);
        }
        out
    }
}

/// The data needed to undo orthonormalization: per-group change of basis,
/// column means, and the caller's column order.
#[derive(Debug, Clone)]
pub struct OrthoTransform<F: Float> {
    bases: Vec<Array2<F>>,
    ranks: Vec<usize>,
    column_means: Array1<F>,
    y_mean: F,
    tilde_ranges: Vec<Range<usize>>,
    group_columns_original: Vec<Vec<usize>>,
}

impl<F: Float> OrthoTransform<F> {
    /// Retained rank of each group.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Change-of-basis matrix of group `j`, shape `K_j × rank_j`.
    pub fn basis(&self, j: usize) -> &Array2<F> {
        &self.bases[j]
    }

    /// Column means of the design, indexed in the caller's column order.
    pub fn column_means(&self) -> &Array1<F> {
        &self.column_means
    }

    pub fn y_mean(&self) -> F {
        self.y_mean
    }

    /// Maps a coefficient vector on the orthonormalized scale back to the
    /// original scale, in the caller's column order: `β_j = basis_j β̃_j`.
    pub fn back_transform(&self, beta_tilde: &Array1<F>) -> Array1<F> {
        let p: usize = self.group_columns_original.iter().map(Vec::len).sum();
        let mut out = Array1::zeros(p);
        for (j, cols) in self.group_columns_original.iter().enumerate() {
            let coef = beta_tilde.slice(s![self.tilde_ranges[j].clone()]);
            let original = self.bases[j].dot(&coef);
            for (k, &col) in cols.iter().enumerate() {
                out[col] = original[k];
            }
        }
        out
    }
}

/// Centers and orthonormalizes each group with the default eigenvalue
/// tolerance.
pub fn orthonormalize<F: Float>(
    design: &GroupedDesign<F>,
) -> Result<(OrthonormalDesign<F>, OrthoTransform<F>)> {
    orthonormalize_with(design, F::cast(EIGEN_TOLERANCE))
}

/// Centers and orthonormalizes each group, dropping eigendirections whose
/// eigenvalue is at or below `tolerance` times the group's largest. Fails if
/// a group has no variation at all after centering.
pub fn orthonormalize_with<F: Float>(
    design: &GroupedDesign<F>,
    tolerance: F,
) -> Result<(OrthonormalDesign<F>, OrthoTransform<F>)> {
    let n = design.n();
    let nf = F::from_count(n);
    let mut column_means = Array1::zeros(design.p());
    let mut blocks = Vec::with_capacity(design.n_groups());
    let mut bases = Vec::with_capacity(design.n_groups());
    let mut ranks = Vec::with_capacity(design.n_groups());
    let mut tilde_ranges = Vec::with_capacity(design.n_groups());
    let mut group_columns_original = Vec::with_capacity(design.n_groups());
    let mut offset = 0usize;

    for j in 0..design.n_groups() {
        let cols = design.group_range(j);
        let mut centered = design.group_columns(j).to_owned();
        for (local, col) in cols.clone().enumerate() {
            let mean = centered.column(local).sum() / nf;
            centered.column_mut(local).mapv_inplace(|v| v - mean);
            column_means[design.original_index()[col]] = mean;
        }

        let k = centered.ncols();
        let mut scatter = centered.t().dot(&centered) / nf;
        for a in 0..k {
            for b in (a + 1)..k {
                let sym = (scatter[[a, b]] + scatter[[b, a]]) / F::cast(2.0);
                scatter[[a, b]] = sym;
                scatter[[b, a]] = sym;
            }
        }
        let (values, vectors) = jacobi_eigen(&scatter);
        let largest = values[0];
        let rank = values
            .iter()
            .take_while(|&&v| v > tolerance * largest && v > F::zero())
            .count();
        if rank == 0 {
            return Err(Error::Data(format!(
                "group {} has no variation after centering",
                design.group_labels()[j]
            )));
        }
        let mut basis = Array2::zeros((k, rank));
        for r in 0..rank {
            let scale = values[r].sqrt().recip();
            basis.column_mut(r).assign(&(&vectors.column(r) * scale));
        }
        blocks.push(centered.dot(&basis));
        bases.push(basis);
        ranks.push(rank);
        tilde_ranges.push(offset..offset + rank);
        offset += rank;
        group_columns_original.push(cols.map(|c| design.original_index()[c]).collect());
    }

    let y_mean = design.y().sum() / nf;
    let ortho = OrthonormalDesign {
        blocks,
        y: design.y().clone(),
        y_mean,
        loss: design.loss(),
        tilde_ranges: tilde_ranges.clone(),
        original_dims: design.original_dims(),
        group_labels: design.group_labels().to_vec(),
    };
    let transform = OrthoTransform {
        bases,
        ranks,
        column_means,
        y_mean,
        tilde_ranges,
        group_columns_original,
    };
    Ok((ortho, transform))
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in descending order with matching
/// eigenvector columns.
pub(crate) fn jacobi_eigen<F: Float>(matrix: &Array2<F>) -> (Array1<F>, Array2<F>) {
    let k = matrix.nrows();
    assert_eq!(k, matrix.ncols(), "jacobi_eigen needs a square matrix");
    let mut a = matrix.clone();
    let mut v: Array2<F> = Array2::eye(k);
    if k > 1 {
        let total: F = a.iter().map(|&x| x * x).sum();
        let eps = F::epsilon();
        let threshold = total * eps * eps;
        for _sweep in 0..100 {
            let off: F = off_diagonal_sq(&a);
            if off <= threshold {
                break;
            }
            for p in 0..k - 1 {
                for q in (p + 1)..k {
                    let apq = a[[p, q]];
                    if apq == F::zero() {
                        continue;
                    }
                    let theta = (a[[q, q]] - a[[p, p]]) / (F::cast(2.0) * apq);
                    let t = if theta.abs() > F::cast(1e150) {
                        (F::cast(2.0) * theta).recip()
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt())
                    };
                    let c = (t * t + F::one()).sqrt().recip();
                    let s = t * c;
                    for i in 0..k {
                        let aip = a[[i, p]];
                        let aiq = a[[i, q]];
                        a[[i, p]] = c * aip - s * aiq;
                        a[[i, q]] = s * aip + c * aiq;
                    }
                    for i in 0..k {
                        let api = a[[p, i]];
                        let aqi = a[[q, i]];
                        a[[p, i]] = c * api - s * aqi;
                        a[[q, i]] = s * api + c * aqi;
                    }
                    for i in 0..k {
                        let vip = v[[i, p]];
                        let viq = v[[i, q]];
                        v[[i, p]] = c * vip - s * viq;
                        v[[i, q]] = s * vip + c * viq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        a[[j, j]]
            .partial_cmp(&a[[i, i]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut values = Array1::zeros(k);
    let mut vectors = Array2::zeros((k, k));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[[src, src]];
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

fn off_diagonal_sq<F: Float>(a: &Array2<F>) -> F {
    let k = a.nrows();
    let mut off = F::zero();
    for p in 0..k {
        for q in 0..k {
            if p != q {
                off += a[[p, q]] * a[[p, q]];
            }
        }
    }
    off
}
