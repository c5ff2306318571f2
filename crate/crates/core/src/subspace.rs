//! Per-class affine subspaces fitted by (weighted) PCA.
//!
//! A [`Subspace`] is a mean plus an orthonormal basis. The squared residual
//! of a sample after centering and orthogonal projection onto the basis is
//! the distance used everywhere else in the crate, both to fit and to
//! classify.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{PasError, Result};
use crate::matrix::FeatureMatrix;

/// Eigenvalues below this fraction of the covariance trace count as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    mean: Vec<f64>,
    /// `d × effective_dim`, orthonormal columns.
    basis: DMatrix<f64>,
    /// Covariance eigenvalues for the kept directions, nonincreasing.
    spectrum: Vec<f64>,
}

/// Coordinates of a centered sample in a subspace basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coords: Vec<f64>,
}

impl Subspace {
    /// Reassembles a subspace from stored parts, checking shapes and orthonormality.
    pub fn from_parts(mean: Vec<f64>, basis: DMatrix<f64>, spectrum: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(PasError::EmptyFit);
        }
        if basis.nrows() != d {
            return Err(PasError::dims(d, basis.nrows()));
        }
        if spectrum.len() != basis.ncols() {
            return Err(PasError::dims(basis.ncols(), spectrum.len()));
        }
        if mean
            .iter()
            .chain(basis.iter())
            .chain(spectrum.iter())
            .any(|v| !v.is_finite())
        {
            return Err(PasError::NonFinite);
        }
        let gram = basis.transpose() * &basis;
        let off = (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax();
        if off > 1e-8 {
            return Err(PasError::Parse(format!(
                "basis is not orthonormal (max error {off:e})"
            )));
        }
        Ok(Self {
            mean,
            basis,
            spectrum,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn effective_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(PasError::dims(self.dim(), x.len()));
        }
        Ok(())
    }

    /// Coordinates `basisᵀ (x − mean)`.
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        self.check(x)?;
        Ok(Projection {
            coords: self.coords_unchecked(x),
        })
    }

    fn coords_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.effective_dim())
            .map(|l| {
                self.basis
                    .column(l)
                    .iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(b, (xi, mi))| b * (xi - mi))
                    .sum()
            })
            .collect()
    }

    /// Squared norm of the part of `x − mean` orthogonal to the basis.
    pub fn residual_sq(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.residual_sq_unchecked(x))
    }

    pub(crate) fn residual_sq_unchecked(&self, x: &[f64]) -> f64 {
        let coords = self.coords_unchecked(x);
        (0..self.dim())
            .map(|i| {
                let recon: f64 = coords
                    .iter()
                    .enumerate()
                    .map(|(l, c)| self.basis[(i, l)] * c)
                    .sum();
                let r = x[i] - self.mean[i] - recon;
                r * r
            })
            .sum()
    }
}

/// Fits the top-`dim` principal subspace of the rows of `x`.
///
/// With `weights`, rows are weighted in both the mean and the covariance and
/// zero-weight rows are ignored. The covariance is normalised by the total
/// weight, so for unit weights the spectrum is the biased sample covariance
/// spectrum. The effective dimension is clamped to the numerical rank of the
/// centered data.
pub fn fit_pca(x: &FeatureMatrix, weights: Option<&[f64]>, dim: usize) -> Result<Subspace> {
    if dim == 0 {
        return Err(PasError::Config(
            "subspace dimension must be at least 1".into(),
        ));
    }
    let d = x.ncols();
    let active: Vec<(usize, f64)> = match weights {
        None => (0..x.nrows()).map(|i| (i, 1.0)).collect(),
        Some(w) => {
            if w.len() != x.nrows() {
                return Err(PasError::dims(x.nrows(), w.len()));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(PasError::NonFinite);
            }
            if w.iter().any(|&v| v < 0.0) {
                return Err(PasError::Config("weights must be nonnegative".into()));
            }
            w.iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| v > 0.0)
                .collect()
        }
    };
    if active.is_empty() {
        return Err(PasError::EmptyFit);
    }
    let total: f64 = active.iter().map(|&(_, w)| w).sum();

    let mut mean = vec![0.0; d];
    for &(i, w) in &active {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += w * v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);

    // Rows scaled so that covariance = RᵀR.
    let n = active.len();
    let r = DMatrix::from_fn(n, d, |a, j| {
        let (i, w) = active[a];
        (w / total).sqrt() * (x.row(i)[j] - mean[j])
    });
    let trace: f64 = r.iter().map(|v| v * v).sum();

    let max_rank = dim.min(d).min(n - 1);
    let (mut basis, spectrum) = if trace <= 0.0 || max_rank == 0 {
        (DMatrix::zeros(d, 0), Vec::new())
    } else if d <= n {
        let cov = r.transpose() * &r;
        let eig = SymmetricEigen::new(cov);
        let order = descending(&eig.eigenvalues);
        let keep = kept(&order, &eig.eigenvalues, trace, max_rank);
        let basis = DMatrix::from_fn(d, keep.len(), |i, l| eig.eigenvectors[(i, keep[l])]);
        (basis, keep.iter().map(|&k| eig.eigenvalues[k]).collect())
    } else {
        let gram = &r * r.transpose();
        let eig = SymmetricEigen::new(gram);
        let order = descending(&eig.eigenvalues);
        let keep = kept(&order, &eig.eigenvalues, trace, max_rank);
        let mut basis = DMatrix::zeros(d, keep.len());
        for (l, &k) in keep.iter().enumerate() {
            let u = r.transpose() * eig.eigenvectors.column(k);
            basis.set_column(l, &(u / eig.eigenvalues[k].sqrt()));
        }
        reorthonormalize(&mut basis);
        (basis, keep.iter().map(|&k| eig.eigenvalues[k]).collect())
    };
    fix_signs(&mut basis);
    Ok(Subspace {
        mean,
        basis,
        spectrum,
    })
}

fn descending(values: &DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

fn kept(order: &[usize], values: &DVector<f64>, trace: f64, max_rank: usize) -> Vec<usize> {
    order
        .iter()
        .copied()
        .take_while(|&k| values[k] > RANK_TOLERANCE * trace)
        .take(max_rank)
        .collect()
}

/// Modified Gram-Schmidt, in place.
fn reorthonormalize(basis: &mut DMatrix<f64>) {
    for l in 0..basis.ncols() {
        for p in 0..l {
            let proj = basis.column(l).dot(&basis.column(p));
            let prev = basis.column(p).clone_owned();
            basis.column_mut(l).axpy(-proj, &prev, 1.0);
        }
        let norm = basis.column(l).norm();
        basis.column_mut(l).unscale_mut(norm);
    }
}

/// Flips each column so that its largest-magnitude entry (first on ties) is nonnegative.
fn fix_signs(basis: &mut DMatrix<f64>) {
    for mut col in basis.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}
