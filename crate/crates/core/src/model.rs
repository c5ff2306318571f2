//! Fitted per-class subspace models and the configuration that produces them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::anchor::{assign_memberships, AnchorState};
use crate::error::{PasError, Result};
use crate::matrix::FeatureMatrix;
use crate::subspace::{fit_pca, Subspace};

/// Class indices for the labeled source samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLabels {
    labels: Vec<usize>,
    num_classes: usize,
}

impl SourceLabels {
    /// Every class in `0..num_classes` must occur at least once.
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes == 0 {
            return Err(PasError::Config("need at least one class".into()));
        }
        let mut seen = vec![false; num_classes];
        for &y in &labels {
            *seen
                .get_mut(y)
                .ok_or_else(|| PasError::Range(format!("label {y} >= {num_classes} classes")))? =
                true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(PasError::Range(format!(
                "class {missing} has no source samples"
            )));
        }
        Ok(Self {
            labels,
            num_classes,
        })
    }

    /// Infers the class count as `max + 1`.
    pub fn from_indices(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Row indices belonging to class `k`, ascending.
    pub fn class_rows(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &y)| (y == k).then_some(i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PasConfig {
    /// Requested subspace dimension per class.
    pub dim: usize,
    /// Increment of the anchored target fraction between stages.
    pub schedule_step: f64,
    /// Relative objective change that ends a stage.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Reserved for randomized tie handling; ties are currently broken deterministically.
    pub seed: u64,
}

impl Default for PasConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            schedule_step: 0.01,
            inner_tol: 1e-6,
            inner_max_iters: 50,
            seed: 0,
        }
    }
}

impl PasConfig {
    pub fn with_dim(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(PasError::Config("dim must be >= 1".into()));
        }
        if !(self.schedule_step > 0.0 && self.schedule_step <= 1.0) {
            return Err(PasError::Config(format!(
                "schedule_step must lie in (0, 1], got {}",
                self.schedule_step
            )));
        }
        if !(self.inner_tol > 0.0) {
            return Err(PasError::Config("inner_tol must be positive".into()));
        }
        if self.inner_max_iters == 0 {
            return Err(PasError::Config("inner_max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// One subspace per source class; classifies by smallest residual.
#[derive(Debug, Clone, PartialEq)]
pub struct PasModel {
    pub subspaces: Vec<Subspace>,
    pub config: PasConfig,
}

impl PasModel {
    pub fn new(subspaces: Vec<Subspace>, config: PasConfig) -> Result<Self> {
        let first = subspaces
            .first()
            .ok_or_else(|| PasError::Config("no subspaces".into()))?;
        let d = first.dim();
        if let Some(bad) = subspaces.iter().find(|s| s.dim() != d) {
            return Err(PasError::dims(d, bad.dim()));
        }
        Ok(Self { subspaces, config })
    }

    pub fn feature_dim(&self) -> usize {
        self.subspaces[0].dim()
    }

    pub fn num_classes(&self) -> usize {
        self.subspaces.len()
    }
}

/// `m × K` matrix of squared residuals of each target row to each class subspace.
pub fn compute_distances(model: &PasModel, x: &FeatureMatrix) -> Result<DMatrix<f64>> {
    if x.ncols() != model.feature_dim() {
        return Err(PasError::dims(model.feature_dim(), x.ncols()));
    }
    let mut out = DMatrix::zeros(x.nrows(), model.num_classes());
    for (k, s) in model.subspaces.iter().enumerate() {
        for (j, row) in x.rows().enumerate() {
            out[(j, k)] = s.residual_sq_unchecked(row);
        }
    }
    Ok(out)
}

/// Nearest-subspace labels; ties go to the smaller class index.
pub fn predict(model: &PasModel, x: &FeatureMatrix) -> Result<Vec<usize>> {
    assign_memberships(&compute_distances(model, x)?)
}

/// Refits every class subspace on its source rows plus the anchored target
/// rows currently assigned to it.
pub fn fit_class_subspaces(
    source: &FeatureMatrix,
    labels: &SourceLabels,
    target: &FeatureMatrix,
    state: &AnchorState,
    config: &PasConfig,
) -> Result<PasModel> {
    if labels.len() != source.nrows() {
        return Err(PasError::dims(source.nrows(), labels.len()));
    }
    if target.ncols() != source.ncols() {
        return Err(PasError::dims(source.ncols(), target.ncols()));
    }
    if state.len() != target.nrows() {
        return Err(PasError::dims(target.nrows(), state.len()));
    }
    let subspaces = (0..labels.num_classes())
        .map(|k| {
            let src = source.select_rows(&labels.class_rows(k))?;
            let anchored: Vec<usize> = (0..target.nrows())
                .filter(|&j| state.anchors[j] && state.memberships[j] == k)
                .collect();
            let union = if anchored.is_empty() {
                src
            } else {
                src.vstack(&target.select_rows(&anchored)?)?
            };
            fit_pca(&union, None, config.dim)
        })
        .collect::<Result<Vec<_>>>()?;
    PasModel::new(subspaces, config.clone())
}
