//! Reference classifiers: 1-nearest-neighbour and source-only subspaces.

use crate::anchor::AnchorState;
use crate::data::LabeledDataset;
use crate::error::{PasError, Result};
use crate::matrix::{sq_dist, FeatureMatrix};
use crate::model::{fit_class_subspaces, PasConfig, PasModel};

/// Label of the Euclidean-nearest source sample; ties go to the lower source index.
pub fn nn1_classify(source: &LabeledDataset, target: &FeatureMatrix) -> Result<Vec<usize>> {
    let src = &source.features;
    if target.ncols() != src.ncols() {
        return Err(PasError::dims(src.ncols(), target.ncols()));
    }
    Ok(target
        .rows()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (i, s) in src.rows().enumerate() {
                let d = sq_dist(x, s);
                if d < best.0 {
                    best = (d, i);
                }
            }
            source.labels.labels()[best.1]
        })
        .collect())
}

/// Per-class subspaces fit on the source alone (the initialisation stage).
pub fn pas_c(source: &LabeledDataset, config: &PasConfig) -> Result<PasModel> {
    config.validate()?;
    // A one-row placeholder target with nothing anchored leaves every fit source-only.
    let placeholder = source.features.select_rows(&[0])?;
    fit_class_subspaces(
        &source.features,
        &source.labels,
        &placeholder,
        &AnchorState::unanchored(1, 0.0),
        config,
    )
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}
