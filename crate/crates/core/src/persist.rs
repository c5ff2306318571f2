//! JSON persistence for fitted models.
//!
//! Schema: `{feature_dim, num_classes, dim, subspaces: [{mean, basis, spectrum}],
//! config, class_labels?}` where `basis` is the `d × D` basis flattened
//! column-major. Floats are written in shortest round-trip form, so a
//! load reproduces the model bit for bit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PasError, Result};
use crate::model::{PasConfig, PasModel};
use crate::subspace::Subspace;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SubspaceDoc {
    mean: Vec<f64>,
    basis: Vec<f64>,
    spectrum: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelDoc {
    feature_dim: usize,
    num_classes: usize,
    dim: usize,
    subspaces: Vec<SubspaceDoc>,
    config: PasConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_labels: Option<Vec<i64>>,
}

/// A model plus the raw label value of each class index, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredModel {
    pub model: PasModel,
    pub class_labels: Option<Vec<i64>>,
}

pub fn model_to_json(model: &PasModel, class_labels: Option<&[i64]>) -> String {
    let doc = ModelDoc {
        feature_dim: model.feature_dim(),
        num_classes: model.num_classes(),
        dim: model.config.dim,
        subspaces: model
            .subspaces
            .iter()
            .map(|s| SubspaceDoc {
                mean: s.mean().to_vec(),
                basis: s.basis().as_slice().to_vec(),
                spectrum: s.spectrum().to_vec(),
            })
            .collect(),
        config: model.config.clone(),
        class_labels: class_labels.map(<[i64]>::to_vec),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model document serializes");
    text.push('\n');
    text
}

pub fn model_from_json(text: &str) -> Result<StoredModel> {
    let doc: ModelDoc =
        serde_json::from_str(text).map_err(|e| PasError::Parse(format!("model JSON: {e}")))?;
    if doc.subspaces.len() != doc.num_classes {
        return Err(PasError::Parse(format!(
            "num_classes is {} but {} subspaces are stored",
            doc.num_classes,
            doc.subspaces.len()
        )));
    }
    if doc.config.dim != doc.dim {
        return Err(PasError::Parse("dim disagrees with config.dim".into()));
    }
    doc.config.validate()?;
    let subspaces = doc
        .subspaces
        .into_iter()
        .map(|s| {
            if s.mean.len() != doc.feature_dim {
                return Err(PasError::dims(doc.feature_dim, s.mean.len()));
            }
            if s.basis.len() != doc.feature_dim * s.spectrum.len() {
                return Err(PasError::Parse(
                    "basis length is not feature_dim x spectrum length".into(),
                ));
            }
            let basis = DMatrix::from_column_slice(doc.feature_dim, s.spectrum.len(), &s.basis);
            Subspace::from_parts(s.mean, basis, s.spectrum)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(labels) = &doc.class_labels {
        if labels.len() != doc.num_classes {
            return Err(PasError::Parse(
                "class_labels length differs from num_classes".into(),
            ));
        }
    }
    Ok(StoredModel {
        model: PasModel::new(subspaces, doc.config)?,
        class_labels: doc.class_labels,
    })
}
