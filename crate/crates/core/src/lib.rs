//! Progressive adaptation of per-class subspaces for unsupervised and
//! partial domain adaptation.
//!
//! Each source class is modelled by a low-dimensional affine subspace. Target
//! samples are labelled by their nearest subspace, and the most reliable of
//! them (smallest residual) are progressively admitted into the subspace
//! fits, moving the shared subspaces towards the target domain.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchor;
pub mod baselines;
pub mod bench;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod matrix;
pub mod model;
pub mod persist;
pub mod solver;
pub mod subspace;
pub mod synth;

pub use anchor::{anchor, assign_memberships, lambda_for_fraction, AnchorState};
pub use error::{PasError, Result};
pub use matrix::FeatureMatrix;
pub use model::{
    compute_distances, fit_class_subspaces, predict, PasConfig, PasModel, SourceLabels,
};
pub use solver::{fit_progressive, inner_solve, objective, FitTrace, ProgressiveFit, StageRecord};
pub use subspace::{fit_pca, Projection, Subspace};
