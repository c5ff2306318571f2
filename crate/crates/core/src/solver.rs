//! Alternating minimisation of the progressive-adaptation objective.
//!
//! Each stage fixes a threshold λ and cycles three closed-form block
//! updates: refit the class subspaces, reassign memberships, re-anchor. Each
//! update is a global minimiser of its block, so the objective never
//! increases inside a stage. Stages raise λ so that the anchored share of the
//! target grows by a fixed fraction each time.

use serde::Serialize;

use crate::anchor::{lambda_for_fraction, target_count, AnchorState};
use crate::error::{PasError, Result};
use crate::matrix::FeatureMatrix;
use crate::model::{compute_distances, fit_class_subspaces, PasConfig, PasModel, SourceLabels};

/// Source reconstruction error plus anchored target residuals minus `λ · #anchored`.
///
/// Target residuals are recomputed from `model` for each anchored sample's
/// assigned class; the cached `state.distances` are not used.
pub fn objective(
    model: &PasModel,
    source: &FeatureMatrix,
    labels: &SourceLabels,
    target: &FeatureMatrix,
    state: &AnchorState,
) -> Result<f64> {
    let d = model.feature_dim();
    for w in [source.ncols(), target.ncols()] {
        if w != d {
            return Err(PasError::dims(d, w));
        }
    }
    if labels.len() != source.nrows() {
        return Err(PasError::dims(source.nrows(), labels.len()));
    }
    if state.len() != target.nrows() {
        return Err(PasError::dims(target.nrows(), state.len()));
    }
    let mut total = 0.0;
    for (row, &y) in source.rows().zip(labels.labels()) {
        total += model.subspaces[y].residual_sq_unchecked(row);
    }
    for (j, row) in target.rows().enumerate() {
        if state.anchors[j] {
            total +=
                model.subspaces[state.memberships[j]].residual_sq_unchecked(row) - state.threshold;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub model: PasModel,
    pub state: AnchorState,
    /// Objective at the warm start (when given) and after every iteration.
    pub objectives: Vec<f64>,
    pub iterations: usize,
}

/// Runs the block updates at a fixed threshold until the state stops
/// changing, the relative objective change drops below `config.inner_tol`,
/// or `config.inner_max_iters` is reached.
///
/// `warm` supplies the previous model and state. Without it the first
/// refit sees no anchored targets.
pub fn inner_solve(
    source: &FeatureMatrix,
    labels: &SourceLabels,
    target: &FeatureMatrix,
    lambda: f64,
    config: &PasConfig,
    warm: Option<(&PasModel, &AnchorState)>,
) -> Result<InnerSolution> {
    config.validate()?;
    if target.nrows() == 0 {
        return Err(PasError::EmptyTarget);
    }
    let mut objectives = Vec::new();
    let mut state = match warm {
        Some((model, prev)) => {
            let state = AnchorState {
                threshold: lambda,
                ..prev.clone()
            };
            objectives.push(objective(model, source, labels, target, &state)?);
            state
        }
        None => AnchorState::unanchored(target.nrows(), lambda),
    };

    let mut model = None;
    let mut iterations = 0;
    while iterations < config.inner_max_iters {
        iterations += 1;
        let fitted = fit_class_subspaces(source, labels, target, &state, config)?;
        let dists = compute_distances(&fitted, target)?;
        let next = AnchorState::from_distances(&dists, lambda)?;
        let value = objective(&fitted, source, labels, target, &next)?;

        let fixed_point = next.anchors == state.anchors && next.memberships == state.memberships;
        // The first iteration of a warm stage only re-anchors; its refit has not seen the new anchors yet.
        let settled = iterations >= 2
            && objectives.last().is_some_and(|&prev: &f64| {
                (prev - value).abs() <= config.inner_tol * prev.abs().max(value.abs()).max(1e-300)
            });
        objectives.push(value);
        state = next;
        model = Some(fitted);
        if fixed_point || settled {
            break;
        }
    }
    Ok(InnerSolution {
        model: model.expect("at least one iteration runs"),
        state,
        objectives,
        iterations,
    })
}

/// One row of the per-stage log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub target_fraction: f64,
    pub lambda: f64,
    /// `ceil(fraction · m)`: how many samples λ anchored when it was chosen.
    pub scheduled: usize,
    /// Anchored at the end of the stage. Refits can push samples back over λ,
    /// so this may be below `scheduled` and below the previous stage.
    pub anchored: usize,
    pub objective: f64,
    pub pseudo_label_accuracy: Option<f64>,
    pub iterations: usize,
    #[serde(skip)]
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitTrace {
    pub stages: Vec<StageRecord>,
}

impl FitTrace {
    /// Trace as CSV: `stage,fraction,lambda,anchored,objective[,pseudo_acc]`.
    pub fn to_csv(&self) -> String {
        let with_acc = self
            .stages
            .iter()
            .any(|s| s.pseudo_label_accuracy.is_some());
        let mut out = String::from("stage,fraction,lambda,anchored,objective");
        if with_acc {
            out.push_str(",pseudo_acc");
        }
        out.push('\n');
        for s in &self.stages {
            out.push_str(&format!(
                "{},{},{},{},{}",
                s.stage, s.target_fraction, s.lambda, s.anchored, s.objective
            ));
            if with_acc {
                out.push_str(&format!(",{}", s.pseudo_label_accuracy.unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ProgressiveFit {
    pub model: PasModel,
    /// Target memberships and anchors at the end of the last stage.
    pub state: AnchorState,
    pub trace: FitTrace,
}

/// Anchored-fraction schedule: `step, 2·step, …`, ending exactly at 1.
pub fn fraction_schedule(step: f64) -> Vec<f64> {
    let stages = ((1.0 / step) - 1e-9).ceil().max(1.0) as usize;
    // Steps like 0.1 divide 1 exactly; s / n rounds correctly where s · step drifts.
    let even = ((stages as f64) * step - 1.0).abs() < 1e-9;
    (1..=stages)
        .map(|s| match s {
            s if s == stages => 1.0,
            s if even => s as f64 / stages as f64,
            s => s as f64 * step,
        })
        .collect()
}

/// Source-only initialisation followed by one warm-started stage per
/// scheduled fraction. `eval_labels`, when given, are the true target
/// classes and only feed the per-stage pseudo-label accuracy.
pub fn fit_progressive(
    source: &FeatureMatrix,
    labels: &SourceLabels,
    target: &FeatureMatrix,
    config: &PasConfig,
    eval_labels: Option<&[usize]>,
) -> Result<ProgressiveFit> {
    config.validate()?;
    if source.ncols() != target.ncols() {
        return Err(PasError::dims(source.ncols(), target.ncols()));
    }
    if labels.len() != source.nrows() {
        return Err(PasError::dims(source.nrows(), labels.len()));
    }
    if let Some(truth) = eval_labels {
        if truth.len() != target.nrows() {
            return Err(PasError::dims(target.nrows(), truth.len()));
        }
    }
    let accuracy = |state: &AnchorState| {
        eval_labels.map(|truth| {
            let hits = truth
                .iter()
                .zip(&state.memberships)
                .filter(|(a, b)| a == b)
                .count();
            hits as f64 / truth.len() as f64
        })
    };

    let mut trace = FitTrace::default();
    let init = inner_solve(source, labels, target, 0.0, config, None)?;
    trace.stages.push(StageRecord {
        stage: 0,
        target_fraction: 0.0,
        lambda: 0.0,
        scheduled: 0,
        anchored: init.state.anchored_count(),
        objective: *init.objectives.last().expect("non-empty history"),
        pseudo_label_accuracy: accuracy(&init.state),
        iterations: init.iterations,
        objective_history: init.objectives,
    });
    let (mut model, mut state) = (init.model, init.state);

    for (i, fraction) in fraction_schedule(config.schedule_step)
        .into_iter()
        .enumerate()
    {
        let lambda = lambda_for_fraction(&state.distances, fraction)?;
        let sol = inner_solve(
            source,
            labels,
            target,
            lambda,
            config,
            Some((&model, &state)),
        )?;
        trace.stages.push(StageRecord {
            stage: i + 1,
            target_fraction: fraction,
            lambda,
            scheduled: target_count(fraction, target.nrows()),
            anchored: sol.state.anchored_count(),
            objective: *sol.objectives.last().expect("non-empty history"),
            pseudo_label_accuracy: accuracy(&sol.state),
            iterations: sol.iterations,
            objective_history: sol.objectives,
        });
        model = sol.model;
        state = sol.state;
    }
    Ok(ProgressiveFit {
        model,
        state,
        trace,
    })
}
