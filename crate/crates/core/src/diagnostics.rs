//! Density-ratio diagnostics for anchored target samples.
//!
//! [`kliep_fit`] estimates `w(x) = p_source(x) / p_target(x)` as a
//! nonnegative mixture of Gaussian kernels. The fit maximises the mean
//! log-ratio on source samples subject to `w` averaging one over the target
//! samples. [`anchoring_report`] ranks target samples by residual to their
//! assigned subspace and compares the closest and farthest groups by
//! accuracy and by average density ratio.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anchor::assign_memberships;
use crate::error::{PasError, Result};
use crate::matrix::{sq_dist, FeatureMatrix};
use crate::model::{compute_distances, PasModel};

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRatioModel {
    pub centers: FeatureMatrix,
    pub alphas: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityRatioModel {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let denom = 2.0 * self.bandwidth * self.bandwidth;
        self.centers
            .rows()
            .zip(&self.alphas)
            .map(|(c, a)| a * (-sq_dist(x, c) / denom).exp())
            .sum()
    }

    pub fn eval_all(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.ncols() != self.centers.ncols() {
            return Err(PasError::dims(self.centers.ncols(), x.ncols()));
        }
        Ok(x.rows().map(|r| self.eval(r)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KliepOptions {
    pub num_centers: usize,
    /// Kernel width; the median pairwise center distance when `None`.
    pub bandwidth: Option<f64>,
    /// Seed of the shuffle that picks the centers.
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for KliepOptions {
    fn default() -> Self {
        Self {
            num_centers: 100,
            bandwidth: None,
            seed: 0,
            max_iters: 500,
            tol: 1e-7,
        }
    }
}

/// State after initialisation or after an accepted ascent step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KliepStep {
    /// Mean log-ratio over the source samples.
    pub objective: f64,
    pub min_alpha: f64,
    /// Mean of the fitted ratio over the target samples.
    pub target_mean: f64,
}

#[derive(Debug, Clone)]
pub struct KliepFit {
    pub model: DensityRatioModel,
    pub steps: Vec<KliepStep>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn kernel_matrix(x: &FeatureMatrix, centers: &FeatureMatrix, sigma: f64) -> Vec<Vec<f64>> {
    let denom = 2.0 * sigma * sigma;
    x.rows()
        .map(|r| {
            centers
                .rows()
                .map(|c| (-sq_dist(r, c) / denom).exp())
                .collect()
        })
        .collect()
}

fn mean_log(kernel: &[Vec<f64>], alphas: &[f64]) -> f64 {
    let mut total = 0.0;
    for row in kernel {
        let w: f64 = row.iter().zip(alphas).map(|(k, a)| k * a).sum();
        if !(w > 0.0) {
            return f64::NEG_INFINITY;
        }
        total += w.ln();
    }
    total / kernel.len() as f64
}

/// Gradient projected onto the constraint hyperplane, restricted to the
/// coordinates that are free to move (positive, or at zero and pushed upward).
fn ascent_direction(grad: &[f64], alphas: &[f64], norm: &[f64]) -> Vec<f64> {
    let mut free: Vec<bool> = vec![true; grad.len()];
    loop {
        let (gb, bb) = free
            .iter()
            .zip(grad.iter().zip(norm))
            .filter(|(f, _)| **f)
            .fold((0.0, 0.0), |(gb, bb), (_, (g, b))| (gb + g * b, bb + b * b));
        let along = if bb > 0.0 { gb / bb } else { 0.0 };
        let dir: Vec<f64> = (0..grad.len())
            .map(|l| {
                if free[l] {
                    grad[l] - along * norm[l]
                } else {
                    0.0
                }
            })
            .collect();
        let mut changed = false;
        for l in 0..grad.len() {
            if free[l] && alphas[l] <= 0.0 && dir[l] < 0.0 {
                free[l] = false;
                changed = true;
            }
        }
        if !changed {
            return dir;
        }
    }
}

/// Clips at zero and rescales so that `norm · α = 1`; `None` if nothing positive survives.
fn project(alphas: &mut [f64], norm: &[f64]) -> Option<()> {
    alphas.iter_mut().for_each(|a| *a = a.max(0.0));
    let s: f64 = alphas.iter().zip(norm).map(|(a, b)| a * b).sum();
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    alphas.iter_mut().for_each(|a| *a /= s);
    Some(())
}

/// Fits `w = p_source / p_target` with Gaussian kernels centered on source samples.
pub fn kliep_fit(
    source: &FeatureMatrix,
    target: &FeatureMatrix,
    opts: &KliepOptions,
) -> Result<KliepFit> {
    if source.ncols() != target.ncols() {
        return Err(PasError::dims(source.ncols(), target.ncols()));
    }
    if opts.num_centers == 0 {
        return Err(PasError::Config("need at least one kernel center".into()));
    }
    let mut order: Vec<usize> = (0..source.nrows()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    order.truncate(opts.num_centers.min(source.nrows()));
    let centers = source.select_rows(&order)?;

    let sigma = match opts.bandwidth {
        Some(s) if !(s > 0.0) || !s.is_finite() => {
            return Err(PasError::Config(format!(
                "bandwidth must be positive, got {s}"
            )))
        }
        Some(s) => s,
        None => {
            let b = centers.nrows();
            let dists: Vec<f64> = if b >= 2 {
                (0..b)
                    .flat_map(|i| (i + 1..b).map(move |j| (i, j)))
                    .map(|(i, j)| sq_dist(centers.row(i), centers.row(j)).sqrt())
                    .collect()
            } else {
                target
                    .rows()
                    .map(|t| sq_dist(t, centers.row(0)).sqrt())
                    .collect()
            };
            median(dists)
        }
    };
    if !(sigma > 0.0) {
        return Err(PasError::DegenerateKernel);
    }

    let k_src = kernel_matrix(source, &centers, sigma);
    let k_tgt = kernel_matrix(target, &centers, sigma);
    let b = centers.nrows();
    let m = target.nrows() as f64;
    let norm: Vec<f64> = (0..b)
        .map(|l| k_tgt.iter().map(|r| r[l]).sum::<f64>() / m)
        .collect();

    let mut alphas = vec![1.0; b];
    if project(&mut alphas, &norm).is_none() {
        return Err(PasError::DegenerateKernel);
    }
    let record = |alphas: &[f64], objective: f64| KliepStep {
        objective,
        min_alpha: alphas.iter().copied().fold(f64::INFINITY, f64::min),
        target_mean: dot(alphas, &norm),
    };
    let mut value = mean_log(&k_src, &alphas);
    let mut steps = vec![record(&alphas, value)];
    let n = k_src.len() as f64;
    let mut step = f64::NAN;

    for _ in 0..opts.max_iters {
        let mut grad = vec![0.0; b];
        for row in &k_src {
            let w: f64 = row.iter().zip(&alphas).map(|(k, a)| k * a).sum();
            for (g, k) in grad.iter_mut().zip(row) {
                *g += k / (w * n);
            }
        }
        let grad = ascent_direction(&grad, &alphas, &norm);
        let gnorm = dot(&grad, &grad).sqrt();
        if !(gnorm > 0.0) {
            break;
        }
        if step.is_nan() {
            step = dot(&alphas, &alphas).sqrt() / gnorm;
        }

        let mut accepted = None;
        for _ in 0..60 {
            let mut cand: Vec<f64> = alphas
                .iter()
                .zip(&grad)
                .map(|(a, g)| a + step * g)
                .collect();
            if project(&mut cand, &norm).is_some() {
                let v = mean_log(&k_src, &cand);
                if v >= value {
                    accepted = Some((cand, v));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, v)) = accepted else { break };
        let change = v - value;
        alphas = cand;
        value = v;
        steps.push(record(&alphas, v));
        step *= 2.0;
        if change <= opts.tol * value.abs().max(1.0) {
            break;
        }
    }

    Ok(KliepFit {
        model: DensityRatioModel {
            centers,
            alphas,
            bandwidth: sigma,
        },
        steps,
    })
}

/// Average density ratio over the selected rows of `x`.
pub fn adr(model: &DensityRatioModel, x: &FeatureMatrix, indices: &[usize]) -> Result<f64> {
    if indices.is_empty() {
        return Err(PasError::EmptySelection);
    }
    if x.ncols() != model.centers.ncols() {
        return Err(PasError::dims(model.centers.ncols(), x.ncols()));
    }
    let mut total = 0.0;
    for &i in indices {
        if i >= x.nrows() {
            return Err(PasError::Range(format!("row {i} of {}", x.nrows())));
        }
        total += model.eval(x.row(i));
    }
    Ok(total / indices.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub count: usize,
    pub accuracy: f64,
    pub adr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchoringReport {
    pub fraction: f64,
    /// Samples closest to their assigned subspace.
    pub top: GroupStats,
    /// Samples farthest from their assigned subspace.
    pub bottom: GroupStats,
}

/// Accuracy and ADR of the `floor(fraction · m)` target samples with the
/// smallest and with the largest assigned-subspace residual.
pub fn anchoring_report(
    model: &PasModel,
    target: &FeatureMatrix,
    true_labels: &[usize],
    ratio: &DensityRatioModel,
    fraction: f64,
) -> Result<AnchoringReport> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(PasError::Config(format!(
            "fraction must lie in (0, 0.5], got {fraction}"
        )));
    }
    if true_labels.len() != target.nrows() {
        return Err(PasError::dims(target.nrows(), true_labels.len()));
    }
    let m = target.nrows();
    let count = (fraction * m as f64 + 1e-9).floor() as usize;
    if count < 1 {
        return Err(PasError::TooFewSamples(format!(
            "{fraction} of {m} target samples is less than one"
        )));
    }
    let dists = compute_distances(model, target)?;
    let labels = assign_memberships(&dists)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        dists[(a, labels[a])]
            .total_cmp(&dists[(b, labels[b])])
            .then(a.cmp(&b))
    });

    let stats = |group: &[usize]| -> Result<GroupStats> {
        let hits = group
            .iter()
            .filter(|&&j| labels[j] == true_labels[j])
            .count();
        Ok(GroupStats {
            count: group.len(),
            accuracy: hits as f64 / group.len() as f64,
            adr: adr(ratio, target, group)?,
        })
    };
    Ok(AnchoringReport {
        fraction,
        top: stats(&order[..count])?,
        bottom: stats(&order[m - count..])?,
    })
}
