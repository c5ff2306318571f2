//! Seeded synthetic source/target pairs with a controllable domain shift.
//!
//! Every class is an elongated Gaussian blob: a random mean, a random
//! principal direction with large spread along it, and small isotropic
//! thickness. Target samples are the source draws pushed through a rigid
//! shift (rotation in a random plane, then translation) plus fresh noise of
//! per-sample random scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, UnlabeledDataset};
use crate::error::{PasError, Result};
use crate::matrix::FeatureMatrix;
use crate::model::SourceLabels;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    /// Rotation angle in radians about the origin.
    pub rotation: f64,
    /// Length of the translation vector.
    pub translation: f64,
    /// Mean per-sample noise scale. Each target sample gets isotropic Gaussian
    /// noise whose standard deviation is drawn from an exponential
    /// distribution with this mean, so a minority of samples are outliers.
    pub noise: f64,
}

impl Shift {
    pub const NONE: Shift = Shift {
        rotation: 0.0,
        translation: 0.0,
        noise: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_classes: usize,
    pub dim: usize,
    pub per_class: usize,
    pub shift: Shift,
    /// Classes kept in the target; `None` keeps all of them.
    pub pda_keep: Option<Vec<usize>>,
    pub seed: u64,
    /// Norm of each class mean.
    pub separation: f64,
    /// Standard deviation along each class's principal direction.
    pub spread: f64,
    /// Isotropic within-class standard deviation.
    pub thickness: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_classes: 3,
            dim: 10,
            per_class: 100,
            shift: Shift::NONE,
            pda_keep: None,
            seed: 0,
            separation: 3.0,
            spread: 3.0,
            thickness: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.dim == 0 || self.per_class == 0 {
            return Err(PasError::Config(
                "classes, dim and per-class count must be >= 1".into(),
            ));
        }
        if self.dim < 2 && self.shift.rotation != 0.0 {
            return Err(PasError::Config(
                "rotation needs at least two dimensions".into(),
            ));
        }
        let magnitudes = [
            self.shift.rotation.abs(),
            self.shift.translation,
            self.shift.noise,
            self.separation,
            self.spread,
            self.thickness,
        ];
        if magnitudes.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(PasError::Config(
                "shift and shape magnitudes must be finite and >= 0".into(),
            ));
        }
        if let Some(keep) = &self.pda_keep {
            if keep.is_empty() {
                return Err(PasError::Config("pda_keep must not be empty".into()));
            }
            if let Some(bad) = keep.iter().find(|&&k| k >= self.num_classes) {
                return Err(PasError::Config(format!(
                    "pda_keep class {bad} out of range"
                )));
            }
        }
        Ok(())
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, d);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rotation by `angle` in the plane spanned by orthonormal `p`, `q`.
fn rotate(x: &[f64], p: &[f64], q: &[f64], angle: f64) -> Vec<f64> {
    let (a, b) = (dot(x, p), dot(x, q));
    let (s, c) = angle.sin_cos();
    let (da, db) = (c * a - s * b - a, s * a + c * b - b);
    x.iter()
        .zip(p.iter().zip(q))
        .map(|(xi, (pi, qi))| xi + da * pi + db * qi)
        .collect()
}

/// Labeled source and unlabeled target (with ground truth) for `cfg`.
pub fn synth_shifted_pair(cfg: &SynthConfig) -> Result<(LabeledDataset, UnlabeledDataset)> {
    cfg.validate()?;
    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let means: Vec<Vec<f64>> = (0..cfg.num_classes)
        .map(|_| {
            unit_vec(&mut rng, d)
                .into_iter()
                .map(|v| v * cfg.separation)
                .collect()
        })
        .collect();
    let directions: Vec<Vec<f64>> = (0..cfg.num_classes)
        .map(|_| unit_vec(&mut rng, d))
        .collect();

    let p = unit_vec(&mut rng, d);
    let q = if d >= 2 {
        loop {
            let r = unit_vec(&mut rng, d);
            let proj = dot(&r, &p);
            let v: Vec<f64> = r.iter().zip(&p).map(|(ri, pi)| ri - proj * pi).collect();
            let n = dot(&v, &v).sqrt();
            if n > 1e-6 {
                break v.into_iter().map(|x| x / n).collect::<Vec<_>>();
            }
        }
    } else {
        vec![0.0; d]
    };
    let offset: Vec<f64> = unit_vec(&mut rng, d)
        .into_iter()
        .map(|v| v * cfg.shift.translation)
        .collect();

    let keep = |k: usize| cfg.pda_keep.as_ref().is_none_or(|set| set.contains(&k));
    let mut src_rows = Vec::with_capacity(cfg.num_classes * cfg.per_class);
    let mut src_labels = Vec::with_capacity(src_rows.capacity());
    let mut tgt_rows = Vec::new();
    let mut tgt_labels = Vec::new();
    for k in 0..cfg.num_classes {
        for _ in 0..cfg.per_class {
            let t: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.spread;
            let eps = gaussian_vec(&mut rng, d);
            let x: Vec<f64> = (0..d)
                .map(|i| means[k][i] + t * directions[k][i] + cfg.thickness * eps[i])
                .collect();
            let noise = gaussian_vec(&mut rng, d);
            let scale: f64 = rng.sample::<f64, _>(Exp1) * cfg.shift.noise;
            if keep(k) {
                let y = if cfg.shift.rotation == 0.0 {
                    x.clone()
                } else {
                    rotate(&x, &p, &q, cfg.shift.rotation)
                };
                tgt_rows.push(
                    (0..d)
                        .map(|i| y[i] + offset[i] + scale * noise[i])
                        .collect::<Vec<_>>(),
                );
                tgt_labels.push(k);
            }
            src_rows.push(x);
            src_labels.push(k);
        }
    }

    let source = LabeledDataset::new(
        FeatureMatrix::from_rows(&src_rows)?,
        SourceLabels::new(src_labels, cfg.num_classes)?,
    )?;
    let target = UnlabeledDataset::new(FeatureMatrix::from_rows(&tgt_rows)?, Some(tgt_labels))?;
    Ok((source, target))
}
