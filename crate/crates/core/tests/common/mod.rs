#![allow(dead_code)]

use pas::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    FeatureMatrix::from_rows(&gaussian_rows(rng, n, d)).unwrap()
}

/// Random `d × k` matrix with orthonormal columns (Gram-Schmidt on Gaussian columns).
pub fn random_orthonormal(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for c in &cols {
            let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    cols
}

/// Residual of `x` against an affine subspace given by `mean` and orthonormal `cols`.
pub fn naive_residual(x: &[f64], mean: &[f64], cols: &[Vec<f64>]) -> f64 {
    let centered: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let mut r = centered.clone();
    for c in cols {
        let p: f64 = centered.iter().zip(c).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
    }
    r.iter().map(|a| a * a).sum()
}

pub fn column_mean(x: &FeatureMatrix) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| x.rows().map(|r| r[j]).sum::<f64>() / n)
        .collect()
}
