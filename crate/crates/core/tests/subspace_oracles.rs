// Index loops below are the naive oracle on purpose.
#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use pas::{fit_pca, FeatureMatrix, Subspace};
use proptest::prelude::*;

/// Eigenvalues of a symmetric 3×3 matrix as roots of its characteristic
/// polynomial, found by grid scan plus bisection.
fn char_poly_eigenvalues(c: [[f64; 3]; 3]) -> Vec<f64> {
    let tr = c[0][0] + c[1][1] + c[2][2];
    let minors = c[0][0] * c[1][1] - c[0][1] * c[1][0] + c[0][0] * c[2][2] - c[0][2] * c[2][0]
        + c[1][1] * c[2][2]
        - c[1][2] * c[2][1];
    let det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
        - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
    let p = |l: f64| ((l - tr) * l + minors) * l - det;
    let bound = c
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let steps = 200_000;
    let mut roots = Vec::new();
    let mut prev = (-bound, p(-bound));
    for i in 1..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let v = p(x);
        if v == 0.0 || v.signum() != prev.1.signum() {
            let (mut lo, mut hi) = (prev.0, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if p(mid).signum() == p(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, v);
    }
    roots
}

fn covariance3(x: &FeatureMatrix) -> [[f64; 3]; 3] {
    let mean = column_mean(x);
    let n = x.nrows() as f64;
    let mut c = [[0.0; 3]; 3];
    for r in x.rows() {
        for a in 0..3 {
            for b in 0..3 {
                c[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / n;
            }
        }
    }
    c
}

fn total_residual(s: &Subspace, x: &FeatureMatrix) -> f64 {
    x.rows().map(|r| s.residual_sq(r).unwrap()).sum()
}

fn basis_cols(s: &Subspace) -> Vec<Vec<f64>> {
    s.basis()
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

#[test]
fn full_dimensional_basis_reconstructs_exactly() {
    let x = gaussian_matrix(&mut rng(11), 10, 3);
    let s = fit_pca(&x, None, 3).unwrap();
    for r in x.rows() {
        assert!(s.residual_sq(r).unwrap() < 1e-24);
    }
}

#[test]
fn dropped_variance_equals_smallest_eigenvalue() {
    let x = gaussian_matrix(&mut rng(2024), 10, 3);
    let mut eig = char_poly_eigenvalues(covariance3(&x));
    assert_eq!(eig.len(), 3);
    eig.sort_by(f64::total_cmp);
    let s = fit_pca(&x, None, 2).unwrap();
    let expected = 10.0 * eig[0];
    let got = total_residual(&s, &x);
    assert!(
        (got - expected).abs() <= 1e-9 * expected.max(1.0),
        "{got} vs {expected}"
    );
    assert!((s.spectrum()[0] - eig[2]).abs() < 1e-10);
    assert!((s.spectrum()[1] - eig[1]).abs() < 1e-10);
}

#[test]
fn projection_matches_naive_matmul() {
    let mut g = rng(5);
    let x = gaussian_matrix(&mut g, 12, 5);
    let s = fit_pca(&x, None, 3).unwrap();
    let probe = gaussian_rows(&mut g, 1, 5).remove(0);
    let coords = s.project(&probe).unwrap().coords;
    for l in 0..s.effective_dim() {
        let mut acc = 0.0;
        for i in 0..5 {
            acc += s.basis()[(i, l)] * (probe[i] - s.mean()[i]);
        }
        assert!((coords[l] - acc).abs() < 1e-12);
    }
    let at_mean = s.project(s.mean()).unwrap().coords;
    assert!(at_mean.iter().all(|c| c.abs() < 1e-15));
}

#[test]
fn residual_obeys_pythagoras() {
    let mut g = rng(6);
    let x = gaussian_matrix(&mut g, 15, 4);
    let s = fit_pca(&x, None, 2).unwrap();
    for probe in gaussian_rows(&mut g, 20, 4) {
        let c = s.project(&probe).unwrap().coords;
        let centered: f64 = probe
            .iter()
            .zip(s.mean())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let in_span: f64 = c.iter().map(|v| v * v).sum();
        let r = s.residual_sq(&probe).unwrap();
        assert!((r - (centered - in_span)).abs() < 1e-10 * centered.max(1.0));
    }
}

#[test]
fn in_span_points_have_zero_residual() {
    let mut g = rng(7);
    let x = gaussian_matrix(&mut g, 9, 4);
    let s = fit_pca(&x, None, 2).unwrap();
    let cols = basis_cols(&s);
    let p: Vec<f64> = (0..4)
        .map(|i| s.mean()[i] + 1.7 * cols[0][i] - 0.4 * cols[1][i])
        .collect();
    assert!(s.residual_sq(&p).unwrap() < 1e-20);
}

#[test]
fn weighted_fit_equals_fit_with_repeated_rows() {
    let mut g = rng(8);
    let rows = gaussian_rows(&mut g, 6, 3);
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let weights = [1.0, 2.0, 1.0, 3.0, 1.0, 1.0];
    let mut repeated = Vec::new();
    for (r, &w) in rows.iter().zip(&weights) {
        for _ in 0..w as usize {
            repeated.push(r.clone());
        }
    }
    let a = fit_pca(&x, Some(&weights), 2).unwrap();
    let b = fit_pca(&FeatureMatrix::from_rows(&repeated).unwrap(), None, 2).unwrap();
    for (u, v) in a.basis().iter().zip(b.basis().iter()) {
        assert!((u - v).abs() < 1e-9);
    }
    for (u, v) in a.mean().iter().zip(b.mean()) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn sign_convention_is_applied() {
    for seed in 0..20 {
        let x = gaussian_matrix(&mut rng(seed), 8, 5);
        let s = fit_pca(&x, None, 3).unwrap();
        for col in s.basis().column_iter() {
            let big = col
                .iter()
                .copied()
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(big >= 0.0);
        }
    }
}

fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
    (2usize..=12, 1usize..=4, 1usize..=2).prop_flat_map(|(n, d, dim)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n),
            Just(dim),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_orthonormal_and_spectrum_sorted((rows, dim) in instance()) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let s = fit_pca(&x, None, dim).unwrap();
        let k = s.effective_dim();
        prop_assert!(k <= dim.min(x.ncols()).min(x.nrows() - 1));
        let gram = s.basis().transpose() * s.basis();
        for a in 0..k {
            for b in 0..k {
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((gram[(a, b)] - target).abs() <= 1e-8);
            }
        }
        for w in s.spectrum().windows(2) {
            prop_assert!(w[0] + 1e-10 >= w[1]);
        }
        prop_assert!(s.spectrum().iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn pca_beats_random_bases((rows, dim) in instance(), seed in any::<u64>()) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let s = fit_pca(&x, None, dim).unwrap();
        let best = total_residual(&s, &x);
        let d = x.ncols();
        let k = dim.min(d);
        let mean = column_mean(&x);
        let mut g = rng(seed);
        for _ in 0..200 {
            let cols = random_orthonormal(&mut g, d, k);
            let other: f64 = x.rows().map(|r| naive_residual(r, &mean, &cols)).sum();
            prop_assert!(best <= other + 1e-9);
        }
    }

    #[test]
    fn trace_identity((rows, dim) in instance()) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let s = fit_pca(&x, None, dim).unwrap();
        let n = x.nrows() as f64;
        let scatter: f64 = x.rows()
            .map(|r| r.iter().zip(s.mean()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum();
        let expected = scatter - n * s.spectrum().iter().sum::<f64>();
        let got = total_residual(&s, &x);
        prop_assert!((got - expected).abs() <= 1e-6 * scatter.max(1e-12) + 1e-12,
            "got {got}, expected {expected}");
    }

    #[test]
    fn rotation_leaves_residuals_unchanged((rows, dim) in instance(), seed in any::<u64>()) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let d = x.ncols();
        let q = random_orthonormal(&mut rng(seed), d, d);
        let rotated: Vec<Vec<f64>> = rows.iter()
            .map(|r| (0..d).map(|i| (0..d).map(|j| q[j][i] * r[j]).sum()).collect())
            .collect();
        let xr = FeatureMatrix::from_rows(&rotated).unwrap();
        let a = fit_pca(&x, None, dim).unwrap();
        let b = fit_pca(&xr, None, dim).unwrap();
        // Rotation equivariance only pins down the subspace when the kept spectrum is separated.
        let separated = a.spectrum().last().copied().unwrap_or(0.0);
        let next = {
            let full = fit_pca(&x, None, d).unwrap();
            full.spectrum().get(a.effective_dim()).copied().unwrap_or(0.0)
        };
        prop_assume!(a.effective_dim() == 0 || separated - next > 1e-3);
        for (r, rr) in x.rows().zip(xr.rows()) {
            prop_assert!((a.residual_sq(r).unwrap() - b.residual_sq(rr).unwrap()).abs() <= 1e-8);
        }
    }

    #[test]
    fn scaling_scales_residuals((rows, dim) in instance(), s in 0.1f64..10.0) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let xs = x.scaled(s).unwrap();
        let a = fit_pca(&x, None, dim).unwrap();
        let b = fit_pca(&xs, None, dim).unwrap();
        prop_assume!(a.effective_dim() == b.effective_dim());
        for (r, rs) in x.rows().zip(xs.rows()) {
            let ra = a.residual_sq(r).unwrap();
            let rb = b.residual_sq(rs).unwrap();
            prop_assert!((rb - s * s * ra).abs() <= 1e-8 * (s * s * ra).max(1.0));
        }
    }
}
