//! Closed-form membership and anchoring updates.

use nalgebra::DMatrix;

use crate::error::{PasError, Result};

/// Target-side block variables of the alternating solver.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorState {
    /// Assigned class per target sample (the one-hot membership rows, stored by index).
    pub memberships: Vec<usize>,
    pub anchors: Vec<bool>,
    pub threshold: f64,
    /// Residual of each target sample to its assigned subspace.
    pub distances: Vec<f64>,
}

impl AnchorState {
    /// Nothing anchored, every sample nominally in class 0.
    pub fn unanchored(m: usize, threshold: f64) -> Self {
        Self {
            memberships: vec![0; m],
            anchors: vec![false; m],
            threshold,
            distances: vec![0.0; m],
        }
    }

    /// Memberships and anchors derived from a distance matrix at threshold `lambda`.
    pub fn from_distances(dists: &DMatrix<f64>, lambda: f64) -> Result<Self> {
        let memberships = assign_memberships(dists)?;
        let distances: Vec<f64> = memberships
            .iter()
            .enumerate()
            .map(|(j, &k)| dists[(j, k)])
            .collect();
        let anchors = anchor(&distances, lambda)?;
        Ok(Self {
            memberships,
            anchors,
            threshold: lambda,
            distances,
        })
    }

    pub fn len(&self) -> usize {
        self.memberships.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memberships.is_empty()
    }

    pub fn anchored_count(&self) -> usize {
        self.anchors.iter().filter(|&&a| a).count()
    }

    /// Dense `m × K` one-hot membership matrix.
    pub fn membership_matrix(&self, num_classes: usize) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.len(), num_classes);
        for (j, &k) in self.memberships.iter().enumerate() {
            w[(j, k)] = 1.0;
        }
        w
    }
}

/// Row-wise argmin; ties go to the smallest column index.
pub fn assign_memberships(dists: &DMatrix<f64>) -> Result<Vec<usize>> {
    if dists.iter().any(|v| !v.is_finite()) {
        return Err(PasError::NonFinite);
    }
    if dists.ncols() == 0 {
        return Err(PasError::Config("distance matrix has no classes".into()));
    }
    Ok(dists
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for k in 1..row.len() {
                if row[k] < row[best] {
                    best = k;
                }
            }
            best
        })
        .collect())
}

/// Anchors exactly the samples whose distance is strictly below `lambda`.
pub fn anchor(distances: &[f64], lambda: f64) -> Result<Vec<bool>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(PasError::Config(format!(
            "threshold must be finite and >= 0, got {lambda}"
        )));
    }
    check_distances(distances)?;
    Ok(distances.iter().map(|&c| c < lambda).collect())
}

/// Smallest threshold that anchors at least `ceil(fraction · m)` samples.
///
/// A fraction of zero gives zero; a fraction of one gives a value strictly
/// above the largest distance.
pub fn lambda_for_fraction(distances: &[f64], fraction: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(PasError::EmptyTarget);
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(PasError::Config(format!(
            "fraction must lie in [0, 1], got {fraction}"
        )));
    }
    check_distances(distances)?;
    let m = distances.len();
    let wanted = target_count(fraction, m);
    if wanted == 0 {
        return Ok(0.0);
    }
    let max = distances.iter().copied().fold(0.0, f64::max);
    if wanted == m {
        return Ok(max * (1.0 + 1e-9) + 1e-12);
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[wanted - 1].next_up())
}

/// `ceil(fraction · m)`, robust to the fraction carrying accumulated rounding error.
pub(crate) fn target_count(fraction: f64, m: usize) -> usize {
    ((fraction * m as f64 - 1e-9).ceil().max(0.0) as usize).min(m)
}

fn check_distances(distances: &[f64]) -> Result<()> {
    if distances.iter().any(|c| !c.is_finite()) {
        return Err(PasError::NonFinite);
    }
    if distances.iter().any(|&c| c < 0.0) {
        return Err(PasError::Config("distances must be nonnegative".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_and_ties() {
        let d = DMatrix::from_row_slice(2, 3, &[0.5, 0.1, 0.9, 0.3, 0.3, 0.7]);
        assert_eq!(assign_memberships(&d).unwrap(), vec![1, 0]);
        let nan = DMatrix::from_row_slice(1, 2, &[f64::NAN, 0.0]);
        assert!(assign_memberships(&nan).is_err());
    }

    #[test]
    fn anchor_rule() {
        let c = [0.2, 0.5, 0.7];
        assert_eq!(anchor(&c, 0.0).unwrap(), vec![false; 3]);
        assert_eq!(anchor(&c, 0.5).unwrap(), vec![true, false, false]);
        assert_eq!(anchor(&c, 0.71).unwrap(), vec![true; 3]);
        assert!(anchor(&c, -1.0).is_err());
        assert!(anchor(&[-0.1], 1.0).is_err());
    }

    #[test]
    fn fraction_thresholds() {
        let c = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(lambda_for_fraction(&c, 0.0).unwrap(), 0.0);
        let half = lambda_for_fraction(&c, 0.5).unwrap();
        assert_eq!(anchor(&c, half).unwrap(), vec![true, true, false, false]);
        assert!(lambda_for_fraction(&[3.0; 5], 1.0).unwrap() > 3.0);
        assert!(matches!(
            lambda_for_fraction(&[], 0.5),
            Err(PasError::EmptyTarget)
        ));
        assert!(lambda_for_fraction(&c, 1.1).is_err());
    }

    #[test]
    fn fraction_rounding_is_stable() {
        // 0.07 * 100 is 7.000000000000001 in binary floating point.
        assert_eq!(target_count(0.07, 100), 7);
        assert_eq!(target_count(0.01 * 3.0, 100), 3);
        assert_eq!(target_count(0.015, 100), 2);
    }

    #[test]
    fn one_hot_matrix_rows_sum_to_one() {
        let s = AnchorState {
            memberships: vec![2, 0, 1],
            anchors: vec![true, false, true],
            threshold: 1.0,
            distances: vec![0.1, 2.0, 0.3],
        };
        let w = s.membership_matrix(3);
        for row in w.row_iter() {
            assert_eq!(row.sum(), 1.0);
        }
        assert_eq!(s.anchored_count(), 2);
    }
}
