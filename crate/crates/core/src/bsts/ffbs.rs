//! Forward-filter backward-sample draws of the full state path.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kalman::kalman_filter;
use super::linalg::{mvn_sample, psd_floor, solve_psd};
use super::model::StateSpaceModel;
use crate::error::Result;

/// One exact draw of `alpha_1..alpha_n` given `y`, seeded.
pub fn ffbs(m: &StateSpaceModel, y: &[Option<f64>], seed: u64) -> Result<Vec<DVector<f64>>> {
    ffbs_with_rng(m, y, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// [`ffbs`] drawing from a caller-owned generator.
pub fn ffbs_with_rng(m: &StateSpaceModel, y: &[Option<f64>], rng: &mut impl Rng) -> Result<Vec<DVector<f64>>> {
    let fo = kalman_filter(m, y)?;
    let n = fo.len();
    let t_mat = &m.transition;
    let mut path = vec![DVector::zeros(m.state_dim()); n];
    path[n - 1] = mvn_sample(&fo.filtered_means[n - 1], &fo.filtered_covs[n - 1], rng);
    for t in (0..n - 1).rev() {
        let pf = &fo.filtered_covs[t];
        let af = &fo.filtered_means[t];
        // alpha_t | alpha_{t+1}: gain J = P_t|t T' P_{t+1}^-1
        let tp = t_mat * pf;
        let gain_t = solve_psd(&fo.predicted_covs[t + 1], &tp);
        let gain = gain_t.transpose();
        let mean = af + &gain * (&path[t + 1] - &fo.predicted_means[t + 1]);
        let cov = psd_floor(&(pf - &gain * tp));
        path[t] = mvn_sample(&mean, &cov, rng);
    }
    Ok(path)
}
