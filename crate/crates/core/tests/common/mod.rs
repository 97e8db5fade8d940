//! Test-only oracles, independent of the library's recursions.
#![allow(dead_code)]

use coverage_impact::bsts::StateSpaceModel;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Joint Gaussian moments of `(alpha_1..alpha_n, y_1..y_n)` built directly
/// from the model equations.
pub struct DenseMoments {
    pub state_mean: DVector<f64>,
    pub state_cov: DMatrix<f64>,
    pub y_mean: DVector<f64>,
    pub y_cov: DMatrix<f64>,
    /// `Cov(alpha, y)`, `(n d) x n`.
    pub cross: DMatrix<f64>,
    pub d: usize,
}

pub fn dense_moments(m: &StateSpaceModel, n: usize) -> DenseMoments {
    let d = m.z.len();
    let t_mat = &m.transition;
    let rqr = &m.control * DMatrix::from_diagonal(&m.state_var) * m.control.transpose();

    let mut means = vec![m.a1.clone()];
    let mut vars = vec![m.p1.clone()];
    for t in 1..n {
        means.push(t_mat * &means[t - 1]);
        vars.push(t_mat * &vars[t - 1] * t_mat.transpose() + &rqr);
    }
    let mut state_cov = DMatrix::zeros(n * d, n * d);
    for s in 0..n {
        let mut block = vars[s].clone();
        for t in s..n {
            state_cov.view_mut((t * d, s * d), (d, d)).copy_from(&block);
            state_cov
                .view_mut((s * d, t * d), (d, d))
                .copy_from(&block.transpose());
            block = t_mat * block;
        }
    }
    let mut h = DMatrix::zeros(n, n * d);
    for t in 0..n {
        h.view_mut((t, t * d), (1, d)).copy_from(&m.z.transpose());
    }
    let state_mean = DVector::from_iterator(n * d, means.iter().flat_map(|v| v.iter().copied()));
    let y_mean = &h * &state_mean;
    let y_cov = &h * &state_cov * h.transpose() + DMatrix::identity(n, n) * m.obs_var;
    let cross = &state_cov * h.transpose();
    DenseMoments {
        state_mean,
        state_cov,
        y_mean,
        y_cov,
        cross,
        d,
    }
}

fn observed_index(y: &[Option<f64>]) -> Vec<usize> {
    y.iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|_| i))
        .collect()
}

/// Log density of the observed entries of `y` under the dense joint Gaussian.
pub fn dense_loglik(m: &StateSpaceModel, y: &[Option<f64>]) -> f64 {
    let dm = dense_moments(m, y.len());
    let idx = observed_index(y);
    let k = idx.len();
    let cov = DMatrix::from_fn(k, k, |i, j| dm.y_cov[(idx[i], idx[j])]);
    let resid = DVector::from_fn(k, |i, _| y[idx[i]].unwrap() - dm.y_mean[idx[i]]);
    let chol = cov.cholesky().expect("dense covariance is positive definite");
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let quad = resid.dot(&chol.solve(&resid));
    -0.5 * (k as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

/// `E[alpha_t | observed y]` for every `t`.
pub fn dense_smoothed_means(m: &StateSpaceModel, y: &[Option<f64>]) -> Vec<DVector<f64>> {
    let n = y.len();
    let dm = dense_moments(m, n);
    let idx = observed_index(y);
    let k = idx.len();
    let cov = DMatrix::from_fn(k, k, |i, j| dm.y_cov[(idx[i], idx[j])]);
    let cross = DMatrix::from_fn(n * dm.d, k, |r, j| dm.cross[(r, idx[j])]);
    let resid = DVector::from_fn(k, |i, _| y[idx[i]].unwrap() - dm.y_mean[idx[i]]);
    let weights = cov.cholesky().unwrap().solve(&resid);
    let mean = &dm.state_mean + cross * weights;
    (0..n)
        .map(|t| mean.rows(t * dm.d, dm.d).into_owned())
        .collect()
}

/// Relative difference with an absolute floor of 1.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Random time-invariant model with `d` in {1, 2}, `q <= d`, a moderate
/// proper prior, and strictly positive observation noise.
pub fn random_model(rng: &mut impl Rng) -> StateSpaceModel {
    let d = rng.random_range(1..=2usize);
    let q = rng.random_range(1..=d);
    let z = DVector::from_fn(d, |_, _| rng.random_range(-1.5..1.5));
    let transition = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.1..1.1));
    let control = DMatrix::from_fn(d, q, |_, _| rng.random_range(-1.0..1.0));
    let state_var = DVector::from_fn(q, |_, _| rng.random_range(0.01..1.0));
    let a1 = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
    let root = DMatrix::from_fn(d, d, |_, _| rng.random_range(-2.0..2.0));
    let p1 = &root * root.transpose() + DMatrix::identity(d, d) * 0.1;
    let obs_var = rng.random_range(0.05..2.0);
    StateSpaceModel::new(z, transition, control, obs_var, state_var, a1, p1).unwrap()
}

/// Observations from the model itself (with all slots present).
pub fn simulate(m: &StateSpaceModel, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    use rand_distr::StandardNormal;
    let d = m.z.len();
    let mut alpha = &m.a1
        + m.p1.clone().cholesky().unwrap().l() * DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        y.push(m.z.dot(&alpha) + m.obs_var.sqrt() * rng.sample::<f64, _>(StandardNormal));
        let eta = DVector::from_fn(m.state_var.len(), |j, _| {
            m.state_var[j].sqrt() * rng.sample::<f64, _>(StandardNormal)
        });
        alpha = &m.transition * alpha + &m.control * eta;
    }
    y
}

/// Local linear trend path starting at level 0.7.
pub fn simulate_trend_with(
    n: usize,
    obs_sd: f64,
    level_sd: f64,
    slope_sd: f64,
    slope0: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let obs = Normal::new(0.0, obs_sd).unwrap();
    let level_noise = Normal::new(0.0, level_sd).unwrap();
    let slope_noise = Normal::new(0.0, slope_sd).unwrap();
    let mut level = 0.7;
    let mut slope = slope0;
    (0..n)
        .map(|_| {
            let y = level + obs.sample(rng);
            level += slope + level_noise.sample(rng);
            slope += slope_noise.sample(rng);
            y
        })
        .collect()
}

/// Observation sd 0.01, level sd 0.003, slope sd 0.0005, initial slope -0.005.
pub fn simulate_trend(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    simulate_trend_with(n, 0.01, 0.003, 0.0005, -0.005, rng)
}
