//! Kalman filter and fixed-interval smoother with missing observations.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::linalg::psd_floor;
use super::model::StateSpaceModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// `a_t = E[alpha_t | y_1..y_{t-1}]`.
    pub predicted_means: Vec<DVector<f64>>,
    pub predicted_covs: Vec<DMatrix<f64>>,
    /// `E[alpha_t | y_1..y_t]`.
    pub filtered_means: Vec<DVector<f64>>,
    pub filtered_covs: Vec<DMatrix<f64>>,
    /// `None` at missing slots.
    pub innovations: Vec<Option<f64>>,
    pub innovation_vars: Vec<Option<f64>>,
    pub log_likelihood: f64,
}

impl FilterOutput {
    pub fn len(&self) -> usize {
        self.predicted_means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted_means.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SmootherOutput {
    pub means: Vec<DVector<f64>>,
    pub covs: Vec<DMatrix<f64>>,
}

/// Wraps a fully observed series.
pub fn observed(y: &[f64]) -> Vec<Option<f64>> {
    y.iter().copied().map(Some).collect()
}

/// Forward pass. Missing slots get a prediction step only and add nothing to
/// the log-likelihood.
pub fn kalman_filter(m: &StateSpaceModel, y: &[Option<f64>]) -> Result<FilterOutput> {
    let n = y.len();
    if n == 0 {
        return Err(Error::param("cannot filter an empty series"));
    }
    if y.iter().all(Option::is_none) {
        return Err(Error::param("series has no observed values"));
    }
    let state_cov = m.state_cov();
    let z = &m.z;
    let mut out = FilterOutput {
        predicted_means: Vec::with_capacity(n),
        predicted_covs: Vec::with_capacity(n),
        filtered_means: Vec::with_capacity(n),
        filtered_covs: Vec::with_capacity(n),
        innovations: Vec::with_capacity(n),
        innovation_vars: Vec::with_capacity(n),
        log_likelihood: 0.0,
    };
    let mut a = m.a1.clone();
    let mut p = psd_floor(&m.p1);
    for (t, obs) in y.iter().enumerate() {
        let (af, pf) = match obs {
            Some(yt) => {
                let pz = &p * z;
                let f = z.dot(&pz) + m.obs_var;
                if !(f > 0.0) || !f.is_finite() {
                    return Err(Error::Conditioning { t, f });
                }
                let v = yt - z.dot(&a);
                let gain = &pz / f;
                out.log_likelihood += -0.5 * ((2.0 * PI).ln() + f.ln() + v * v / f);
                out.innovations.push(Some(v));
                out.innovation_vars.push(Some(f));
                (&a + &gain * v, psd_floor(&(&p - &gain * pz.transpose())))
            }
            None => {
                out.innovations.push(None);
                out.innovation_vars.push(None);
                (a.clone(), p.clone())
            }
        };
        let a_next = &m.transition * &af;
        let p_next = psd_floor(&(&m.transition * &pf * m.transition.transpose() + &state_cov));
        out.predicted_means.push(a);
        out.predicted_covs.push(p);
        out.filtered_means.push(af);
        out.filtered_covs.push(pf);
        a = a_next;
        p = p_next;
    }
    Ok(out)
}

/// Fixed-interval smoother in the backward `r_t, N_t` form, which needs no
/// inverse of the predicted covariance.
pub fn kalman_smoother(m: &StateSpaceModel, fo: &FilterOutput) -> Result<SmootherOutput> {
    let n = fo.len();
    let d = m.state_dim();
    let t_mat = &m.transition;
    let z = &m.z;
    let mut r = DVector::zeros(d);
    let mut nn = DMatrix::zeros(d, d);
    let mut means = vec![DVector::zeros(d); n];
    let mut covs = vec![DMatrix::zeros(d, d); n];
    for t in (0..n).rev() {
        let p = &fo.predicted_covs[t];
        match (fo.innovations[t], fo.innovation_vars[t]) {
            (Some(v), Some(f)) => {
                if !(f > 0.0) {
                    return Err(Error::Conditioning { t, f });
                }
                let k = t_mat * p * z / f;
                let l = t_mat - &k * z.transpose();
                r = z * (v / f) + l.transpose() * &r;
                nn = z * z.transpose() / f + l.transpose() * &nn * &l;
            }
            _ => {
                r = t_mat.transpose() * &r;
                nn = t_mat.transpose() * &nn * t_mat;
            }
        }
        means[t] = &fo.predicted_means[t] + p * &r;
        covs[t] = psd_floor(&(p - p * &nn * p));
    }
    Ok(SmootherOutput { means, covs })
}
