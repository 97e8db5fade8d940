//! Gibbs sampler over the state path and the variance parameters.
//!
//! Each sweep draws the path by FFBS given the variances, then each variance
//! from its conjugate inverse-gamma full conditional given the path.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::ffbs::ffbs_with_rng;
use super::model::StateSpaceModel;
use crate::error::{Error, Result};
use crate::series::sample_variance;

/// Inverse-gamma prior `IG(shape, scale)` on one variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePrior {
    pub shape: f64,
    pub scale: f64,
}

impl VariancePrior {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        let p = Self { shape, scale };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.shape > 0.0 && self.shape.is_finite() && self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::param(format!(
                "inverse-gamma prior needs shape > 0 and scale > 0, got ({}, {})",
                self.shape, self.scale
            )));
        }
        Ok(())
    }

    fn draw_posterior(&self, count: usize, sum_sq: f64, rng: &mut impl Rng) -> f64 {
        let shape = self.shape + 0.5 * count as f64;
        let rate = self.scale + 0.5 * sum_sq;
        let gamma = Gamma::new(shape, 1.0 / rate).expect("shape and rate are positive");
        loop {
            let g: f64 = gamma.sample(rng);
            let v = 1.0 / g;
            if v.is_finite() && v > 0.0 {
                return v;
            }
        }
    }
}

/// One prior for the observation variance and one per disturbance.
#[derive(Debug, Clone, PartialEq)]
pub struct Priors {
    pub obs: VariancePrior,
    pub state: Vec<VariancePrior>,
}

/// Default prior shape.
pub const DEFAULT_PRIOR_SHAPE: f64 = 0.01;
/// Default prior scale, relative to the sample variance of the fitted data.
pub const DEFAULT_PRIOR_SCALE_FACTOR: f64 = 0.01;

impl Priors {
    /// `IG(0.01, 0.01 * var(y))` on every variance.
    pub fn weak(state_count: usize, y: &[f64]) -> Result<Self> {
        Self::scaled(state_count, y, DEFAULT_PRIOR_SHAPE, DEFAULT_PRIOR_SCALE_FACTOR)
    }

    /// `IG(shape, scale_factor * var(y))` on every variance.
    pub fn scaled(state_count: usize, y: &[f64], shape: f64, scale_factor: f64) -> Result<Self> {
        let var = sample_variance(y)
            .filter(|v| *v > 0.0)
            .ok_or_else(|| Error::Diagnostic("data variance is zero; cannot scale priors".into()))?;
        let p = VariancePrior::new(shape, scale_factor * var)?;
        Ok(Self {
            obs: p,
            state: vec![p; state_count],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmcSettings {
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            n_iter: 2000,
            burn_in: 500,
            seed: 0,
        }
    }
}

/// Retained (post burn-in) draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub obs_var: Vec<f64>,
    /// `state_var[i][j]`: disturbance `j` at retained draw `i`.
    pub state_var: Vec<Vec<f64>>,
    /// `states[i][t]`: state at time `t` in retained draw `i`.
    pub states: Vec<Vec<DVector<f64>>>,
    pub burn_in: usize,
    pub seed: u64,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.obs_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs_var.is_empty()
    }

    /// `draw,obs_var,state_var_0,...` for diagnostics.
    pub fn variances_csv(&self) -> String {
        let q = self.state_var.first().map_or(0, Vec::len);
        let mut out = String::from("draw,obs_var");
        for j in 0..q {
            out.push_str(&format!(",state_var_{j}"));
        }
        out.push('\n');
        for (i, (s, qs)) in self.obs_var.iter().zip(&self.state_var).enumerate() {
            out.push_str(&format!("{i},{s:.9e}"));
            for v in qs {
                out.push_str(&format!(",{v:.9e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the sampler starting from the variances stored in `m`.
pub fn gibbs_sample(
    m: &StateSpaceModel,
    y: &[Option<f64>],
    priors: &Priors,
    settings: &McmcSettings,
) -> Result<PosteriorDraws> {
    if settings.n_iter <= settings.burn_in {
        return Err(Error::param(format!(
            "n_iter ({}) must exceed burn_in ({}) so that draws are retained",
            settings.n_iter, settings.burn_in
        )));
    }
    if y.is_empty() {
        return Err(Error::param("cannot sample from an empty series"));
    }
    priors.obs.validate()?;
    if priors.state.len() != m.disturbance_dim() {
        return Err(Error::param(format!(
            "expected {} state priors, got {}",
            m.disturbance_dim(),
            priors.state.len()
        )));
    }
    for p in &priors.state {
        p.validate()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let n_obs = y.iter().filter(|v| v.is_some()).count();
    let q = m.disturbance_dim();
    let control_pinv = pseudo_inverse(&m.control)?;
    let kept = settings.n_iter - settings.burn_in;
    let mut draws = PosteriorDraws {
        obs_var: Vec::with_capacity(kept),
        state_var: Vec::with_capacity(kept),
        states: Vec::with_capacity(kept),
        burn_in: settings.burn_in,
        seed: settings.seed,
    };

    let mut model = m.clone();
    for iter in 0..settings.n_iter {
        let path = ffbs_with_rng(&model, y, &mut rng)
            .map_err(|e| e.context(format!("gibbs iteration {iter}")))?;

        let obs_ss: f64 = y
            .iter()
            .zip(&path)
            .filter_map(|(obs, a)| obs.map(|v| (v - model.z.dot(a)).powi(2)))
            .sum();
        let obs_var = priors.obs.draw_posterior(n_obs, obs_ss, &mut rng);

        let mut state_ss = vec![0.0; q];
        for w in path.windows(2) {
            let eta = &control_pinv * (&w[1] - &model.transition * &w[0]);
            for (acc, e) in state_ss.iter_mut().zip(eta.iter()) {
                *acc += e * e;
            }
        }
        let state_var: Vec<f64> = priors
            .state
            .iter()
            .zip(&state_ss)
            .map(|(p, &ss)| p.draw_posterior(path.len() - 1, ss, &mut rng))
            .collect();

        model = model.with_variances(obs_var, &state_var)?;
        if iter >= settings.burn_in {
            draws.obs_var.push(obs_var);
            draws.state_var.push(state_var);
            draws.states.push(path);
        }
    }
    Ok(draws)
}

fn pseudo_inverse(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if r.is_square() {
        if let Some(inv) = r.clone().try_inverse() {
            return Ok(inv);
        }
    }
    r.clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::param(format!("control matrix has no pseudo-inverse: {e}")))
}
