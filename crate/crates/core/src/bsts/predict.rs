use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::gibbs::PosteriorDraws;
use super::model::StateSpaceModel;
use crate::error::{Error, Result};

/// Simulated future observations, one path of length `horizon` per retained
/// draw. Each path starts from that draw's final state and uses that draw's
/// variances.
pub fn posterior_predict(
    draws: &PosteriorDraws,
    m: &StateSpaceModel,
    horizon: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if horizon == 0 {
        return Err(Error::param("forecast horizon must be at least 1"));
    }
    if draws.is_empty() {
        return Err(Error::param("no posterior draws to predict from"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    draws
        .states
        .iter()
        .zip(&draws.obs_var)
        .zip(&draws.state_var)
        .map(|((path, &obs_var), state_var)| {
            let mut alpha = path
                .last()
                .ok_or_else(|| Error::param("posterior draw has an empty state path"))?
                .clone();
            let obs_sd = obs_var.sqrt();
            let state_sd: Vec<f64> = state_var.iter().map(|v| v.sqrt()).collect();
            let mut out = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                let eta = nalgebra::DVector::from_iterator(
                    state_sd.len(),
                    state_sd.iter().map(|sd| sd * std_normal.sample(&mut rng)),
                );
                alpha = &m.transition * alpha + &m.control * eta;
                out.push(m.z.dot(&alpha) + obs_sd * std_normal.sample(&mut rng));
            }
            Ok(out)
        })
        .collect()
}
