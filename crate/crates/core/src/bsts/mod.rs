//! Bayesian structural time-series engine: local level / local linear trend
//! state-space models, Kalman filtering and smoothing, FFBS path draws and a
//! conjugate Gibbs sampler for the variances.

mod ffbs;
mod gibbs;
mod kalman;
mod linalg;
mod model;
mod predict;

pub use ffbs::{ffbs, ffbs_with_rng};
pub use gibbs::{
    gibbs_sample, McmcSettings, PosteriorDraws, Priors, VariancePrior, DEFAULT_PRIOR_SCALE_FACTOR,
    DEFAULT_PRIOR_SHAPE,
};
pub use kalman::{kalman_filter, kalman_smoother, observed, FilterOutput, SmootherOutput};
pub use model::{build_model, ComponentSpec, StateSpaceModel, Variances, DIFFUSE_SCALE};
pub use predict::posterior_predict;
