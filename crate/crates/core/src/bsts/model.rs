use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::sample_variance;

/// Scale of the diffuse initial covariance relative to the data variance.
pub const DIFFUSE_SCALE: f64 = 1e6;

/// Time-invariant linear Gaussian state-space model
///
/// ```text
/// y_t       = z' alpha_t + eps_t,        eps_t ~ N(0, obs_var)
/// alpha_t+1 = T alpha_t + R eta_t,       eta_t ~ N(0, diag(state_var))
/// alpha_1   ~ N(a1, p1)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub z: DVector<f64>,
    pub transition: DMatrix<f64>,
    pub control: DMatrix<f64>,
    pub obs_var: f64,
    /// Diagonal of the disturbance covariance `Q`.
    pub state_var: DVector<f64>,
    pub a1: DVector<f64>,
    pub p1: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(
        z: DVector<f64>,
        transition: DMatrix<f64>,
        control: DMatrix<f64>,
        obs_var: f64,
        state_var: DVector<f64>,
        a1: DVector<f64>,
        p1: DMatrix<f64>,
    ) -> Result<Self> {
        let d = z.len();
        let q = state_var.len();
        if d == 0 {
            return Err(Error::param("state dimension must be positive"));
        }
        if transition.shape() != (d, d) || p1.shape() != (d, d) || a1.len() != d {
            return Err(Error::param("transition, a1 and p1 must match the state dimension"));
        }
        if q > d || control.shape() != (d, q) {
            return Err(Error::param(format!(
                "control matrix must be {d}x{q} with q <= d"
            )));
        }
        check_variance("observation", obs_var)?;
        for (j, &v) in state_var.iter().enumerate() {
            check_variance(&format!("state[{j}]"), v)?;
        }
        if (&p1 - p1.transpose()).amax() > 1e-12 * p1.amax().max(1.0) {
            return Err(Error::param("p1 must be symmetric"));
        }
        if p1.clone().symmetric_eigen().eigenvalues.min() < -1e-10 * p1.amax().max(1.0) {
            return Err(Error::param("p1 must be positive semi-definite"));
        }
        Ok(Self {
            z,
            transition,
            control,
            obs_var,
            state_var,
            a1,
            p1,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.z.len()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.state_var.len()
    }

    /// `R Q R'`.
    pub fn state_cov(&self) -> DMatrix<f64> {
        &self.control * DMatrix::from_diagonal(&self.state_var) * self.control.transpose()
    }

    /// Same structure with new variances.
    pub fn with_variances(&self, obs_var: f64, state_var: &[f64]) -> Result<Self> {
        if state_var.len() != self.disturbance_dim() {
            return Err(Error::param(format!(
                "expected {} state variances, got {}",
                self.disturbance_dim(),
                state_var.len()
            )));
        }
        check_variance("observation", obs_var)?;
        for (j, &v) in state_var.iter().enumerate() {
            check_variance(&format!("state[{j}]"), v)?;
        }
        Ok(Self {
            obs_var,
            state_var: DVector::from_column_slice(state_var),
            ..self.clone()
        })
    }
}

fn check_variance(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::param(format!("{name} variance must be finite and >= 0, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSpec {
    LocalLevel,
    LocalLinearTrend,
}

impl ComponentSpec {
    pub fn state_dim(self) -> usize {
        match self {
            ComponentSpec::LocalLevel => 1,
            ComponentSpec::LocalLinearTrend => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentSpec::LocalLevel => "local_level",
            ComponentSpec::LocalLinearTrend => "local_linear_trend",
        }
    }
}

impl fmt::Display for ComponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local_level" => Ok(ComponentSpec::LocalLevel),
            "local_linear_trend" => Ok(ComponentSpec::LocalLinearTrend),
            other => Err(Error::param(format!(
                "unknown component {other:?} (local_level, local_linear_trend)"
            ))),
        }
    }
}

/// Observation and per-disturbance variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Variances {
    pub obs: f64,
    pub state: Vec<f64>,
}

/// Model for `spec` with a zero initial mean and diffuse `P1 = kappa I`,
/// `kappa = 1e6 * var(y)` (or `1e6` without usable data).
pub fn build_model(spec: ComponentSpec, variances: &Variances, data: Option<&[f64]>) -> Result<StateSpaceModel> {
    let d = spec.state_dim();
    if variances.state.len() != d {
        return Err(Error::param(format!(
            "{spec} needs {d} state variances, got {}",
            variances.state.len()
        )));
    }
    let scale = data
        .and_then(sample_variance)
        .filter(|v| *v > 0.0)
        .unwrap_or(1.0);
    let kappa = DIFFUSE_SCALE * scale;
    let (z, transition) = match spec {
        ComponentSpec::LocalLevel => (DVector::from_element(1, 1.0), DMatrix::from_element(1, 1, 1.0)),
        ComponentSpec::LocalLinearTrend => (
            DVector::from_column_slice(&[1.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
        ),
    };
    StateSpaceModel::new(
        z,
        transition,
        DMatrix::identity(d, d),
        variances.obs,
        DVector::from_column_slice(&variances.state),
        DVector::zeros(d),
        DMatrix::identity(d, d) * kappa,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(obs: f64, state: &[f64]) -> Variances {
        Variances {
            obs,
            state: state.to_vec(),
        }
    }

    #[test]
    fn local_level_matrices() {
        let m = build_model(ComponentSpec::LocalLevel, &vars(1.0, &[0.5]), None).unwrap();
        assert_eq!(m.state_dim(), 1);
        assert_eq!(m.z[0], 1.0);
        assert_eq!(m.transition[(0, 0)], 1.0);
        assert_eq!(m.control[(0, 0)], 1.0);
        assert_eq!(m.state_cov()[(0, 0)], 0.5);
        assert_eq!(m.p1[(0, 0)], DIFFUSE_SCALE);
    }

    #[test]
    fn local_linear_trend_matrices() {
        let y = [1.0, 2.0, 4.0];
        let m = build_model(ComponentSpec::LocalLinearTrend, &vars(1.0, &[0.1, 0.01]), Some(&y)).unwrap();
        assert_eq!(m.transition, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        assert_eq!(m.z, DVector::from_column_slice(&[1.0, 0.0]));
        assert_eq!(m.control, DMatrix::identity(2, 2));
        assert_eq!(m.state_var, DVector::from_column_slice(&[0.1, 0.01]));
        assert_eq!(m.a1, DVector::zeros(2));
        let var = sample_variance(&y).unwrap();
        assert!((m.p1[(1, 1)] - DIFFUSE_SCALE * var).abs() < 1e-6);
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(build_model(ComponentSpec::LocalLevel, &vars(-1.0, &[0.1]), None).is_err());
        assert!(build_model(ComponentSpec::LocalLevel, &vars(1.0, &[-0.1]), None).is_err());
        assert!(build_model(ComponentSpec::LocalLevel, &vars(1.0, &[0.1, 0.1]), None).is_err());
    }

    #[test]
    fn component_names_round_trip() {
        for c in [ComponentSpec::LocalLevel, ComponentSpec::LocalLinearTrend] {
            assert_eq!(c.name().parse::<ComponentSpec>().unwrap(), c);
        }
    }
}
