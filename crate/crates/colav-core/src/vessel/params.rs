//! Vessel model parameters, loaded from JSON (SI units).
//!
//! The inertia matrix is diagonal with entries m_u0 + m_u1*u_r and
//! m_r0 + m_r1*u_r; damping is a per-axis cubic polynomial without a
//! constant term, so sigma(0) = 0 holds by construction. The input maps
//! are affine: n(tau_m) = k_n*tau_m (propeller speed) and
//! delta(tau_delta) = k_delta*tau_delta (motor angle, rad).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("inertia not positive definite over the velocity box: {0}")]
    SingularInertia(String),
    #[error("invalid velocity box: {0}")]
    VelocityBox(String),
    #[error("invalid input box: {0}")]
    InputBox(String),
    #[error("u_max {0} m/s exceeds the 18 m/s model envelope")]
    UMaxTooLarge(f64),
    #[error("failed to parse model parameters: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselModelParams {
    pub m_u0: f64,
    pub m_u1: f64,
    pub m_r0: f64,
    pub m_r1: f64,
    /// Surge damping polynomial coefficients [c1, c2, c3] for
    /// c1*u + c2*u^2 + c3*u^3.
    pub sigma_u: [f64; 3],
    /// Yaw damping polynomial coefficients [c1, c2, c3].
    pub sigma_r: [f64; 3],
    /// Input-to-propeller-speed gain.
    pub k_n: f64,
    /// Input-to-motor-angle gain (rad).
    pub k_delta: f64,
    /// Control-origin-to-motor length (m).
    pub l_m: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub r_max: f64,
    pub tau_m_max: f64,
    pub tau_delta_max: f64,
}

const DEFAULTS_JSON: &str = include_str!("telemetron_defaults.json");

impl VesselModelParams {
    /// Default parameter set (top speed 18 m/s at full throttle), from the
    /// bundled config file.
    pub fn default_config() -> Self {
        Self::from_json(DEFAULTS_JSON).expect("bundled defaults are valid")
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let params: Self = serde_json::from_str(json)?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.u_min < 0.0 || self.u_max <= self.u_min {
            return Err(ModelError::VelocityBox(format!(
                "u range [{}, {}]",
                self.u_min, self.u_max
            )));
        }
        if self.r_max <= 0.0 {
            return Err(ModelError::VelocityBox(format!("r_max {}", self.r_max)));
        }
        if self.u_max > 18.0 {
            return Err(ModelError::UMaxTooLarge(self.u_max));
        }
        if self.tau_m_max <= 0.0 || self.tau_delta_max <= 0.0 {
            return Err(ModelError::InputBox(format!(
                "tau_m_max {}, tau_delta_max {}",
                self.tau_m_max, self.tau_delta_max
            )));
        }
        // M(x_r) must stay positive definite for every u_r in the box;
        // both diagonal entries are affine in u_r so the endpoints suffice.
        for u in [self.u_min, self.u_max] {
            if self.m_u(u) <= 0.0 || self.m_r(u) <= 0.0 {
                return Err(ModelError::SingularInertia(format!(
                    "M({u}) = diag({}, {})",
                    self.m_u(u),
                    self.m_r(u)
                )));
            }
        }
        Ok(())
    }

    pub fn m_u(&self, u_r: f64) -> f64 {
        self.m_u0 + self.m_u1 * u_r
    }

    pub fn m_r(&self, u_r: f64) -> f64 {
        self.m_r0 + self.m_r1 * u_r
    }

    pub fn sigma_u(&self, u_r: f64) -> f64 {
        u_r * (self.sigma_u[0] + u_r * (self.sigma_u[1] + u_r * self.sigma_u[2]))
    }

    pub fn sigma_r(&self, r: f64) -> f64 {
        r * (self.sigma_r[0] + r * (self.sigma_r[1] + r * self.sigma_r[2]))
    }

    /// Propeller angular velocity from throttle input.
    pub fn prop_speed(&self, tau_m: f64) -> f64 {
        self.k_n * tau_m
    }

    /// Motor angle (rad) from steering input.
    pub fn motor_angle(&self, tau_delta: f64) -> f64 {
        self.k_delta * tau_delta
    }

    pub fn clamp_input(&self, tau_m: f64, tau_delta: f64) -> (f64, f64) {
        (
            tau_m.clamp(0.0, self.tau_m_max),
            tau_delta.clamp(-self.tau_delta_max, self.tau_delta_max),
        )
    }
}
