//! Model-based speed and course controller.
//!
//! Maps a SOG/course reference to motor and steering inputs by converting
//! the desired ground velocity into a relative-velocity target (removing
//! the current), then applying proportional acceleration commands through
//! the inverse model tau = M(x_r)*a + sigma(x_r). Saturation to the input
//! box is silent apart from a debug log line.

use super::{ControlInput, OceanCurrent, SogCourseRef, VesselModelParams, VesselState};
use crate::angles::angle_diff;

#[derive(Debug, Clone, Copy)]
pub struct ControllerGains {
    /// Surge speed error to surge acceleration (1/s).
    pub k_speed: f64,
    /// Heading error to yaw-rate command (1/s).
    pub k_heading: f64,
    /// Yaw-rate error to yaw acceleration (1/s).
    pub k_rate: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self { k_speed: 0.25, k_heading: 0.35, k_rate: 1.2 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VesselController {
    pub gains: ControllerGains,
}

impl VesselController {
    pub fn new(gains: ControllerGains) -> Self {
        Self { gains }
    }

    /// Single feedback evaluation; stateless, so safe to call per step.
    pub fn control(
        &self,
        state: &VesselState,
        reference: &SogCourseRef,
        current: &OceanCurrent,
        params: &VesselModelParams,
        dt: f64,
    ) -> ControlInput {
        let u_d = reference.u_d.max(0.0);
        // Desired ground velocity, then the relative velocity achieving it.
        let v_des_n = u_d * reference.chi_d.cos() - current.v_x;
        let v_des_e = u_d * reference.chi_d.sin() - current.v_y;
        let v_rel = (v_des_n * v_des_n + v_des_e * v_des_e).sqrt();

        let u_r_d = v_rel.clamp(params.u_min, params.u_max);
        let psi_d = if v_rel > 1e-9 { v_des_e.atan2(v_des_n) } else { state.psi };

        let mut a_u = self.gains.k_speed * (u_r_d - state.u_r) + reference.u_d_dot;
        if dt > 0.0 {
            // Keep the velocity box invariant through the next step.
            let a_max = (params.u_max - state.u_r) / dt;
            let a_min = (params.u_min - state.u_r) / dt;
            a_u = a_u.clamp(a_min, a_max);
        }

        let r_cap = 0.95 * params.r_max;
        let r_d = (self.gains.k_heading * angle_diff(psi_d, state.psi) + reference.chi_d_dot)
            .clamp(-r_cap, r_cap);
        let a_r = self.gains.k_rate * (r_d - state.r);

        let tau_m_raw = params.m_u(state.u_r) * a_u + params.sigma_u(state.u_r);
        let tau_d_raw = params.m_r(state.u_r) * a_r + params.sigma_r(state.r);
        let (tau_m, tau_delta) = params.clamp_input(tau_m_raw, tau_d_raw);
        if (tau_m - tau_m_raw).abs() > 1e-9 || (tau_delta - tau_d_raw).abs() > 1e-9 {
            log::debug!(
                "controller saturated: ({tau_m_raw:.3}, {tau_d_raw:.3}) -> ({tau_m:.3}, {tau_delta:.3})"
            );
        }
        ControlInput { tau_m, tau_delta }
    }
}
