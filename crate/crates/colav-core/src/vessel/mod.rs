//! Vessel model and integration.
//!
//! 3DOF surface vessel under the zero-relative-sway assumption:
//!
//!   eta_dot = R(psi) * x_r + [V_c; 0]
//!   M(x_r) * x_r_dot + sigma(x_r) = tau
//!
//! with pose eta = [x, y, psi] in the North-East frame, relative velocity
//! x_r = [u_r, r], ocean current V_c = [V_x, V_y] and control input
//! tau = [tau_m, tau_delta]. M is diagonal with entries affine in u_r,
//! sigma is a per-axis cubic damping polynomial with sigma(0) = 0.

mod controller;
mod params;

pub use controller::{ControllerGains, VesselController};
pub use params::{ModelError, VesselModelParams};

use crate::angles::wrap_pi;
use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Vessel pose and relative velocity; the simulation's unit of truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselState {
    /// North position (m).
    pub x: f64,
    /// East position (m).
    pub y: f64,
    /// Heading (rad), wrapped to (-pi, pi].
    pub psi: f64,
    /// Relative surge speed (m/s).
    pub u_r: f64,
    /// Yaw rate (rad/s).
    pub r: f64,
}

impl VesselState {
    pub fn new(x: f64, y: f64, psi: f64, u_r: f64, r: f64) -> Self {
        Self { x, y, psi: wrap_pi(psi), u_r, r }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Projects (u_r, r) into the feasible velocity box X_r.
    pub fn clamp_velocity(&mut self, params: &VesselModelParams) {
        self.u_r = self.u_r.clamp(params.u_min, params.u_max);
        self.r = self.r.clamp(-params.r_max, params.r_max);
    }
}

/// Motor and steering input, constrained to the input box U.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlInput {
    pub tau_m: f64,
    pub tau_delta: f64,
}

/// Constant ocean current in the North-East frame (m/s).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OceanCurrent {
    pub v_x: f64,
    pub v_y: f64,
}

impl OceanCurrent {
    pub fn new(v_x: f64, v_y: f64) -> Self {
        Self { v_x, v_y }
    }

    pub fn vector(&self) -> Vec2 {
        Vec2::new(self.v_x, self.v_y)
    }

    pub fn speed(&self) -> f64 {
        self.vector().norm()
    }
}

/// Desired speed over ground and course, with optional feedforward rates.
#[derive(Debug, Clone, Copy)]
pub struct SogCourseRef {
    pub u_d: f64,
    pub chi_d: f64,
    pub u_d_dot: f64,
    pub chi_d_dot: f64,
}

impl SogCourseRef {
    pub fn new(u_d: f64, chi_d: f64) -> Self {
        Self { u_d, chi_d, u_d_dot: 0.0, chi_d_dot: 0.0 }
    }
}

pub type StateDerivative = [f64; 5];

/// Continuous-time state derivative of the vessel model.
pub fn dynamics_derivative(
    state: &VesselState,
    input: &ControlInput,
    current: &OceanCurrent,
    params: &VesselModelParams,
) -> StateDerivative {
    let (s, c) = state.psi.sin_cos();
    [
        state.u_r * c + current.v_x,
        state.u_r * s + current.v_y,
        state.r,
        (input.tau_m - params.sigma_u(state.u_r)) / params.m_u(state.u_r),
        (input.tau_delta - params.sigma_r(state.r)) / params.m_r(state.u_r),
    ]
}

/// Classical 4th-order Runge-Kutta step with the input held over `dt`.
pub fn integrate_rk4(
    state: &VesselState,
    input: &ControlInput,
    current: &OceanCurrent,
    params: &VesselModelParams,
    dt: f64,
) -> VesselState {
    debug_assert!(dt > 0.0);
    let eval = |s: &VesselState| dynamics_derivative(s, input, current, params);
    let shift = |s: &VesselState, k: &StateDerivative, h: f64| VesselState {
        x: s.x + h * k[0],
        y: s.y + h * k[1],
        psi: s.psi + h * k[2],
        u_r: s.u_r + h * k[3],
        r: s.r + h * k[4],
    };

    let k1 = eval(state);
    let k2 = eval(&shift(state, &k1, dt / 2.0));
    let k3 = eval(&shift(state, &k2, dt / 2.0));
    let k4 = eval(&shift(state, &k3, dt));

    let mut next = *state;
    next.x += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    next.y += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    next.psi += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
    next.u_r += dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
    next.r += dt / 6.0 * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]);
    next.psi = wrap_pi(next.psi);
    next
}

/// Speed over ground and course from the ground velocity
/// p_dot = R(psi) x_r + V_c. Returns (psi-aligned) course when U = 0.
pub fn sog_course(state: &VesselState, current: &OceanCurrent) -> (f64, f64) {
    let g_n = state.u_r * state.psi.cos() + current.v_x;
    let g_e = state.u_r * state.psi.sin() + current.v_y;
    let u = (g_n * g_n + g_e * g_e).sqrt();
    if u <= 1e-12 {
        (0.0, state.psi)
    } else {
        (u, g_e.atan2(g_n))
    }
}

/// Ground velocity vector of the vessel.
pub fn ground_velocity(state: &VesselState, current: &OceanCurrent) -> Vec2 {
    Vec2::new(
        state.u_r * state.psi.cos() + current.v_x,
        state.u_r * state.psi.sin() + current.v_y,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn params() -> VesselModelParams {
        VesselModelParams::default_config()
    }

    fn equilibrium_input(p: &VesselModelParams, u_r: f64, r: f64) -> ControlInput {
        ControlInput { tau_m: p.sigma_u(u_r), tau_delta: p.sigma_r(r) }
    }

    #[test]
    fn equilibrium_input_cancels_damping() {
        let p = params();
        let s = VesselState::new(0.0, 0.0, 0.0, 5.0, 0.0);
        let d = dynamics_derivative(&s, &equilibrium_input(&p, 5.0, 0.0), &OceanCurrent::default(), &p);
        assert!((d[0] - 5.0).abs() < 1e-12);
        for v in &d[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn pose_derivative_includes_current() {
        let p = params();
        let s = VesselState::new(0.0, 0.0, FRAC_PI_2, 5.0, 0.0);
        let cur = OceanCurrent::new(-2.0, 0.0);
        let d = dynamics_derivative(&s, &equilibrium_input(&p, 5.0, 0.0), &cur, &p);
        // R(pi/2)*(5,0) + (-2,0) = (-2, 5), psi_dot = 0
        assert!((d[0] + 2.0).abs() < 1e-12);
        assert!((d[1] - 5.0).abs() < 1e-12);
        assert!(d[2].abs() < 1e-12);
    }

    #[test]
    fn yaw_rate_drives_heading() {
        let p = params();
        let s = VesselState::new(0.0, 0.0, 0.0, 0.0, 0.1);
        let d = dynamics_derivative(&s, &ControlInput::default(), &OceanCurrent::default(), &p);
        assert!((d[2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rk4_fixed_point_at_zero_derivative() {
        let p = params();
        let s = VesselState::new(10.0, -3.0, 0.7, 0.0, 0.0);
        let next = integrate_rk4(&s, &ControlInput::default(), &OceanCurrent::default(), &p, 5.0);
        assert_eq!(s, next);
    }

    #[test]
    fn rk4_exact_for_constant_yaw_rate() {
        let p = params();
        let s = VesselState::new(0.0, 0.0, 0.0, 5.0, 0.1);
        let input = equilibrium_input(&p, 5.0, 0.1);
        let next = integrate_rk4(&s, &input, &OceanCurrent::default(), &p, 10.0);
        assert!((next.psi - 1.0).abs() < 1e-12);
        assert!((next.r - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rk4_two_half_steps_match_full_step() {
        let p = params();
        let s = VesselState::new(0.0, 0.0, 0.3, 6.0, 0.02);
        let input = ControlInput { tau_m: 0.4, tau_delta: 0.3 };
        let cur = OceanCurrent::new(0.5, -0.5);
        let full = integrate_rk4(&s, &input, &cur, &p, 10.0);
        let half = integrate_rk4(&s, &input, &cur, &p, 5.0);
        let half2 = integrate_rk4(&half, &input, &cur, &p, 5.0);
        let err = ((full.x - half2.x).powi(2) + (full.y - half2.y).powi(2)).sqrt();
        let scale = (full.x * full.x + full.y * full.y).sqrt().max(1.0);
        assert!(err / scale < 1e-6, "relative error {}", err / scale);
    }

    #[test]
    fn rk4_error_shrinks_sixteenfold_when_halving_dt() {
        let p = params();
        let s0 = VesselState::new(0.0, 0.0, 0.0, 4.0, 0.0);
        let input = ControlInput { tau_m: 0.6, tau_delta: 0.5 };
        let cur = OceanCurrent::new(0.3, 0.1);
        let total = 16.0;
        let run = |dt: f64| {
            let steps = (total / dt).round() as usize;
            let mut s = s0;
            for _ in 0..steps {
                s = integrate_rk4(&s, &input, &cur, &p, dt);
            }
            s
        };
        let reference = run(total / 1600.0);
        let coarse = run(4.0);
        let fine = run(2.0);
        let err = |s: &VesselState| {
            ((s.x - reference.x).powi(2)
                + (s.y - reference.y).powi(2)
                + (s.psi - reference.psi).powi(2))
            .sqrt()
        };
        let ratio = err(&coarse) / err(&fine);
        assert!((10.0..=25.0).contains(&ratio), "order ratio {ratio}");
    }

    #[test]
    fn damping_dissipates_surge_without_input() {
        let p = params();
        let mut s = VesselState::new(0.0, 0.0, 0.0, 8.0, 0.0);
        let mut last = s.u_r;
        for _ in 0..120 {
            s = integrate_rk4(&s, &ControlInput::default(), &OceanCurrent::default(), &p, 1.0);
            assert!(s.u_r <= last + 1e-12);
            last = s.u_r;
        }
        assert!(s.u_r < 4.0);
    }

    #[test]
    fn sog_course_examples() {
        let s = VesselState::new(0.0, 0.0, 0.0, 5.0, 0.0);
        let (u, chi) = sog_course(&s, &OceanCurrent::default());
        assert!((u - 5.0).abs() < 1e-12 && chi.abs() < 1e-12);

        let (u, chi) = sog_course(&s, &OceanCurrent::new(0.0, 5.0));
        assert!((u - 50f64.sqrt()).abs() < 1e-12);
        assert!((chi - FRAC_PI_4).abs() < 1e-12);

        let s = VesselState::new(0.0, 0.0, 1.3, 0.0, 0.0);
        let (u, chi) = sog_course(&s, &OceanCurrent::default());
        assert_eq!(u, 0.0);
        assert_eq!(chi, 1.3);
    }

    #[test]
    fn sog_consistent_with_finite_differenced_positions() {
        let p = params();
        let cur = OceanCurrent::new(-1.0, 1.0);
        let mut s = VesselState::new(0.0, 0.0, 2.0, 7.0, 0.01);
        let input = equilibrium_input(&p, 7.0, 0.01);
        let dt = 0.5;
        for _ in 0..20 {
            let next = integrate_rk4(&s, &input, &cur, &p, dt);
            let (u, chi) = sog_course(&s, &cur);
            let dx = (next.x - s.x) / dt;
            let dy = (next.y - s.y) / dt;
            let u_fd = (dx * dx + dy * dy).sqrt();
            let chi_fd = dy.atan2(dx);
            assert!((u - u_fd).abs() < 0.05 * dt.max(0.1));
            assert!(crate::angles::angle_diff(chi, chi_fd).abs() < 0.05);
            s = next;
        }
    }

    #[test]
    fn heading_wraps_after_integration() {
        let p = params();
        let mut s = VesselState::new(0.0, 0.0, 3.0, 5.0, 0.14);
        let input = equilibrium_input(&p, 5.0, 0.14);
        for _ in 0..40 {
            s = integrate_rk4(&s, &input, &OceanCurrent::default(), &p, 2.0);
            assert!(s.psi > -PI && s.psi <= PI);
        }
    }
}
