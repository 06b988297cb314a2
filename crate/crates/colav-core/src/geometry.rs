//! Elliptical obstacle constraints and closest-point-of-approach metrics.
//!
//! The obstacle constraint is the log-regularized ellipse inequality
//!
//!   h_o(p) = -log(A^2 + B^2 + eps) + log(1 + eps) <= 0
//!
//! with A, B the point coordinates in the ellipse frame (rotated clockwise
//! by alpha) scaled by the axes. h_o is positive inside the ellipse and
//! smooth everywhere; eps avoids the log singularity at the center.

use crate::vessel::Vec2;
use serde::{Deserialize, Serialize};

/// Rotated elliptical keep-out region.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EllipseObstacle {
    /// Center north coordinate (m).
    pub x_c: f64,
    /// Center east coordinate (m).
    pub y_c: f64,
    /// Major axis (m).
    pub x_a: f64,
    /// Minor axis (m).
    pub y_a: f64,
    /// Clockwise rotation (rad).
    pub alpha: f64,
    /// Log regularization constant.
    pub eps: f64,
}

impl EllipseObstacle {
    pub fn new(x_c: f64, y_c: f64, x_a: f64, y_a: f64, alpha: f64) -> Self {
        Self { x_c, y_c, x_a, y_a, alpha, eps: 1e-6 }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x_c, self.y_c)
    }

    /// Same ellipse with both axes grown by a safety margin.
    pub fn padded(&self, margin: f64) -> Self {
        Self { x_a: self.x_a + margin, y_a: self.y_a + margin, ..*self }
    }

    /// Point coordinates in the ellipse frame, scaled by the axes.
    fn scaled_frame(&self, x: f64, y: f64) -> (f64, f64) {
        let dx = x - self.x_c;
        let dy = y - self.y_c;
        let (s, c) = self.alpha.sin_cos();
        let a = (dx * c + dy * s) / self.x_a;
        let b = (-dx * s + dy * c) / self.y_a;
        (a, b)
    }

    /// Un-regularized quadratic form; < 1 strictly inside the ellipse.
    pub fn quadratic_form(&self, x: f64, y: f64) -> f64 {
        let (a, b) = self.scaled_frame(x, y);
        a * a + b * b
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.quadratic_form(x, y) < 1.0
    }

    /// Euclidean distance from a point to the ellipse boundary (>= 0 on
    /// both sides). Coarse parametric scan refined by Newton iterations.
    pub fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.x_c;
        let dy = y - self.y_c;
        let (s, c) = self.alpha.sin_cos();
        let px = dx * c + dy * s;
        let py = -dx * s + dy * c;

        let dist2 = |t: f64| {
            let ex = self.x_a * t.cos();
            let ey = self.y_a * t.sin();
            (px - ex).powi(2) + (py - ey).powi(2)
        };
        let mut best_t = 0.0;
        let mut best = f64::INFINITY;
        let n = 256;
        for i in 0..n {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            let d = dist2(t);
            if d < best {
                best = d;
                best_t = t;
            }
        }
        // Newton on d/dt dist2(t) = 0.
        let mut t = best_t;
        for _ in 0..60 {
            let (st, ct) = t.sin_cos();
            let ex = self.x_a * ct;
            let ey = self.y_a * st;
            let dext = -self.x_a * st;
            let deyt = self.y_a * ct;
            let g = -2.0 * ((px - ex) * dext + (py - ey) * deyt);
            let h = 2.0 * (dext * dext + deyt * deyt)
                - 2.0 * ((px - ex) * (-self.x_a * ct) + (py - ey) * (-self.y_a * st));
            if h.abs() < 1e-30 {
                break;
            }
            let step = g / h;
            t -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        dist2(t).min(best).sqrt()
    }
}

/// Log-regularized ellipse constraint; <= 0 outside or on the boundary,
/// > 0 inside.
pub fn ellipse_constraint(p: Vec2, obs: &EllipseObstacle) -> f64 {
    let q = obs.quadratic_form(p.x, p.y);
    -(q + obs.eps).ln() + (1.0 + obs.eps).ln()
}

/// Gradient of [`ellipse_constraint`] with respect to the point.
pub fn ellipse_constraint_grad(p: Vec2, obs: &EllipseObstacle) -> Vec2 {
    let (a, b) = obs.scaled_frame(p.x, p.y);
    let q = a * a + b * b + obs.eps;
    let (s, c) = obs.alpha.sin_cos();
    // d a/d p = (c, s)/x_a ; d b/d p = (-s, c)/y_a
    let dq_dx = 2.0 * a * c / obs.x_a - 2.0 * b * s / obs.y_a;
    let dq_dy = 2.0 * a * s / obs.x_a + 2.0 * b * c / obs.y_a;
    Vec2::new(-dq_dx / q, -dq_dy / q)
}

/// Relative speed below which CPA time is defined as zero (m/s).
pub const RELATIVE_SPEED_EPS: f64 = 1e-3;

/// CPA and critical-point metrics for one (ownship, obstacle) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpaMetrics {
    /// Time to closest point of approach (s); negative when diverging.
    pub t_cpa: f64,
    /// Distance at CPA (m).
    pub d_cpa: f64,
    /// First time the predicted distance crosses the critical distance,
    /// when such a crossing exists.
    pub t_crit: Option<f64>,
}

impl CpaMetrics {
    pub fn compute(p: Vec2, v: Vec2, p_o: Vec2, v_o: Vec2, d_crit: f64) -> Self {
        let t_cpa = time_to_cpa(p, v, p_o, v_o);
        Self {
            t_cpa,
            d_cpa: dist_at_cpa(p, v, p_o, v_o),
            t_crit: time_to_critical(p, v, p_o, v_o, d_crit),
        }
    }
}

/// Time of minimum predicted distance under constant velocities. Zero when
/// the relative speed is negligible; positive when the vessels are closing.
pub fn time_to_cpa(p: Vec2, v: Vec2, p_o: Vec2, v_o: Vec2) -> f64 {
    let dp = p - p_o;
    let dv = v - v_o;
    let rel2 = dv.norm_squared();
    if rel2.sqrt() <= RELATIVE_SPEED_EPS {
        return 0.0;
    }
    -dp.dot(&dv) / rel2
}

/// Predicted distance at CPA (m).
pub fn dist_at_cpa(p: Vec2, v: Vec2, p_o: Vec2, v_o: Vec2) -> f64 {
    let t = time_to_cpa(p, v, p_o, v_o);
    ((p + v * t) - (p_o + v_o * t)).norm()
}

/// Smallest real root of ||dp + t dv|| = d_crit, i.e. the first crossing
/// of the critical distance. `None` when the predicted distance never
/// falls below d_crit. A degenerate always-inside geometry returns 0.
pub fn time_to_critical(p: Vec2, v: Vec2, p_o: Vec2, v_o: Vec2, d_crit: f64) -> Option<f64> {
    debug_assert!(d_crit > 0.0);
    let dp = p - p_o;
    let dv = v - v_o;
    let a = dv.norm_squared();
    let b = 2.0 * dp.dot(&dv);
    let c = dp.norm_squared() - d_crit * d_crit;
    if a <= RELATIVE_SPEED_EPS * RELATIVE_SPEED_EPS {
        // Constant separation: inside now or never.
        return if c <= 0.0 { Some(0.0) } else { None };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / (2.0 * a)).min((-b + sq) / (2.0 * a)))
}
