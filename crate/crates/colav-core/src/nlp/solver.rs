//! Augmented-Lagrangian solver with an L-BFGS inner minimizer.
//!
//! The outer loop holds multiplier estimates for the equality and
//! inequality rows and a quadratic penalty weight; the smooth merit is
//! minimized by L-BFGS with Armijo backtracking. Multipliers update on
//! sufficient feasibility progress, otherwise the penalty grows. Variable
//! bounds are lowered to inequality rows before solving. Everything is
//! plain f64 arithmetic in a fixed order, so repeated solves on the same
//! platform are bit-identical.

use super::problem::{numeric_gradient, numeric_jacobian, ConstraintBlock, NlpProblem};
use std::cell::RefCell;
use std::rc::Rc;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol_constraint: f64,
    pub tol_grad: f64,
    /// Combined inner-iteration budget for one solve.
    pub max_iterations: usize,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub lbfgs_memory: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_constraint: 1e-6,
            tol_grad: 1e-6,
            max_iterations: 500,
            penalty_init: 10.0,
            penalty_growth: 10.0,
            penalty_max: 1e9,
            lbfgs_memory: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub cost: f64,
    pub max_eq_violation: f64,
    pub max_ineq_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set by callers when a fallback produced this result (e.g. a
    /// homotopy step failed to converge).
    pub degraded: bool,
}

impl SolveReport {
    pub fn violation(&self) -> f64 {
        self.max_eq_violation.max(self.max_ineq_violation)
    }
}

/// Constraint-side workspace: stacked values and a dense Jacobian.
struct Blocks {
    blocks: Vec<ConstraintBlock>,
    rows: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
    jac: Vec<f64>,
    hi_buf: Vec<f64>,
    lo_buf: Vec<f64>,
}

impl Blocks {
    fn new(blocks: Vec<ConstraintBlock>, dim: usize) -> Self {
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.rows;
        }
        let max_rows = blocks.iter().map(|b| b.rows).max().unwrap_or(0);
        Self {
            blocks,
            rows,
            offsets,
            values: vec![0.0; rows],
            jac: vec![0.0; rows * dim],
            hi_buf: vec![0.0; max_rows],
            lo_buf: vec![0.0; max_rows],
        }
    }

    fn eval(&mut self, w: &[f64]) {
        for (i, block) in self.blocks.iter().enumerate() {
            let offset = self.offsets[i];
            (block.eval)(w, &mut self.values[offset..offset + block.rows]);
        }
    }

    fn eval_into(&self, w: &[f64], out: &mut [f64]) {
        for (i, block) in self.blocks.iter().enumerate() {
            let offset = self.offsets[i];
            (block.eval)(w, &mut out[offset..offset + block.rows]);
        }
    }

    fn jacobian(&mut self, w: &[f64], dim: usize) {
        self.jac.fill(0.0);
        for i in 0..self.blocks.len() {
            let offset = self.offsets[i];
            let rows = self.blocks[i].rows;
            let slice = &mut self.jac[offset * dim..(offset + rows) * dim];
            match &self.blocks[i].jac {
                Some(jac) => (jac)(w, slice),
                None => numeric_jacobian(
                    &self.blocks[i].eval,
                    rows,
                    w,
                    slice,
                    &mut self.hi_buf[..rows],
                    &mut self.lo_buf[..rows],
                ),
            }
        }
    }

    /// grad += J^T y using the stored Jacobian.
    fn add_jt_y(&self, y: &[f64], grad: &mut [f64], dim: usize) {
        for r in 0..self.rows {
            let yr = y[r];
            if yr == 0.0 {
                continue;
            }
            let row = &self.jac[r * dim..(r + 1) * dim];
            for (g, j) in grad.iter_mut().zip(row) {
                *g += yr * j;
            }
        }
    }
}

fn clone_block(b: &ConstraintBlock) -> ConstraintBlock {
    ConstraintBlock { name: b.name.clone(), rows: b.rows, eval: b.eval.clone(), jac: b.jac.clone() }
}

/// Converts finite variable bounds into an inequality block.
fn bounds_block(problem: &NlpProblem) -> Option<ConstraintBlock> {
    let mut rows_meta = Vec::new();
    for (i, &(lo, hi)) in problem.bounds.iter().enumerate() {
        if lo.is_finite() {
            rows_meta.push((i, lo, true));
        }
        if hi.is_finite() {
            rows_meta.push((i, hi, false));
        }
    }
    if rows_meta.is_empty() {
        return None;
    }
    let rows = rows_meta.len();
    let meta = Rc::new(rows_meta);
    let meta_eval = meta.clone();
    let meta_jac = meta;
    let dim = problem.dim;
    Some(ConstraintBlock {
        name: "variable_bounds".to_string(),
        rows,
        eval: Rc::new(move |w, out| {
            for (r, &(i, b, is_lower)) in meta_eval.iter().enumerate() {
                out[r] = if is_lower { b - w[i] } else { w[i] - b };
            }
        }),
        jac: Some(Rc::new(move |_w, jac| {
            for (r, &(i, _b, is_lower)) in meta_jac.iter().enumerate() {
                jac[r * dim + i] = if is_lower { -1.0 } else { 1.0 };
            }
        })),
    })
}

/// Solves the NLP from `guess`. Never fails on non-convergence: the best
/// iterate found is returned with `converged = false`.
pub fn solve_nlp(problem: &NlpProblem, guess: &[f64], opts: &SolveOptions) -> SolveReport {
    assert_eq!(guess.len(), problem.dim, "guess dimension mismatch");
    let dim = problem.dim;

    let eq = RefCell::new(Blocks::new(problem.eq_blocks.iter().map(clone_block).collect(), dim));
    let mut ineq_blocks: Vec<ConstraintBlock> = problem.ineq_blocks.iter().map(clone_block).collect();
    if let Some(b) = bounds_block(problem) {
        ineq_blocks.push(b);
    }
    let ineq = RefCell::new(Blocks::new(ineq_blocks, dim));

    let m_eq = eq.borrow().rows;
    let m_ineq = ineq.borrow().rows;
    let mut lambda = vec![0.0; m_eq];
    let mut mu = vec![0.0; m_ineq];
    let mut rho = opts.penalty_init;

    let mut w = guess.to_vec();
    let mut total_iters = 0usize;

    let cost_of = |x: &[f64]| problem.cost(x);

    let analytic: Vec<_> = problem.cost_terms.iter().filter(|t| t.grad.is_some()).collect();
    let numeric: Vec<_> = problem.cost_terms.iter().filter(|t| t.grad.is_none()).collect();
    let cost_grad = |x: &[f64], grad: &mut Vec<f64>| {
        grad.fill(0.0);
        for term in &analytic {
            (term.grad.as_ref().unwrap())(x, grad);
        }
        if !numeric.is_empty() {
            let mut num = vec![0.0; x.len()];
            numeric_gradient(|p| numeric.iter().map(|t| (t.eval)(p)).sum::<f64>(), x, &mut num);
            for (g, n) in grad.iter_mut().zip(&num) {
                *g += n;
            }
        }
    };

    let violation_of = |g: &[f64], h: &[f64]| -> (f64, f64) {
        let veq = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let vineq = h.iter().fold(0.0f64, |m, v| m.max(*v)).max(0.0);
        (veq, vineq)
    };

    let mut g_buf = vec![0.0; m_eq];
    let mut h_buf = vec![0.0; m_ineq];
    eq.borrow().eval_into(&w, &mut g_buf);
    ineq.borrow().eval_into(&w, &mut h_buf);
    let (veq0, vineq0) = violation_of(&g_buf, &h_buf);
    let mut best = SolveReport {
        solution: w.clone(),
        cost: cost_of(&w),
        max_eq_violation: veq0,
        max_ineq_violation: vineq0,
        iterations: 0,
        converged: false,
        degraded: false,
    };

    let mut prev_violation = f64::INFINITY;
    let mut outer = 0usize;
    while total_iters < opts.max_iterations {
        outer += 1;
        let gtol = if m_eq == 0 && m_ineq == 0 {
            opts.tol_grad
        } else {
            (0.1 * prev_violation).clamp(opts.tol_grad, 1e-2)
        };

        let budget = (opts.max_iterations - total_iters).min(150);
        let (iters, grad_norm) = {
            let lambda_ref = &lambda;
            let mu_ref = &mu;
            let value = |x: &[f64]| {
                let mut g = vec![0.0; m_eq];
                let mut h = vec![0.0; m_ineq];
                eq.borrow().eval_into(x, &mut g);
                ineq.borrow().eval_into(x, &mut h);
                merit_value(cost_of(x), &g, &h, lambda_ref, mu_ref, rho)
            };
            let gradient = |x: &[f64], grad: &mut Vec<f64>| {
                cost_grad(x, grad);
                let mut eq_ws = eq.borrow_mut();
                eq_ws.eval(x);
                eq_ws.jacobian(x, dim);
                let y_eq: Vec<f64> =
                    eq_ws.values.iter().zip(lambda_ref).map(|(g, l)| l + rho * g).collect();
                eq_ws.add_jt_y(&y_eq, grad, dim);
                let mut ineq_ws = ineq.borrow_mut();
                ineq_ws.eval(x);
                ineq_ws.jacobian(x, dim);
                let y_ineq: Vec<f64> = ineq_ws
                    .values
                    .iter()
                    .zip(mu_ref)
                    .map(|(h, m)| (m + rho * h).max(0.0))
                    .collect();
                ineq_ws.add_jt_y(&y_ineq, grad, dim);
            };
            lbfgs_minimize(&mut w, budget, gtol, opts.lbfgs_memory, value, gradient)
        };
        total_iters += iters.max(1);

        eq.borrow().eval_into(&w, &mut g_buf);
        ineq.borrow().eval_into(&w, &mut h_buf);
        let (veq, vineq) = violation_of(&g_buf, &h_buf);
        let violation = veq.max(vineq);
        let cost = cost_of(&w);

        let feasible_now = violation <= opts.tol_constraint;
        let best_feasible = best.violation() <= opts.tol_constraint;
        if (feasible_now && (!best_feasible || cost < best.cost))
            || (!best_feasible && violation < best.violation())
        {
            best = SolveReport {
                solution: w.clone(),
                cost,
                max_eq_violation: veq,
                max_ineq_violation: vineq,
                iterations: total_iters,
                converged: false,
                degraded: false,
            };
        }

        log::debug!(
            "al outer {outer}: inner {iters}, cost {cost:.6e}, viol {violation:.3e}, grad {grad_norm:.3e}, rho {rho:.1e}"
        );

        if feasible_now && grad_norm <= opts.tol_grad.max(gtol) && gtol <= 10.0 * opts.tol_grad {
            return SolveReport {
                solution: w,
                cost,
                max_eq_violation: veq,
                max_ineq_violation: vineq,
                iterations: total_iters,
                converged: true,
                degraded: false,
            };
        }

        if violation <= 0.25 * prev_violation || feasible_now || rho >= opts.penalty_max {
            for (l, g) in lambda.iter_mut().zip(&g_buf) {
                *l += rho * g;
            }
            for (m, h) in mu.iter_mut().zip(&h_buf) {
                *m = (*m + rho * h).max(0.0);
            }
        } else {
            rho = (rho * opts.penalty_growth).min(opts.penalty_max);
        }
        prev_violation = violation;
    }

    best.iterations = total_iters;
    best
}

fn merit_value(cost: f64, g: &[f64], h: &[f64], lambda: &[f64], mu: &[f64], rho: f64) -> f64 {
    let mut merit = cost;
    for (gi, li) in g.iter().zip(lambda) {
        merit += li * gi + 0.5 * rho * gi * gi;
    }
    for (hi, mi) in h.iter().zip(mu) {
        let t = mi + rho * hi;
        if t > 0.0 {
            merit += (t * t - mi * mi) / (2.0 * rho);
        } else {
            merit -= mi * mi / (2.0 * rho);
        }
    }
    merit
}

/// L-BFGS with Armijo backtracking. Returns (iterations, final grad norm).
fn lbfgs_minimize(
    x: &mut Vec<f64>,
    max_iters: usize,
    gtol: f64,
    memory: usize,
    value: impl Fn(&[f64]) -> f64,
    mut gradient: impl FnMut(&[f64], &mut Vec<f64>),
) -> (usize, f64) {
    let n = x.len();
    if n == 0 {
        return (0, 0.0);
    }
    let mut grad = vec![0.0; n];
    gradient(x, &mut grad);
    let mut f = value(x);
    let mut grad_norm = inf_norm(&grad);
    if grad_norm <= gtol {
        return (0, grad_norm);
    }

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    let mut direction = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];
    let mut iters = 0;

    while iters < max_iters {
        // Two-loop recursion.
        direction.copy_from_slice(&grad);
        let k = s_hist.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            alpha[i] = rho_hist[i] * dot(&s_hist[i], &direction);
            axpy(-alpha[i], &y_hist[i], &mut direction);
        }
        if k > 0 {
            let last = k - 1;
            let gamma =
                dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]).max(1e-300);
            scale(gamma.max(1e-12), &mut direction);
        }
        for i in 0..k {
            let beta = rho_hist[i] * dot(&y_hist[i], &direction);
            axpy(alpha[i] - beta, &s_hist[i], &mut direction);
        }
        for d in direction.iter_mut() {
            *d = -*d;
        }

        let mut descent = dot(&grad, &direction);
        if !descent.is_finite() || descent >= 0.0 {
            for (d, g) in direction.iter_mut().zip(&grad) {
                *d = -g;
            }
            descent = -dot(&grad, &grad);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Armijo backtracking.
        let mut step = 1.0;
        let c1 = 1e-4;
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                x_new[i] = x[i] + step * direction[i];
            }
            let f_new = value(&x_new);
            if f_new.is_finite() && f_new <= f + c1 * step * descent {
                accepted = true;
                iters += 1;
                gradient(&x_new, &mut grad_new);

                let mut s = vec![0.0; n];
                let mut yv = vec![0.0; n];
                for i in 0..n {
                    s[i] = x_new[i] - x[i];
                    yv[i] = grad_new[i] - grad[i];
                }
                let sy = dot(&s, &yv);
                if sy > 1e-12 * norm2(&s) * norm2(&yv) {
                    if s_hist.len() == memory {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho_hist.remove(0);
                    }
                    rho_hist.push(1.0 / sy);
                    s_hist.push(s);
                    y_hist.push(yv);
                }

                x.copy_from_slice(&x_new);
                std::mem::swap(&mut grad, &mut grad_new);
                f = f_new;
                grad_norm = inf_norm(&grad);
                break;
            }
            step *= 0.5;
        }

        if !accepted || grad_norm <= gtol {
            break;
        }
    }
    (iters, grad_norm)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(alpha: f64, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}
