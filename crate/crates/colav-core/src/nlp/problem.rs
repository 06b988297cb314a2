//! Problem container: cost terms, equality/inequality blocks, bounds.

use std::rc::Rc;

/// Scalar cost callback.
pub type CostFn = Rc<dyn Fn(&[f64]) -> f64>;
/// Gradient callback; accumulates (+=) into the full-dimension buffer.
pub type CostGradFn = Rc<dyn Fn(&[f64], &mut [f64])>;
/// Vector constraint callback writing its rows into `out`.
pub type BlockFn = Rc<dyn Fn(&[f64], &mut [f64])>;
/// Dense Jacobian callback; writes into a zeroed row-major buffer of
/// `rows x dim` entries.
pub type BlockJacFn = Rc<dyn Fn(&[f64], &mut [f64])>;

pub struct CostTerm {
    pub name: String,
    pub eval: CostFn,
    pub grad: Option<CostGradFn>,
}

pub struct ConstraintBlock {
    pub name: String,
    pub rows: usize,
    pub eval: BlockFn,
    pub jac: Option<BlockJacFn>,
}

/// A smooth NLP: minimize the sum of cost terms subject to g(w) = 0,
/// h(w) <= 0 and variable bounds.
pub struct NlpProblem {
    pub dim: usize,
    pub cost_terms: Vec<CostTerm>,
    pub eq_blocks: Vec<ConstraintBlock>,
    pub ineq_blocks: Vec<ConstraintBlock>,
    /// Per-variable (lower, upper); infinite when unbounded.
    pub bounds: Vec<(f64, f64)>,
}

impl NlpProblem {
    pub fn cost(&self, w: &[f64]) -> f64 {
        self.cost_terms.iter().map(|t| (t.eval)(w)).sum()
    }

    pub fn eq_rows(&self) -> usize {
        self.eq_blocks.iter().map(|b| b.rows).sum()
    }

    pub fn ineq_rows(&self) -> usize {
        self.ineq_blocks.iter().map(|b| b.rows).sum()
    }

    pub fn eval_eq(&self, w: &[f64], out: &mut [f64]) {
        eval_blocks(&self.eq_blocks, w, out);
    }

    pub fn eval_ineq(&self, w: &[f64], out: &mut [f64]) {
        eval_blocks(&self.ineq_blocks, w, out);
    }
}

fn eval_blocks(blocks: &[ConstraintBlock], w: &[f64], out: &mut [f64]) {
    let mut offset = 0;
    for block in blocks {
        (block.eval)(w, &mut out[offset..offset + block.rows]);
        offset += block.rows;
    }
}

/// Incremental problem builder. Variable indices are stable: the caller
/// records offsets returned by [`NlpBuilder::add_vars`].
pub struct NlpBuilder {
    dim: usize,
    cost_terms: Vec<CostTerm>,
    eq_blocks: Vec<ConstraintBlock>,
    ineq_blocks: Vec<ConstraintBlock>,
    bounds: Vec<(f64, f64)>,
}

impl Default for NlpBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NlpBuilder {
    pub fn new() -> Self {
        Self {
            dim: 0,
            cost_terms: Vec::new(),
            eq_blocks: Vec::new(),
            ineq_blocks: Vec::new(),
            bounds: Vec::new(),
        }
    }

    /// Appends `n` decision variables, returning the offset of the first.
    pub fn add_vars(&mut self, n: usize) -> usize {
        let offset = self.dim;
        self.dim += n;
        self.bounds.resize(self.dim, (f64::NEG_INFINITY, f64::INFINITY));
        offset
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set_bounds(&mut self, index: usize, lower: f64, upper: f64) {
        self.bounds[index] = (lower, upper);
    }

    pub fn add_cost(&mut self, name: &str, eval: CostFn, grad: Option<CostGradFn>) {
        self.cost_terms.push(CostTerm { name: name.to_string(), eval, grad });
    }

    pub fn add_eq_block(&mut self, name: &str, rows: usize, eval: BlockFn, jac: Option<BlockJacFn>) {
        self.eq_blocks.push(ConstraintBlock { name: name.to_string(), rows, eval, jac });
    }

    pub fn add_ineq_block(&mut self, name: &str, rows: usize, eval: BlockFn, jac: Option<BlockJacFn>) {
        self.ineq_blocks.push(ConstraintBlock { name: name.to_string(), rows, eval, jac });
    }

    pub fn build(self) -> NlpProblem {
        NlpProblem {
            dim: self.dim,
            cost_terms: self.cost_terms,
            eq_blocks: self.eq_blocks,
            ineq_blocks: self.ineq_blocks,
            bounds: self.bounds,
        }
    }
}

/// Central-difference step for variable value `x`.
pub(crate) fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub(crate) fn numeric_gradient(f: impl Fn(&[f64]) -> f64, w: &[f64], out: &mut [f64]) {
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        let e = fd_step(w[i]);
        probe[i] = w[i] + e;
        let hi = f(&probe);
        probe[i] = w[i] - e;
        let lo = f(&probe);
        probe[i] = w[i];
        out[i] = (hi - lo) / (2.0 * e);
    }
}

/// Central-difference Jacobian (row-major `rows x dim`) of a block.
pub(crate) fn numeric_jacobian(
    eval: &BlockFn,
    rows: usize,
    w: &[f64],
    jac: &mut [f64],
    hi_buf: &mut [f64],
    lo_buf: &mut [f64],
) {
    let dim = w.len();
    let mut probe = w.to_vec();
    for j in 0..dim {
        let e = fd_step(w[j]);
        probe[j] = w[j] + e;
        (eval)(&probe, hi_buf);
        probe[j] = w[j] - e;
        (eval)(&probe, lo_buf);
        probe[j] = w[j];
        for r in 0..rows {
            jac[r * dim + j] = (hi_buf[r] - lo_buf[r]) / (2.0 * e);
        }
    }
}

/// Result of comparing one analytic derivative against central differences.
#[derive(Debug, Clone)]
pub struct GradientCheck {
    pub name: String,
    pub max_relative_error: f64,
}

/// Checks every analytic cost gradient and constraint Jacobian in the
/// problem against central finite differences at the given points, and
/// returns the worst relative error per named term.
pub fn check_gradients(problem: &NlpProblem, points: &[Vec<f64>]) -> Vec<GradientCheck> {
    let dim = problem.dim;
    let mut results = Vec::new();

    for term in &problem.cost_terms {
        let Some(grad) = &term.grad else { continue };
        let mut worst: f64 = 0.0;
        let mut analytic = vec![0.0; dim];
        let mut numeric = vec![0.0; dim];
        for point in points {
            assert_eq!(point.len(), dim);
            analytic.fill(0.0);
            (grad)(point, &mut analytic);
            numeric_gradient(|w| (term.eval)(w), point, &mut numeric);
            for i in 0..dim {
                let denom = numeric[i].abs().max(1.0);
                worst = worst.max((analytic[i] - numeric[i]).abs() / denom);
            }
        }
        results.push(GradientCheck { name: term.name.clone(), max_relative_error: worst });
    }

    for block in problem.eq_blocks.iter().chain(problem.ineq_blocks.iter()) {
        let Some(jac) = &block.jac else { continue };
        let rows = block.rows;
        let mut analytic = vec![0.0; rows * dim];
        let mut numeric = vec![0.0; rows * dim];
        let mut hi = vec![0.0; rows];
        let mut lo = vec![0.0; rows];
        let mut worst: f64 = 0.0;
        for point in points {
            analytic.fill(0.0);
            (jac)(point, &mut analytic);
            numeric_jacobian(&block.eval, rows, point, &mut numeric, &mut hi, &mut lo);
            for i in 0..rows * dim {
                let denom = numeric[i].abs().max(1.0);
                worst = worst.max((analytic[i] - numeric[i]).abs() / denom);
            }
        }
        results.push(GradientCheck { name: block.name.clone(), max_relative_error: worst });
    }

    results
}
