//! Damped Newton minimization with domain-aware Armijo backtracking.

use crate::cone::{Matrix, RealVector};
use crate::linalg;

/// Value, gradient and Hessian at a point of the domain.
pub(crate) struct Eval {
    pub value: f64,
    pub grad: RealVector,
    pub hess: Matrix,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOptions {
    pub max_iter: usize,
    /// Stop once ‖∇f‖∞ is at or below this...
    pub grad_tol: f64,
    /// ...and the Newton decrement is at or below this.
    pub decrement_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    /// Report divergence once ‖x‖ exceeds this.
    pub divergence_radius: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 200,
            grad_tol: 1e-10,
            decrement_tol: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            divergence_radius: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NewtonStatus {
    Converged,
    Diverged,
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: RealVector,
    pub iterations: usize,
    pub grad_inf: f64,
    pub status: NewtonStatus,
}

/// Below this squared decrement the full step is taken without the Armijo
/// test, whose value comparison is dominated by rounding there.
const QUADRATIC_REGION: f64 = 1e-12;

/// Minimizes `f` from `x0`; `f` returns `None` outside its domain.
pub(crate) fn minimize<F>(f: F, x0: RealVector, opts: &NewtonOptions) -> NewtonOutcome
where
    F: Fn(&RealVector) -> Option<Eval>,
{
    let mut x = x0;
    let mut cur = f(&x).expect("Newton start must lie in the domain");
    for it in 0..opts.max_iter {
        let grad_inf = cur.grad.amax();
        if x.norm() > opts.divergence_radius {
            return NewtonOutcome { x, iterations: it, grad_inf, status: NewtonStatus::Diverged };
        }
        let Some(step) = linalg::solve_spd(&cur.hess, &(-&cur.grad)) else {
            return NewtonOutcome { x, iterations: it, grad_inf, status: NewtonStatus::Stalled };
        };
        let slope = cur.grad.dot(&step);
        let dec2 = -slope;
        if grad_inf <= opts.grad_tol && dec2.max(0.0).sqrt() <= opts.decrement_tol {
            return NewtonOutcome { x, iterations: it, grad_inf, status: NewtonStatus::Converged };
        }
        let mut alpha = 1.0;
        let accepted = loop {
            let cand = &x + &step * alpha;
            if let Some(e) = f(&cand) {
                if dec2 < QUADRATIC_REGION || e.value <= cur.value + opts.armijo * alpha * slope {
                    break Some((cand, e));
                }
            }
            alpha *= opts.backtrack;
            if alpha < 1e-16 {
                break None;
            }
        };
        match accepted {
            Some((cand, e)) => {
                x = cand;
                cur = e;
            }
            None => {
                let status = if grad_inf <= opts.grad_tol { NewtonStatus::Converged } else { NewtonStatus::Stalled };
                return NewtonOutcome { x, iterations: it, grad_inf, status };
            }
        }
    }
    let grad_inf = cur.grad.amax();
    let status = if grad_inf <= opts.grad_tol { NewtonStatus::Converged } else { NewtonStatus::MaxIterations };
    NewtonOutcome { x, iterations: opts.max_iter, grad_inf, status }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_one_dimensional_barrier() {
        // -log(4 - s²) has its minimum at s = 0.
        let f = |x: &RealVector| {
            let s = x[0];
            let q = 4.0 - s * s;
            (q > 0.0).then(|| Eval {
                value: -q.ln(),
                grad: RealVector::from_element(1, 2.0 * s / q),
                hess: Matrix::from_element(1, 1, (2.0 * q + 4.0 * s * s) / (q * q)),
            })
        };
        let out = minimize(f, RealVector::from_element(1, 1.9), &NewtonOptions::default());
        assert_eq!(out.status, NewtonStatus::Converged);
        assert!(out.x[0].abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded_direction() {
        // -log(1 + 2t) decreases without bound.
        let f = |x: &RealVector| {
            let q = 1.0 + 2.0 * x[0];
            (q > 0.0).then(|| Eval {
                value: -q.ln(),
                grad: RealVector::from_element(1, -2.0 / q),
                hess: Matrix::from_element(1, 1, 4.0 / (q * q)),
            })
        };
        let opts = NewtonOptions { divergence_radius: 1e10, ..Default::default() };
        let out = minimize(f, RealVector::zeros(1), &opts);
        assert_eq!(out.status, NewtonStatus::Diverged);
    }
}
