//! Log-barrier interior-point solver for
//!
//! ```text
//! minimize   sum_i 1 / x_i
//! subject to sum_{i in row_j} x_i <= b_j   for every row j,   x > 0
//! ```
//!
//! Newton centering with backtracking line search; the barrier weight grows
//! by 10 per outer iteration until `(rows + vars) / tau <= tol * f(x)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub(crate) struct Program {
    pub vars: usize,
    /// Variable indices appearing in each constraint row.
    pub rows: Vec<Vec<usize>>,
    pub rhs: Vec<f64>,
}

const MU: f64 = 10.0;
const ALPHA: f64 = 0.25;
const BETA: f64 = 0.5;
const MAX_OUTER: usize = 200;
const MAX_NEWTON: usize = 200;

impl Program {
    fn slacks(&self, x: &[f64], out: &mut [f64]) -> bool {
        for ((s, row), &b) in out.iter_mut().zip(&self.rows).zip(&self.rhs) {
            *s = b - row.iter().map(|&i| x[i]).sum::<f64>();
            if s.is_nan() || *s <= 0.0 {
                return false;
            }
        }
        x.iter().all(|&v| v > 0.0)
    }

    fn barrier(&self, tau: f64, x: &[f64], slack: &mut [f64]) -> f64 {
        if !self.slacks(x, slack) {
            return f64::INFINITY;
        }
        let obj: f64 = x.iter().map(|&v| 1.0 / v).sum();
        tau * obj - slack.iter().map(|&s| libm::log(s)).sum::<f64>()
            - x.iter().map(|&v| libm::log(v)).sum::<f64>()
    }

    /// Minimizes from the strictly feasible point `x0`.
    pub fn solve(&self, x0: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
        let n = self.vars;
        let mut x = x0;
        let mut slack = vec![0.0; self.rows.len()];
        if !self.slacks(&x, &mut slack) {
            return Err(Error::Solver("starting point is not strictly feasible".into()));
        }
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        let mut dx = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut tmp_slack = vec![0.0; self.rows.len()];
        let constraints = (self.rows.len() + n) as f64;
        let mut tau = 1.0;

        for _ in 0..MAX_OUTER {
            // centering
            for _ in 0..MAX_NEWTON {
                self.slacks(&x, &mut slack);
                hess.iter_mut().for_each(|h| *h = 0.0);
                for i in 0..n {
                    let xi = x[i];
                    grad[i] = -tau / (xi * xi) - 1.0 / xi;
                    hess[i * n + i] = 2.0 * tau / (xi * xi * xi) + 1.0 / (xi * xi);
                }
                for (row, &s) in self.rows.iter().zip(&slack) {
                    let inv = 1.0 / s;
                    let inv2 = inv * inv;
                    for &i in row {
                        grad[i] += inv;
                        for &k in row {
                            hess[i * n + k] += inv2;
                        }
                    }
                }
                for (d, g) in dx.iter_mut().zip(&grad) {
                    *d = -g;
                }
                cholesky_solve(&mut hess, n, &mut dx)?;
                let decrement: f64 = -grad.iter().zip(&dx).map(|(g, d)| g * d).sum::<f64>();
                if decrement / 2.0 <= 1e-12 {
                    break;
                }
                let f0 = self.barrier(tau, &x, &mut tmp_slack);
                let mut step = 1.0;
                loop {
                    for ((t, &xi), &d) in trial.iter_mut().zip(&x).zip(&dx) {
                        *t = xi + step * d;
                    }
                    let f1 = self.barrier(tau, &trial, &mut tmp_slack);
                    if f1 <= f0 - ALPHA * step * decrement {
                        break;
                    }
                    step *= BETA;
                    if step < 1e-20 {
                        break;
                    }
                }
                if step < 1e-20 {
                    // no progress possible at this precision
                    break;
                }
                x.copy_from_slice(&trial);
            }
            let obj: f64 = x.iter().map(|&v| 1.0 / v).sum();
            if constraints / tau <= tol * obj {
                return Ok(x);
            }
            tau *= MU;
        }
        Err(Error::Solver(format!("no convergence after {MAX_OUTER} barrier updates")))
    }
}

/// Solves `A y = b` in place for symmetric positive definite `A` (row-major, destroyed).
fn cholesky_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return Err(Error::Solver("Hessian is not positive definite".into()));
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / d;
        }
    }
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * n + k] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= a[k * n + i] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    Ok(())
}
