//! Sequential minimal optimization for the epsilon-SVR dual.
//!
//! The dual over `alpha_hat` and `alpha` is solved as one box-constrained
//! problem in `2n` variables `beta = [alpha_hat; alpha]` with labels
//! `y = [+1; -1]`:
//!
//! ```text
//! min  1/2 beta' Q beta + p' beta,   Q_ij = y_i y_j K(i mod n, j mod n)
//! s.t. y' beta = 0,  0 <= beta <= C
//! p = [eps - t; eps + t]
//! ```
//!
//! which is the negated maximization problem. Each step moves the maximal
//! violating pair.

use super::SvrError;

/// Stopping rule of the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    /// Largest acceptable KKT violation `m(beta) - M(beta)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 1_000_000,
        }
    }
}

/// Optimal multipliers and bias of one training problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub alpha_hat: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Maximal KKT violation at the returned point.
    pub violation: f64,
}

impl DualSolution {
    /// `alpha_hat - alpha` per sample.
    pub fn coefficients(&self) -> Vec<f64> {
        self.alpha_hat.iter().zip(&self.alpha).map(|(h, a)| h - a).collect()
    }
}

/// Value of the maximization form of the dual.
pub fn dual_objective(kernel: &[f64], targets: &[f64], alpha: &[f64], alpha_hat: &[f64], epsilon: f64) -> f64 {
    let n = targets.len();
    let beta: Vec<f64> = alpha_hat.iter().zip(alpha).map(|(h, a)| h - a).collect();
    let mut lin = 0.0;
    for g in 0..n {
        lin += targets[g] * beta[g] - epsilon * (alpha_hat[g] + alpha[g]);
    }
    let mut quad = 0.0;
    for g in 0..n {
        for q in 0..n {
            quad += beta[g] * beta[q] * kernel[g * n + q];
        }
    }
    lin - 0.5 * quad
}

struct Problem<'a> {
    n: usize,
    kernel: &'a [f64],
    c: f64,
}

impl Problem<'_> {
    fn y(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn q(&self, a: usize, b: usize) -> f64 {
        self.y(a) * self.y(b) * self.kernel[(a % self.n) * self.n + b % self.n]
    }

    fn in_up(&self, t: usize, beta: f64) -> bool {
        if t < self.n {
            beta < self.c
        } else {
            beta > 0.0
        }
    }

    fn in_low(&self, t: usize, beta: f64) -> bool {
        if t < self.n {
            beta > 0.0
        } else {
            beta < self.c
        }
    }

    /// `(i, m, j, M)` of the maximal violating pair.
    fn select(&self, beta: &[f64], grad: &[f64]) -> (usize, f64, usize, f64) {
        let (mut i, mut m) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut big_m) = (usize::MAX, f64::INFINITY);
        for t in 0..2 * self.n {
            let v = -self.y(t) * grad[t];
            if self.in_up(t, beta[t]) && v > m {
                m = v;
                i = t;
            }
            if self.in_low(t, beta[t]) && v < big_m {
                big_m = v;
                j = t;
            }
        }
        (i, m, j, big_m)
    }
}

/// Clips `(bi, bj)` to the box along the constraint line, following the
/// two-variable update of LIBSVM.
fn update_pair(c: f64, yi: f64, yj: f64, gi: f64, gj: f64, quad: f64, bi: &mut f64, bj: &mut f64) {
    let quad = if quad > 0.0 { quad } else { 1e-12 };
    if yi != yj {
        let delta = (-gi - gj) / quad;
        let diff = *bi - *bj;
        *bi += delta;
        *bj += delta;
        if diff > 0.0 {
            if *bj < 0.0 {
                *bj = 0.0;
                *bi = diff;
            }
        } else if *bi < 0.0 {
            *bi = 0.0;
            *bj = -diff;
        }
        if diff > 0.0 {
            if *bi > c {
                *bi = c;
                *bj = c - diff;
            }
        } else if *bj > c {
            *bj = c;
            *bi = c + diff;
        }
    } else {
        let delta = (gi - gj) / quad;
        let sum = *bi + *bj;
        *bi -= delta;
        *bj += delta;
        if sum > c {
            if *bi > c {
                *bi = c;
                *bj = sum - c;
            }
        } else if *bj < 0.0 {
            *bj = 0.0;
            *bi = sum;
        }
        if sum > c {
            if *bj > c {
                *bj = c;
                *bi = sum - c;
            }
        } else if *bi < 0.0 {
            *bi = 0.0;
            *bj = sum;
        }
    }
}

/// Solves the dual for a precomputed `n x n` kernel matrix.
///
/// On return at most one of `alpha[g]`, `alpha_hat[g]` is nonzero: any
/// common part of the pair is removed, which keeps `alpha_hat - alpha` and
/// can only raise the objective.
pub fn solve_dual(
    kernel: &[f64],
    targets: &[f64],
    c: f64,
    epsilon: f64,
    config: &SmoConfig,
) -> Result<DualSolution, SvrError> {
    let n = targets.len();
    if n == 0 {
        return Err(SvrError::Empty);
    }
    if kernel.len() != n * n {
        return Err(SvrError::InvalidParameter(format!(
            "kernel matrix has {} entries for {n} samples",
            kernel.len()
        )));
    }
    if !(c > 0.0 && c.is_finite()) || !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(SvrError::InvalidParameter(format!(
            "need C > 0 and epsilon >= 0 (got C={c}, epsilon={epsilon})"
        )));
    }
    let p = Problem { n, kernel, c };
    let mut beta = vec![0.0; 2 * n];
    let mut grad: Vec<f64> = (0..2 * n)
        .map(|t| if t < n { epsilon - targets[t] } else { epsilon + targets[t - n] })
        .collect();

    let mut iterations = 0;
    let mut violation;
    loop {
        let (i, m, j, big_m) = p.select(&beta, &grad);
        violation = if i == usize::MAX || j == usize::MAX { 0.0 } else { m - big_m };
        if violation < config.tolerance {
            break;
        }
        if iterations >= config.max_iterations {
            return Err(SvrError::NotConverged {
                violation,
                iterations,
            });
        }
        iterations += 1;

        let (yi, yj) = (p.y(i), p.y(j));
        let qij = p.q(i, j);
        let quad = if yi != yj {
            p.q(i, i) + p.q(j, j) + 2.0 * qij
        } else {
            p.q(i, i) + p.q(j, j) - 2.0 * qij
        };
        let (old_i, old_j) = (beta[i], beta[j]);
        let (mut bi, mut bj) = (old_i, old_j);
        update_pair(c, yi, yj, grad[i], grad[j], quad, &mut bi, &mut bj);
        beta[i] = bi;
        beta[j] = bj;
        let (di, dj) = (bi - old_i, bj - old_j);
        if di == 0.0 && dj == 0.0 {
            // no progress is possible along the selected pair
            break;
        }
        for t in 0..2 * n {
            grad[t] += p.q(t, i) * di + p.q(t, j) * dj;
        }
    }

    let bias = bias_from_gradient(&p, &beta, &grad);
    let mut alpha_hat = beta[..n].to_vec();
    let mut alpha = beta[n..].to_vec();
    for g in 0..n {
        let common = alpha_hat[g].min(alpha[g]);
        alpha_hat[g] -= common;
        alpha[g] -= common;
    }
    let mut canonical = alpha_hat.clone();
    canonical.extend_from_slice(&alpha);
    let (i, m, j, big_m) = p.select(&canonical, &grad_for(&p, &canonical, targets, epsilon));
    let violation = if i == usize::MAX || j == usize::MAX {
        0.0
    } else {
        (m - big_m).max(0.0)
    };
    Ok(DualSolution {
        alpha,
        alpha_hat,
        bias,
        iterations,
        violation,
    })
}

fn grad_for(p: &Problem, beta: &[f64], targets: &[f64], epsilon: f64) -> Vec<f64> {
    let n = p.n;
    (0..2 * n)
        .map(|t| {
            let lin = if t < n { epsilon - targets[t] } else { epsilon + targets[t - n] };
            lin + (0..2 * n).map(|u| p.q(t, u) * beta[u]).sum::<f64>()
        })
        .collect()
}

/// `b = -mean(y_t G_t)` over free variables, or the midpoint of the
/// feasible interval when every variable sits at a bound.
fn bias_from_gradient(p: &Problem, beta: &[f64], grad: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..2 * p.n {
        let yg = p.y(t) * grad[t];
        if beta[t] >= p.c {
            if p.y(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if beta[t] <= 0.0 {
            if p.y(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let r = if free > 0 { sum / free as f64 } else { 0.5 * (ub + lb) };
    -r
}
