#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rul_core::svr::{median_distance, rbf_kernel, SvrTrainingSet, WindowFeature};

/// One small regression problem with fixed hyperparameters.
pub struct QpInstance {
    pub name: String,
    pub set: SvrTrainingSet,
    pub c: f64,
    pub epsilon: f64,
    pub sigma: f64,
}

fn instance(name: String, features: Vec<WindowFeature>, targets: Vec<f64>, c: f64, epsilon: f64) -> QpInstance {
    let sigma = median_distance(&features);
    QpInstance {
        name,
        set: SvrTrainingSet {
            features,
            targets,
            window: 2,
            slide: 1,
        },
        c,
        epsilon,
        sigma,
    }
}

/// Seeded random instances of 1..=8 points over a grid of C and epsilon,
/// plus a few structured cases.
pub fn qp_fixtures() -> Vec<QpInstance> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=8usize {
        for &(c, eps) in &[(0.1, 0.0), (1.0, 0.01), (5.09, 0.01), (100.0, 0.1), (5.09, 0.3)] {
            let features: Vec<WindowFeature> = (0..n)
                .map(|_| WindowFeature {
                    mean: rng.random_range(0.0..1.0),
                    variance: rng.random_range(0.0..0.05),
                })
                .collect();
            let targets: Vec<f64> = features
                .iter()
                .map(|f| f.mean + 0.1 + rng.random_range(-0.2..0.2))
                .collect();
            out.push(instance(format!("random n={n} C={c} eps={eps}"), features, targets, c, eps));
        }
    }
    let ramp: Vec<WindowFeature> = (0..8)
        .map(|i| WindowFeature {
            mean: 0.1 * i as f64,
            variance: 0.001 * i as f64,
        })
        .collect();
    out.push(instance(
        "ramp".into(),
        ramp.clone(),
        (0..8).map(|i| 0.1 * (i + 1) as f64).collect(),
        5.09,
        0.01,
    ));
    out.push(instance("constant".into(), ramp.clone(), vec![0.5; 8], 5.09, 0.01));
    let mut dup = ramp[..4].to_vec();
    dup.extend_from_slice(&ramp[..4]);
    out.push(instance(
        "duplicates".into(),
        dup,
        vec![0.1, 0.3, 0.2, 0.6, 0.15, 0.25, 0.3, 0.5],
        1.0,
        0.02,
    ));
    out
}

/// Reference solution of the dual: multipliers, bias and objective.
pub struct OracleSolution {
    pub alpha: Vec<f64>,
    pub alpha_hat: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

fn dense_kernel(f: &[WindowFeature], sigma: f64) -> Vec<Vec<f64>> {
    f.iter()
        .map(|a| f.iter().map(|b| rbf_kernel(a, b, sigma)).collect())
        .collect()
}

/// `sum t (ah - a) - eps sum (ah + a) - 1/2 (ah - a)' K (ah - a)`.
pub fn objective(k: &[Vec<f64>], t: &[f64], a: &[f64], ah: &[f64], eps: f64) -> f64 {
    let n = t.len();
    let mut v = 0.0;
    for g in 0..n {
        v += t[g] * (ah[g] - a[g]) - eps * (ah[g] + a[g]);
        for q in 0..n {
            v -= 0.5 * (ah[g] - a[g]) * (ah[q] - a[q]) * k[g][q];
        }
    }
    v
}

/// Maximizes the dual by cyclic exact line searches over every pair of
/// variables along the direction that keeps `sum (ah - a)` fixed, until a
/// full sweep gains less than 1e-15.
pub fn brute_force_dual(inst: &QpInstance) -> OracleSolution {
    let n = inst.set.len();
    let t = &inst.set.targets;
    let k = dense_kernel(&inst.set.features, inst.sigma);
    let (c, eps) = (inst.c, inst.epsilon);
    // x[0..n] = alpha_hat (sign +1), x[n..2n] = alpha (sign -1)
    let sign = |u: usize| if u < n { 1.0 } else { -1.0 };
    let mut x = vec![0.0; 2 * n];
    let split = |x: &[f64]| (x[n..].to_vec(), x[..n].to_vec());
    for _sweep in 0..200_000 {
        let (a0, h0) = split(&x);
        let before = objective(&k, t, &a0, &h0, eps);
        for u in 0..2 * n {
            for v in (u + 1)..2 * n {
                // direction keeps sign(u) du + sign(v) dv = 0
                let du = 1.0;
                let dv = -sign(u) * sign(v);
                let beta: Vec<f64> = (0..n).map(|g| x[g] - x[g + n]).collect();
                // d beta_g along the direction
                let mut db = vec![0.0; n];
                db[u % n] += sign(u) * du;
                db[v % n] += sign(v) * dv;
                let mut slope = -eps * (du + dv);
                let mut curv = 0.0;
                for g in 0..n {
                    let kb: f64 = (0..n).map(|q| k[g][q] * beta[q]).sum();
                    let kd: f64 = (0..n).map(|q| k[g][q] * db[q]).sum();
                    slope += t[g] * db[g] - db[g] * kb;
                    curv += db[g] * kd;
                }
                let (lo_u, hi_u) = (-x[u], c - x[u]);
                let (lo_v, hi_v) = if dv > 0.0 { (-x[v], c - x[v]) } else { (x[v] - c, x[v]) };
                let lo = lo_u.max(lo_v);
                let hi = hi_u.min(hi_v);
                if hi <= lo {
                    continue;
                }
                let step = if curv > 1e-14 {
                    (slope / curv).clamp(lo, hi)
                } else if slope > 0.0 {
                    hi
                } else if slope < 0.0 {
                    lo
                } else {
                    0.0
                };
                x[u] = (x[u] + step * du).clamp(0.0, c);
                x[v] = (x[v] + step * dv).clamp(0.0, c);
            }
        }
        let (a1, h1) = split(&x);
        if objective(&k, t, &a1, &h1, eps) - before < 1e-15 {
            break;
        }
    }
    let (alpha, alpha_hat) = split(&x);
    let objective = objective(&k, t, &alpha, &alpha_hat, eps);

    // b from every multiplier strictly inside its box
    let beta: Vec<f64> = (0..n).map(|g| alpha_hat[g] - alpha[g]).collect();
    let fx: Vec<f64> = (0..n)
        .map(|g| (0..n).map(|q| beta[q] * k[g][q]).sum::<f64>())
        .collect();
    let tol = 1e-9 * c.max(1.0);
    let mut vals = Vec::new();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for g in 0..n {
        let r = t[g] - fx[g];
        let free_h = alpha_hat[g] > tol && alpha_hat[g] < c - tol;
        let free_a = alpha[g] > tol && alpha[g] < c - tol;
        if free_h {
            vals.push(r - eps);
        }
        if free_a {
            vals.push(r + eps);
        }
        // bounds on b from the tube conditions of bound multipliers
        if alpha_hat[g] <= tol {
            lo = lo.max(r - eps);
        }
        if alpha_hat[g] >= c - tol {
            hi = hi.min(r - eps);
        }
        if alpha[g] <= tol {
            hi = hi.min(r + eps);
        }
        if alpha[g] >= c - tol {
            lo = lo.max(r + eps);
        }
    }
    let bias = if !vals.is_empty() {
        vals.iter().sum::<f64>() / vals.len() as f64
    } else if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else {
        hi
    };
    OracleSolution {
        alpha,
        alpha_hat,
        bias,
        objective,
    }
}

/// Oracle prediction `sum (ah - a) K(x, x_g) + b`.
pub fn oracle_predict(inst: &QpInstance, sol: &OracleSolution, x: &WindowFeature) -> f64 {
    inst.set
        .features
        .iter()
        .enumerate()
        .map(|(g, f)| (sol.alpha_hat[g] - sol.alpha[g]) * rbf_kernel(x, f, inst.sigma))
        .sum::<f64>()
        + sol.bias
}

/// Largest violation of the tube conditions implied by the multipliers:
/// zero multipliers need the residual inside the tube on their side, free
/// ones on the tube edge, bound ones outside it.
pub fn tube_kkt_violation(
    targets: &[f64],
    predictions: &[f64],
    alpha: &[f64],
    alpha_hat: &[f64],
    c: f64,
    eps: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for g in 0..targets.len() {
        let r = targets[g] - predictions[g];
        let (h, a) = (alpha_hat[g], alpha[g]);
        let vh = if h <= 0.0 {
            (r - eps).max(0.0)
        } else if h >= c {
            (eps - r).max(0.0)
        } else {
            (r - eps).abs()
        };
        let va = if a <= 0.0 {
            (-r - eps).max(0.0)
        } else if a >= c {
            (r + eps).max(0.0)
        } else {
            (r + eps).abs()
        };
        worst = worst.max(vh).max(va);
    }
    worst
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
