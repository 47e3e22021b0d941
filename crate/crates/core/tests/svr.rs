mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rul_core::svr::*;

fn params_for(inst: &QpInstance) -> SvrParams {
    SvrParams {
        c: inst.c,
        epsilon: inst.epsilon,
        width: KernelWidth::Fixed(inst.sigma),
        smo: SmoConfig::default(),
    }
}

#[test]
fn jacobi_recovers_known_spectrum() {
    let m = vec![
        vec![2.0, 1.0, 0.0],
        vec![1.0, 2.0, 1.0],
        vec![0.0, 1.0, 2.0],
    ];
    let mut ev = symmetric_eigenvalues(&m);
    ev.sort_by(f64::total_cmp);
    let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
    for (a, b) in ev.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn kernel_matrix_is_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f: Vec<WindowFeature> = (0..5)
            .map(|_| WindowFeature {
                mean: rng.random_range(-1.0..1.0),
                variance: rng.random_range(0.0..0.5),
            })
            .collect();
        let sigma = rng.random_range(0.05..2.0);
        let flat = kernel_matrix(&f, sigma);
        let m: Vec<Vec<f64>> = flat.chunks(5).map(|r| r.to_vec()).collect();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert!(symmetric_eigenvalues(&m).iter().all(|&e| e >= -1e-10));
    }
}

#[test]
fn six_point_problem_matches_brute_force() {
    let features: Vec<WindowFeature> = [0.05, 0.2, 0.3, 0.55, 0.7, 0.9]
        .iter()
        .enumerate()
        .map(|(i, &m)| WindowFeature {
            mean: m,
            variance: 0.002 * i as f64,
        })
        .collect();
    let targets = vec![0.1, 0.22, 0.41, 0.5, 0.8, 0.95];
    let inst = QpInstance {
        name: "six".into(),
        sigma: 0.3,
        c: 5.09,
        epsilon: 0.01,
        set: SvrTrainingSet {
            features,
            targets,
            window: 2,
            slide: 1,
        },
    };
    let oracle = brute_force_dual(&inst);
    let fit = train_svr(&inst.set, &params_for(&inst)).unwrap();
    let k = kernel_matrix(&inst.set.features, inst.sigma);
    let obj = dual_objective(&k, &inst.set.targets, &fit.dual.alpha, &fit.dual.alpha_hat, inst.epsilon);
    assert!((obj - oracle.objective).abs() < 1e-6, "{obj} vs {}", oracle.objective);
    for x in inst.set.features.iter().chain([&WindowFeature { mean: 0.4, variance: 0.01 }]) {
        let d = (fit.model.predict(x) - oracle_predict(&inst, &oracle, x)).abs();
        assert!(d < 1e-3, "prediction gap {d}");
    }
}

#[test]
fn fixture_set_agrees_with_oracle() {
    for inst in qp_fixtures() {
        let oracle = brute_force_dual(&inst);
        let fit = train_svr(&inst.set, &params_for(&inst)).unwrap();
        let k = kernel_matrix(&inst.set.features, inst.sigma);
        let d = &fit.dual;
        let obj = dual_objective(&k, &inst.set.targets, &d.alpha, &d.alpha_hat, inst.epsilon);
        assert!(obj >= oracle.objective - 1e-6, "{}: {obj} < {}", inst.name, oracle.objective);
        assert!((obj - oracle.objective).abs() < 1e-6, "{}", inst.name);
        let preds: Vec<f64> = inst.set.features.iter().map(|x| fit.model.predict(x)).collect();
        for (x, p) in inst.set.features.iter().zip(&preds) {
            assert!((p - oracle_predict(&inst, &oracle, x)).abs() < 1e-3, "{}", inst.name);
        }
        let v = tube_kkt_violation(&inst.set.targets, &preds, &d.alpha, &d.alpha_hat, inst.c, inst.epsilon);
        assert!(v < 1e-6, "{}: tube violation {v}", inst.name);
        assert!(d.violation < 1e-6);
        let sum: f64 = d.coefficients().iter().sum();
        assert!(sum.abs() < 1e-8);
        for g in 0..inst.set.len() {
            assert!(d.alpha[g] >= 0.0 && d.alpha[g] <= inst.c);
            assert!(d.alpha_hat[g] >= 0.0 && d.alpha_hat[g] <= inst.c);
            assert!(d.alpha[g] * d.alpha_hat[g] < 1e-12);
        }
    }
}

#[test]
fn predict_matches_direct_expansion() {
    let v: Vec<f64> = (0..60).map(|i| 0.05 + 0.012 * i as f64 + 0.03 * (0.9 * i as f64).sin()).collect();
    let set = window_features(&v, 6, 1).unwrap();
    let fit = train_svr(&set, &SvrParams::default()).unwrap();
    let coef = fit.dual.coefficients();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x = WindowFeature {
            mean: rng.random_range(0.0..1.0),
            variance: rng.random_range(0.0..0.01),
        };
        let mut direct = fit.dual.bias;
        for (f, b) in set.features.iter().zip(&coef) {
            let d2 = (x.mean - f.mean).powi(2) + (x.variance - f.variance).powi(2);
            direct += b * (-d2 / (2.0 * fit.model.sigma * fit.model.sigma)).exp();
        }
        assert!((fit.model.predict(&x) - direct).abs() < 1e-12);
    }
}

#[test]
fn realistic_series_converges() {
    // 400-point noisy exponential rise on the normalized scale
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..400)
        .map(|i| 0.02 + 0.95 * ((i as f64 / 399.0) * 4.0).exp_m1() / 4f64.exp_m1() + rng.random_range(-0.03..0.03))
        .collect();
    let set = window_features(&v, 50, 1).unwrap();
    let fit = train_svr(&set, &SvrParams::default()).unwrap();
    assert!(fit.dual.violation < 1e-6);
    let text = write_svr(&fit.model);
    assert_eq!(read_svr(&text).unwrap(), fit.model);
}

fn trained() -> SvrModel {
    let v: Vec<f64> = (0..120).map(|i| 0.1 + 0.006 * i as f64 + 0.02 * (0.7 * i as f64).cos()).collect();
    train_svr(&window_features(&v, 10, 1).unwrap(), &SvrParams::default()).unwrap().model
}

#[test]
fn forecast_depends_only_on_last_window() {
    let m = trained();
    let tail: Vec<f64> = (0..10).map(|i| 0.5 + 0.01 * i as f64).collect();
    let mut a = vec![0.9, 0.1, 0.3];
    a.extend_from_slice(&tail);
    let mut b = vec![0.2; 40];
    b.extend_from_slice(&tail);
    let fa = forecast_until(&m, &a, 0.95, 500).unwrap();
    let fb = forecast_until(&m, &b, 0.95, 500).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn crossing_brackets_threshold() {
    let m = trained();
    let hist: Vec<f64> = (0..10).map(|i| 0.3 + 0.01 * i as f64).collect();
    let f = forecast_until(&m, &hist, 0.7, 100_000).unwrap();
    assert!(f.crossed, "no crossing within {} steps", f.steps);
    let u = f.steps;
    assert!(f.predicted[u - 1] >= 0.7);
    if u > 1 {
        assert!(f.predicted[u - 2] < 0.7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predict_is_lipschitz(m in 0.0f64..1.0, v in 0.0f64..0.02, dm in -1e-3f64..1e-3, dv in -1e-4f64..1e-4) {
        let model = trained();
        let x = WindowFeature { mean: m, variance: v };
        let y = WindowFeature { mean: m + dm, variance: v + dv };
        let bound = model.coefficients.iter().map(|b| b.abs()).sum::<f64>()
            * (dm * dm + dv * dv).sqrt() / model.sigma * (-0.5f64).exp() + 1e-9;
        prop_assert!((model.predict(&x) - model.predict(&y)).abs() <= bound);
    }
}
