//! Failure threshold, step-to-time conversion and accuracy scores.

use super::PrognosticsError;
use crate::hht::DeiSeries;

/// Last value of the training bearing's estimated DEI.
pub fn failure_threshold(trained: &DeiSeries) -> Result<f64, PrognosticsError> {
    trained.last().ok_or(PrognosticsError::EmptySeries)
}

/// `U * tau` seconds.
pub fn rul_from_steps(steps: usize, interval: f64) -> Result<f64, PrognosticsError> {
    if steps == 0 {
        return Err(PrognosticsError::InvalidSteps);
    }
    if !(interval > 0.0 && interval.is_finite()) {
        return Err(PrognosticsError::InvalidInterval(interval));
    }
    Ok(steps as f64 * interval)
}

/// `100 (T - T_hat) / T`; negative when the prediction overestimates.
pub fn relative_error(true_rul: f64, predicted_rul: f64) -> Result<f64, PrognosticsError> {
    if !(true_rul > 0.0 && true_rul.is_finite()) {
        return Err(PrognosticsError::NonPositiveTrueRul(true_rul));
    }
    Ok(100.0 * (true_rul - predicted_rul) / true_rul)
}

/// Exponential accuracy score; halves at `Er = -5` and at `Er = +20`.
pub fn eta(er: f64) -> f64 {
    let ln_half = 0.5f64.ln();
    if er <= 0.0 {
        (-ln_half * er / 5.0).exp()
    } else {
        (ln_half * er / 20.0).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round2(v: f64) -> f64 {
        (v * 100.0).round() / 100.0
    }

    #[test]
    fn threshold_is_last_value() {
        let s = DeiSeries {
            normalized: true,
            ..DeiSeries::raw(vec![0.2, 0.5, 0.9756], 10.0)
        };
        assert_eq!(failure_threshold(&s).unwrap(), 0.9756);
        assert_eq!(failure_threshold(&DeiSeries::raw(vec![0.1], 10.0)).unwrap(), 0.1);
        assert!(matches!(
            failure_threshold(&DeiSeries::raw(vec![], 10.0)),
            Err(PrognosticsError::EmptySeries)
        ));
    }

    #[test]
    fn steps_to_seconds() {
        assert_eq!(rul_from_steps(34, 10.0).unwrap(), 340.0);
        assert_eq!(rul_from_steps(1, 10.0).unwrap(), 10.0);
        assert_eq!(rul_from_steps(150, 10.0).unwrap(), 1500.0);
        assert!(rul_from_steps(0, 10.0).is_err());
        assert!(rul_from_steps(3, 0.0).is_err());
    }

    #[test]
    fn reported_rows() {
        let er = relative_error(339.0, 340.0).unwrap();
        assert_eq!(round2(er), -0.29);
        assert_eq!(round2(eta(er)), 0.96);
        let er = relative_error(1610.0, 1500.0).unwrap();
        assert_eq!(round2(er), 6.83);
        assert_eq!(round2(eta(er)), 0.79);
        let er = relative_error(1460.0, 1480.0).unwrap();
        assert_eq!(round2(er), -1.37);
        assert_eq!(round2(eta(er)), 0.83);
        assert_eq!(relative_error(500.0, 500.0).unwrap(), 0.0);
        assert!(relative_error(0.0, 10.0).is_err());
    }

    #[test]
    fn eta_half_points() {
        assert_eq!(eta(0.0), 1.0);
        assert!((eta(-5.0) - 0.5).abs() < 1e-15);
        assert!((eta(20.0) - 0.5).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn eta_decreases_with_magnitude(a in 0.0f64..200.0, b in 0.0f64..200.0) {
                prop_assume!(a < b);
                prop_assert!(eta(a) > eta(b));
                prop_assert!(eta(-a) > eta(-b));
                prop_assert!(eta(a) <= 1.0 && eta(-b) > 0.0);
            }

            #[test]
            fn eta_is_continuous_at_zero(d in 1e-12f64..1e-9) {
                prop_assert!((eta(d) - eta(-d)).abs() < 1e-9);
            }

            #[test]
            fn error_sign_follows_prediction(t in 1.0f64..1e5, p in 0.0f64..1e5) {
                let er = relative_error(t, p).unwrap();
                prop_assert_eq!(er.partial_cmp(&0.0), (t - p).partial_cmp(&0.0));
            }

            #[test]
            fn appended_value_becomes_threshold(v in prop::collection::vec(0.0f64..1.0, 0..20), x in 0.0f64..1.0) {
                let mut vals = v.clone();
                vals.push(x);
                prop_assert_eq!(failure_threshold(&DeiSeries::raw(vals, 10.0)).unwrap(), x);
            }
        }
    }
}
