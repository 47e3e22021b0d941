//! Natural cubic spline through strictly increasing knots.

/// Evaluates the natural cubic spline through `(xs, ys)` at the integer
/// positions `0..n`. Positions outside the knot range extrapolate with the
/// end segments' cubics.
///
/// `xs` must be strictly increasing with at least two knots.
pub fn natural_cubic_at_samples(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert!(xs.len() >= 2);
    debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));

    let m = second_derivatives(xs, ys);
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let last_seg = xs.len() - 2;
    for i in 0..n {
        let x = i as f64;
        while seg < last_seg && x > xs[seg + 1] {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let h = x1 - x0;
        let a = x1 - x;
        let b = x - x0;
        out.push(
            m[seg] * a * a * a / (6.0 * h)
                + m[seg + 1] * b * b * b / (6.0 * h)
                + (ys[seg] / h - m[seg] * h / 6.0) * a
                + (ys[seg + 1] / h - m[seg + 1] * h / 6.0) * b,
        );
    }
    out
}

/// Second derivatives at the knots with zero curvature at both ends
/// (tridiagonal solve by the Thomas algorithm).
fn second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let k = xs.len();
    let mut m = vec![0.0; k];
    if k < 3 {
        return m;
    }
    let inner = k - 2;
    let mut diag = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    for r in 0..inner {
        let i = r + 1;
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        diag[r] = 2.0 * (h0 + h1);
        upper[r] = h1;
        rhs[r] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    // forward sweep; the sub-diagonal entry of row r is h0 of knot r+1
    for r in 1..inner {
        let lower = xs[r + 1] - xs[r];
        let w = lower / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for r in (0..inner - 1).rev() {
        m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    }
    m
}
