//! Small numeric kernel shared by the analytic and Monte Carlo modules:
//! adaptive quadrature, a stable `log(1 + exp(z))`, and compensated
//! summation for deterministic reductions.

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute error
/// target `tol`.
///
/// Classic recursive scheme: an interval is accepted when the two-panel
/// Richardson estimate `|S_left + S_right − S_whole| / 15` drops below the
/// interval's share of the tolerance, and the extrapolated value is
/// returned. Depth is capped defensively; at the cap the best available
/// extrapolation is used.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 52)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let half_tol = 0.5 * tol;
    simpson_recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}

/// `log(1 + exp(z))` without overflow for large `z` and without precision
/// loss for very negative `z`.
pub(crate) fn log1p_exp(z: f64) -> f64 {
    if z > 36.0 {
        // exp(-z) < 2^-52: the correction keeps the result exact to 1 ulp.
        z + (-z).exp()
    } else {
        z.exp().ln_1p()
    }
}

/// Kahan–Babuška compensated sum in slice order.
///
/// Used for the Monte Carlo reductions so that the result is a pure
/// function of the value sequence, independent of how the values were
/// produced (serial or parallel).
pub(crate) fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean (Bessel-corrected standard
/// deviation over √n). A single observation has standard error 0 by
/// convention.
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 1, "mean of an empty sample is undefined");
    let mean = kahan_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut sq = Vec::with_capacity(n);
    sq.extend(values.iter().map(|&v| (v - mean) * (v - mean)));
    let var = kahan_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
