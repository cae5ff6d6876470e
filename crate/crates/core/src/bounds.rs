//! Closed-form lower bounds on the ergodic uplink rate.
//!
//! All bounds are Jensen-style: inside `log(1 + SNR·‖h‖²·d^(−β))` the fading
//! and distance terms are replaced by the exponential of their expected
//! logarithm, which can only lower the expectation. Everything is in nats
//! per channel use (natural logarithm).
//!
//! The four bounds, in increasing generality:
//!
//! * [`bound_macro_only`] — fixed macro link at distance `d0`.
//! * [`bound_sc_only`] — nearest small cell of a Poisson field of density λ,
//!   using `E[ln d] = −ψ/2 − ln √(πλ)` for the nearest-neighbor distance.
//! * [`bound_general`] — either/or association with decision factor α:
//!   macro term weighted by `exp(−λπα²d0²)` plus a small-cell term whose
//!   conditional log-distance comes from the truncated nearest-neighbor
//!   density; the truncation produces the saturating integral
//!   [`integral_xlogx`].
//! * [`bound_general_approx`] — same, with the integral frozen at its
//!   asymptote −ψ/4; valid once `α·d0·√(λπ) ≥ 4`.

use crate::error::{Error, Result};
use crate::fading::EULER_MASCHERONI;
use crate::link_budget::Scenario;
use crate::numeric::{adaptive_simpson, log1p_exp};

use std::f64::consts::PI;

/// `∫₀^∞ x·ln(x)·e^(−x²) dx = −ψ/4`, the saturation value of
/// [`integral_xlogx`].
pub const INTEGRAL_XLOGX_LIMIT: f64 = -EULER_MASCHERONI / 4.0;

/// The integrand decays like `e^(−x²)`; beyond this point the remaining
/// tail is below 1e−27 and cannot move a double at the magnitudes involved.
const INTEGRAL_CUTOFF: f64 = 8.0;

/// Boundary between the power-series evaluation (which absorbs the
/// `x·ln x` endpoint behaviour exactly) and adaptive quadrature.
const SERIES_RADIUS: f64 = 0.25;

/// Absolute tolerance passed to the adaptive quadrature; the documented
/// accuracy of [`integral_xlogx`] is 1e−12.
const QUADRATURE_TOL: f64 = 5e-14;

// --- nearest-neighbor distance machinery -----------------------------------

/// Density of the distance from a point to the nearest element of a
/// homogeneous Poisson field: `f(d) = 2πλd·exp(−λπd²)`.
pub fn nearest_distance_pdf(lambda_sc: f64, d: f64) -> f64 {
    2.0 * PI * lambda_sc * d * (-lambda_sc * PI * d * d).exp()
}

/// `∫₀ᵘ x·ln(x)·e^(−x²) dx`, the truncated log-moment integral of the
/// normalized nearest-neighbor distance.
///
/// Accurate to 1e−12 absolute. `u = +∞` returns the closed form −ψ/4
/// exactly; the value is already within 1e−6 of that limit for `u ≥ 4`.
/// The integrand has a removable singularity at 0 (`x·ln x → 0`), handled
/// by evaluating a power series on `[0, 0.25]` instead of quadrature.
pub fn integral_xlogx(upper: f64) -> Result<f64> {
    if upper.is_nan() || upper < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "integration limit must be nonnegative, got {upper}"
        )));
    }
    if upper == 0.0 {
        return Ok(0.0);
    }
    if upper.is_infinite() {
        return Ok(INTEGRAL_XLOGX_LIMIT);
    }
    let u = upper.min(INTEGRAL_CUTOFF);
    if u <= SERIES_RADIUS {
        return Ok(xlogx_series(u));
    }
    let integrand = |x: f64| x * x.ln() * (-x * x).exp();
    Ok(xlogx_series(SERIES_RADIUS)
        + adaptive_simpson(&integrand, SERIES_RADIUS, u, QUADRATURE_TOL))
}

/// Series form of the integral on a small leading interval: expanding
/// `e^(−x²)` termwise gives
/// `Σ_k (−1)^k/k! · δ^(2k+2)/(2k+2) · (ln δ − 1/(2k+2))`,
/// which converges geometrically for δ ≤ 1/4.
fn xlogx_series(delta: f64) -> f64 {
    let log_delta = delta.ln();
    let delta_sq = delta * delta;
    let mut power = delta_sq; // δ^(2k+2) / (terms of k!)
    let mut factorial_sign = 1.0; // (−1)^k / k!
    let mut sum = 0.0;
    for k in 0u32..32 {
        let order = (2 * k + 2) as f64;
        let term = factorial_sign * power / order * (log_delta - 1.0 / order);
        sum += term;
        if term.abs() < 1e-25 {
            break;
        }
        power *= delta_sq;
        factorial_sign *= -1.0 / (k as f64 + 1.0);
    }
    sum
}

// --- degenerate-policy bounds ----------------------------------------------

/// Lower bound on the ergodic rate of a fixed macro link at distance `d0`:
/// `ln(1 + d0^(−β)·γ·ρ(M))`.
pub fn bound_macro_only(d0_m: f64, gamma: f64, beta: f64, rho_m: f64) -> f64 {
    (d0_m.powf(-beta) * gamma * rho_m).ln_1p()
}

/// Lower bound on the ergodic rate when always attaching to the nearest
/// small cell: `ln(1 + γ·(λπ)^(β/2)·ρ(N)·e^(βψ/2))`.
pub fn bound_sc_only(lambda_sc: f64, gamma: f64, beta: f64, rho_n: f64) -> f64 {
    (gamma * (lambda_sc * PI).powf(beta / 2.0) * rho_n * (beta * EULER_MASCHERONI / 2.0).exp())
        .ln_1p()
}

// --- association probability and conditional log-distance -------------------

/// Probability of attaching to a small cell under decision factor α:
/// `P(d ≤ α·d0) = 1 − exp(−λπα²d0²)`.
///
/// α = 0 and α = +∞ are dispatched before any arithmetic, so no 0·∞ forms
/// arise for degenerate policies.
pub fn prob_sc(lambda_sc: f64, alpha: f64, d0_m: f64) -> f64 {
    if lambda_sc == 0.0 || alpha == 0.0 {
        return 0.0;
    }
    if alpha.is_infinite() {
        return 1.0;
    }
    let x = lambda_sc * PI * alpha * alpha * d0_m * d0_m;
    -(-x).exp_m1()
}

/// Expected log-distance to the nearest small cell conditioned on
/// small-cell association:
/// `2·∫₀ᵘ x ln x e^(−x²) dx / P(SC) − ln √(πλ)` with `u = α·d0·√(λπ)`.
///
/// At α = +∞ the conditioning is vacuous and the unconditioned
/// `−ψ/2 − ln √(πλ)` is returned. A zero association probability leaves
/// the expectation undefined and is reported as an error.
pub fn expected_log_d_given_sc(lambda_sc: f64, alpha: f64, d0_m: f64) -> Result<f64> {
    if !(lambda_sc.is_finite() && lambda_sc > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda_sc must be positive and finite, got {lambda_sc}"
        )));
    }
    let log_sqrt_pi_lambda = (PI * lambda_sc).sqrt().ln();
    if alpha.is_infinite() {
        return Ok(-EULER_MASCHERONI / 2.0 - log_sqrt_pi_lambda);
    }
    let p_sc = prob_sc(lambda_sc, alpha, d0_m);
    if p_sc == 0.0 {
        return Err(Error::DegenerateConditioning);
    }
    let u = alpha * d0_m * (lambda_sc * PI).sqrt();
    Ok(2.0 * integral_xlogx(u)? / p_sc - log_sqrt_pi_lambda)
}

// --- the general bound --------------------------------------------------------

/// A capacity bound decomposed into its inspectable parts.
///
/// `total_nats` always satisfies
/// `total = macro_term·p_mc + sc_term·p_sc` (the weighted conditional
/// bounds), with the convention that a conditional term whose weight is
/// exactly zero is reported as 0 rather than evaluated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundBreakdown {
    /// Lower bound on the ergodic rate, nats per channel use.
    pub total_nats: f64,
    /// Probability of small-cell association.
    pub p_sc: f64,
    /// Probability of macro association (= 1 − p_sc).
    pub p_mc: f64,
    /// Conditional macro-link bound, nats.
    pub macro_term_nats: f64,
    /// Conditional small-cell bound, nats.
    pub sc_term_nats: f64,
    /// Whether the saturating-integral approximation replaced the exact
    /// truncated integral.
    pub used_approximation: bool,
}

fn macro_collapse(scenario: &Scenario, used_approximation: bool) -> BoundBreakdown {
    let macro_term = bound_macro_only(
        scenario.d0_m(),
        scenario.gamma(),
        scenario.beta(),
        scenario.rho_m(),
    );
    BoundBreakdown {
        total_nats: macro_term,
        p_sc: 0.0,
        p_mc: 1.0,
        macro_term_nats: macro_term,
        sc_term_nats: 0.0,
        used_approximation,
    }
}

fn sc_collapse(scenario: &Scenario, used_approximation: bool) -> BoundBreakdown {
    let sc_term = bound_sc_only(
        scenario.lambda_sc(),
        scenario.gamma(),
        scenario.beta(),
        scenario.rho_n(),
    );
    BoundBreakdown {
        total_nats: sc_term,
        p_sc: 1.0,
        p_mc: 0.0,
        macro_term_nats: 0.0,
        sc_term_nats: sc_term,
        used_approximation,
    }
}

/// Weighted two-term bound shared by the exact and approximate variants;
/// `sc_exponent` is the `exp(…)` argument multiplying `γ(λπ)^(β/2)ρ(N)`
/// inside the small-cell logarithm. Evaluated in the log domain so a large
/// exponent (tiny association probability) cannot overflow.
fn weighted_bound(
    scenario: &Scenario,
    p_sc: f64,
    p_mc: f64,
    sc_exponent: f64,
    used_approximation: bool,
) -> BoundBreakdown {
    let macro_term = bound_macro_only(
        scenario.d0_m(),
        scenario.gamma(),
        scenario.beta(),
        scenario.rho_m(),
    );
    let log_arg = scenario.gamma().ln()
        + 0.5 * scenario.beta() * (scenario.lambda_sc() * PI).ln()
        + scenario.rho_n().ln()
        + sc_exponent;
    let sc_term = log1p_exp(log_arg);
    BoundBreakdown {
        total_nats: macro_term * p_mc + sc_term * p_sc,
        p_sc,
        p_mc,
        macro_term_nats: macro_term,
        sc_term_nats: sc_term,
        used_approximation,
    }
}

/// Exact general bound for any association policy.
///
/// The macro term `ln(1 + γ·d0^(−β)·ρ(M))` is weighted by
/// `exp(−λπα²d0²)`; the small-cell term
/// `ln(1 + γ·(λπ)^(β/2)·ρ(N)·exp(−2β·I/P(SC)))` with
/// `I = ∫₀^(αd0√(λπ)) x ln x e^(−x²) dx` is weighted by `P(SC)`.
/// Degenerate α collapse to the macro-only / SC-only bounds before any
/// arithmetic, so no division by `P(SC) = 0` occurs.
pub fn bound_general(scenario: &Scenario) -> BoundBreakdown {
    let alpha = scenario.alpha();
    if alpha == 0.0 || scenario.lambda_sc() == 0.0 {
        return macro_collapse(scenario, false);
    }
    if alpha.is_infinite() {
        return sc_collapse(scenario, false);
    }
    let u = alpha * scenario.d0_m() * (scenario.lambda_sc() * PI).sqrt();
    let x = u * u;
    let p_mc = (-x).exp();
    let p_sc = -(-x).exp_m1();
    if p_sc == 0.0 {
        // α·d0·√(λπ) underflowed: indistinguishable from macro-only.
        return macro_collapse(scenario, false);
    }
    let integral = integral_xlogx(u).expect("u is finite and nonnegative");
    let sc_exponent = -2.0 * scenario.beta() * integral / p_sc;
    weighted_bound(scenario, p_sc, p_mc, sc_exponent, false)
}

/// General bound with the truncated integral frozen at its asymptote:
/// the small-cell exponent becomes `βψ/2 / P(SC)`.
///
/// Only valid once the integral has saturated, i.e. `α·d0·√(λπ) ≥ 4`;
/// outside that region the exact [`bound_general`] must be used and an
/// error naming the offending value is returned.
pub fn bound_general_approx(scenario: &Scenario) -> Result<BoundBreakdown> {
    let alpha = scenario.alpha();
    if alpha.is_infinite() {
        // The macro weight is 0 and the exponent denominator is 1, so the
        // approximation coincides with the SC-only bound.
        return Ok(sc_collapse(scenario, true));
    }
    let u = alpha * scenario.d0_m() * (scenario.lambda_sc() * PI).sqrt();
    if !(u >= 4.0) {
        return Err(Error::ApproximationDomain { value: u });
    }
    let x = u * u;
    let p_mc = (-x).exp();
    let p_sc = -(-x).exp_m1();
    let sc_exponent = scenario.beta() * EULER_MASCHERONI / 2.0 / p_sc;
    Ok(weighted_bound(scenario, p_sc, p_mc, sc_exponent, true))
}
