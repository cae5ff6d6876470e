//! Rayleigh-fading log-moment constants.
//!
//! For a receiver with `n` antennas and maximum-ratio combining, the squared
//! channel norm ‖h‖² is the sum of `n` unit-mean exponential variates
//! (Erlang(n, 1)), and the Jensen-style capacity bounds need
//!
//! ```text
//! ρ(n) = exp(E[ln ‖h‖²]) = exp(−ψ + Σ_{j=1}^{n−1} 1/j)
//! ```
//!
//! where ψ is the Euler–Mascheroni constant. ρ(1) = e^(−ψ) ≈ 0.5615 is the
//! single-antenna Rayleigh case.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant ψ to full double precision.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Geometric mean of the squared channel norm for an `n`-antenna receiver:
/// `exp(−ψ + H_{n−1})` with `H_k` the k-th harmonic number (`H_0 = 0`).
///
/// Strictly increasing in `n`, and `ρ(n)/n → 1` as `n → ∞`.
pub fn rho(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "antenna count must be >= 1, got {n}"
        )));
    }
    Ok((harmonic(n - 1) - EULER_MASCHERONI).exp())
}

/// H_k = Σ_{j=1}^{k} 1/j, with H_0 = 0.
fn harmonic(k: u32) -> f64 {
    // Summed from the smallest term up so the partial sums grow monotonically.
    (1..=k).rev().map(|j| 1.0 / j as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tolerance for values checked against an independent high-precision
    /// evaluation of the defining formula.
    const EPSILON: f64 = 1e-12;

    #[test]
    fn rho_single_antenna_is_exp_neg_psi() {
        // exp(−0.5772156649015329…) evaluated at high precision.
        let want = 0.561_459_483_566_885_2;
        let got = rho(1).unwrap();
        assert!(
            (got - want).abs() < EPSILON,
            "rho(1): got {got}, want {want}"
        );
    }

    #[test]
    fn rho_two_antennas_adds_one_to_the_exponent() {
        let want = 1.526_205_111_595_863_9; // e^(1 − ψ)
        let got = rho(2).unwrap();
        assert!(
            (got - want).abs() < EPSILON,
            "rho(2): got {got}, want {want}"
        );
        // Recurrence ρ(n+1) = ρ(n)·e^(1/n) ties it to the n=1 value.
        assert!(
            (got - rho(1).unwrap() * 1.0f64.exp()).abs() < EPSILON,
            "rho(2) must equal rho(1)*e"
        );
    }

    #[test]
    fn rho_four_antennas_matches_harmonic_sum() {
        let want = 3.511_761_166_339_476; // e^(11/6 − ψ)
        let got = rho(4).unwrap();
        assert!(
            (got - want).abs() < EPSILON,
            "rho(4): got {got}, want {want}"
        );
    }

    #[test]
    fn rho_recurrence_and_monotonicity_hold() {
        let mut prev = rho(1).unwrap();
        for n in 2..=64 {
            let cur = rho(n).unwrap();
            assert!(cur > prev, "rho must be strictly increasing at n = {n}");
            let recur = prev * (1.0 / (n as f64 - 1.0)).exp();
            assert!(
                (cur - recur).abs() <= 1e-12 * cur,
                "recurrence violated at n = {n}: {cur} vs {recur}"
            );
            prev = cur;
        }
    }

    #[test]
    fn rho_over_n_approaches_one() {
        // H_{n−1} − ln n → ψ, so ρ(n)/n → 1; 1% tolerance at n = 10⁴.
        let n = 10_000u32;
        let ratio = rho(n).unwrap() / n as f64;
        assert!(
            (ratio - 1.0).abs() < 0.01,
            "rho(n)/n should be within 1% of 1 at n = {n}, got {ratio}"
        );
    }

    #[test]
    fn rho_rejects_zero_antennas() {
        assert!(matches!(rho(0), Err(Error::InvalidArgument(_))));
    }
}
