//! Built-in invariant suite.
//!
//! A reduced-sample-count version of the validation battery, runnable in
//! the field via the CLI `selftest` subcommand: closed-form constants,
//! degenerate collapses, integral saturation, Jensen validity of every
//! bound against a quick simulation, approximation accuracy, policy
//! dominance under common random numbers, sampler distribution checks,
//! planner inversion, and reproducibility. Each check reports a name, a
//! verdict, and the measured numbers, so a failure is diagnosable from
//! the report alone.

use crate::bounds::{
    bound_general, bound_general_approx, bound_macro_only, bound_sc_only, integral_xlogx,
    INTEGRAL_XLOGX_LIMIT,
};
use crate::fading::EULER_MASCHERONI;
use crate::link_budget::{AssociationPolicy, LinkBudget, PolicyKind, Scenario};
use crate::monte_carlo::{
    realized_rate_nats, simulate_ergodic_rate, McConfig, RealizationSampler,
};
use crate::planner::{plan_min_density, PlanRequest};

use serde::Serialize;
use std::f64::consts::PI;

/// Reference link budget used by the self-check suite: 33 dBm UE and SC,
/// 53 dBm macro, 10 MHz over −174 dBm/Hz noise, 25.6 dB reference path
/// loss, path-loss exponent 4.
pub fn reference_link() -> LinkBudget {
    LinkBudget {
        p_ue_dbm: 33.0,
        p_sc_dbm: 33.0,
        p_mc_dbm: 53.0,
        bandwidth_hz: 10e6,
        noise_psd_dbm_hz: -174.0,
        l_ref_db: 25.6,
        beta: 4.0,
    }
}

/// Outcome of one named invariant check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    /// Stable kebab-case identifier of the invariant.
    pub name: &'static str,
    /// Whether the invariant held.
    pub passed: bool,
    /// Measured quantities backing the verdict.
    pub detail: String,
}

/// Full selftest outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    /// Realizations used by the statistical checks.
    pub n_samples: u64,
    /// Seed used by the statistical checks.
    pub seed: u64,
    /// Individual check outcomes, in execution order.
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    /// True when every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|check| check.passed)
    }
}

fn scenario(kind: PolicyKind, lambda_sc: f64, d0_m: f64) -> Scenario {
    Scenario::new(
        reference_link(),
        AssociationPolicy::single_antenna(kind),
        lambda_sc,
        d0_m,
    )
    .expect("reference scenario parameters are valid")
}

/// Run the reduced invariant suite with `n_samples` Monte Carlo
/// realizations per statistical check.
pub fn run_selftest(n_samples: u64, seed: u64) -> SelftestReport {
    let mut checks = Vec::new();

    // Closed-form constants of the reference budget.
    {
        let link = reference_link();
        let noise = link.noise_power_dbm();
        let coupled = scenario(PolicyKind::Coupled, 6.25e-6, 250.0).alpha();
        let passed = (noise + 104.0).abs() <= 0.01 && (coupled - 0.01f64.powf(0.25)).abs() < 1e-9;
        checks.push(CheckResult {
            name: "reference-constants",
            passed,
            detail: format!("noise power {noise:.4} dBm, coupled alpha {coupled:.6}"),
        });
    }

    // Degenerate policies collapse to their closed forms.
    {
        let macro_scenario = scenario(PolicyKind::MacroOnly, 6.25e-6, 250.0);
        let macro_exact = bound_general(&macro_scenario).total_nats
            == bound_macro_only(250.0, macro_scenario.gamma(), 4.0, macro_scenario.rho_m());
        // A huge-but-finite decision factor must land on the SC-only bound.
        let loud_sc = LinkBudget {
            p_sc_dbm: reference_link().p_mc_dbm + 240.0,
            ..reference_link()
        };
        let near_sc = Scenario::new(
            loud_sc,
            AssociationPolicy::single_antenna(PolicyKind::Coupled),
            6.25e-6,
            250.0,
        )
        .expect("valid scenario");
        let sc_only = bound_sc_only(6.25e-6, near_sc.gamma(), 4.0, near_sc.rho_n());
        let rel = ((bound_general(&near_sc).total_nats - sc_only) / sc_only).abs();
        checks.push(CheckResult {
            name: "degenerate-collapse",
            passed: macro_exact && rel <= 1e-9,
            detail: format!("macro collapse exact: {macro_exact}, alpha=1e6 rel dev {rel:.2e}"),
        });
    }

    // The truncated integral saturates at −ψ/4.
    {
        let at_infinity = integral_xlogx(f64::INFINITY).unwrap();
        let limit_ok = (at_infinity - INTEGRAL_XLOGX_LIMIT).abs() <= 1e-12;
        let mut max_dev = 0.0f64;
        for u in [4.0, 5.0, 6.0, 8.0, 16.0, 1e3] {
            max_dev = max_dev.max((integral_xlogx(u).unwrap() - INTEGRAL_XLOGX_LIMIT).abs());
        }
        checks.push(CheckResult {
            name: "integral-saturation",
            passed: limit_ok && max_dev <= 1e-6,
            detail: format!("max |I(u) − I(∞)| for u ≥ 4: {max_dev:.2e}"),
        });
    }

    // Every bound is a lower bound on its simulated rate (reduced grid).
    {
        let mut worst_margin = f64::INFINITY;
        let mut passed = true;
        let mut worst_at = String::new();
        for kind in PolicyKind::ALL {
            for &(lambda, d0) in &[(6.25e-6, 250.0), (1e-5, 800.0)] {
                let s = scenario(kind, lambda, d0);
                let bound = bound_general(&s).total_nats;
                let estimate = simulate_ergodic_rate(&s, &McConfig::new(n_samples, seed))
                    .expect("simulation of a valid scenario succeeds");
                let margin =
                    estimate.mean_nats + 3.0 * estimate.stderr_nats - bound;
                if margin < worst_margin {
                    worst_margin = margin;
                    worst_at = format!("{} λ={lambda:e} d0={d0}", kind.name());
                }
                passed &= margin >= 0.0;
            }
        }
        checks.push(CheckResult {
            name: "bound-validity",
            passed,
            detail: format!("worst (MC + 3σ − bound) = {worst_margin:.4e} nats at {worst_at}"),
        });
    }

    // The saturating approximation tracks the exact bound where allowed.
    {
        let s = scenario(PolicyKind::Decoupled, 1e-4, 2000.0);
        let exact = bound_general(&s).total_nats;
        let approx = bound_general_approx(&s)
            .expect("precondition holds at this operating point")
            .total_nats;
        let rel = ((approx - exact) / exact).abs();
        checks.push(CheckResult {
            name: "approximation-accuracy",
            passed: rel <= 1e-3,
            detail: format!("relative deviation {rel:.2e} at λ=1e-4, d0=2000"),
        });
    }

    // Decoupled → SC-only convergence in d0.
    {
        let s = scenario(PolicyKind::Decoupled, 6.25e-6, 250.0);
        let sc_only = bound_sc_only(6.25e-6, s.gamma(), 4.0, s.rho_n());
        let d0_sat = 6.0 / (6.25e-6f64 * PI).sqrt();
        let gap = (bound_general(&s.with_d0(d0_sat).unwrap()).total_nats - sc_only).abs();
        checks.push(CheckResult {
            name: "sc-convergence",
            passed: gap < 1e-3,
            detail: format!("gap to SC-only at saturation distance: {gap:.2e} nats"),
        });
    }

    // Pointwise policy dominance under common random numbers.
    {
        let decoupled = scenario(PolicyKind::Decoupled, 6.25e-6, 250.0);
        let coupled = scenario(PolicyKind::Coupled, 6.25e-6, 250.0);
        let config = McConfig::new(n_samples, seed);
        let sampler = RealizationSampler::for_scenario(&decoupled, &config)
            .expect("valid scenario and config");
        let violations = (0..n_samples)
            .filter(|&i| {
                let r = sampler.realization(i);
                realized_rate_nats(&decoupled, &r) < realized_rate_nats(&coupled, &r)
            })
            .count();
        checks.push(CheckResult {
            name: "policy-dominance",
            passed: violations == 0,
            detail: format!("{violations} of {n_samples} realizations violated the ordering"),
        });
    }

    // Nearest-distance sampler reproduces its closed-form law.
    {
        let s = scenario(PolicyKind::SmallCellOnly, 6.25e-6, 250.0);
        let sampler = RealizationSampler::for_scenario(&s, &McConfig::new(n_samples, seed))
            .expect("valid scenario and config");
        let mut distances: Vec<f64> = (0..n_samples)
            .map(|i| sampler.realization(i).nearest_sc_m)
            .collect();
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = distances.len() as f64;
        let mut ks = 0.0f64;
        for (i, d) in distances.iter().enumerate() {
            let model = -(-6.25e-6 * PI * d * d).exp_m1();
            ks = ks
                .max((model - i as f64 / n).abs())
                .max((model - (i + 1) as f64 / n).abs());
        }
        // 99%-level Kolmogorov–Smirnov critical value.
        let threshold = 1.63 / n.sqrt();
        checks.push(CheckResult {
            name: "distance-distribution",
            passed: ks < threshold,
            detail: format!("KS distance {ks:.4e} vs threshold {threshold:.4e} at n={n_samples}"),
        });
    }

    // Planner inverts the closed-form SC-only bound.
    {
        let request = PlanRequest::new(
            4.0,
            250.0,
            AssociationPolicy::single_antenna(PolicyKind::SmallCellOnly),
            reference_link(),
            (1e-9, 1e-2),
        );
        let result = plan_min_density(&request).expect("target is reachable in the bracket");
        let s = scenario(PolicyKind::SmallCellOnly, result.lambda_min, 250.0);
        let oracle = ((4.0f64.exp_m1())
            / (s.gamma() * s.rho_n() * (2.0 * EULER_MASCHERONI).exp()))
        .sqrt()
            / PI;
        let rel = ((result.lambda_min - oracle) / oracle).abs();
        checks.push(CheckResult {
            name: "planner-inversion",
            passed: rel <= request.tolerance * 1.01,
            detail: format!("planned {:.6e} vs closed form {oracle:.6e}", result.lambda_min),
        });
    }

    // Bit-identical reruns.
    {
        let s = scenario(PolicyKind::Decoupled, 6.25e-6, 250.0);
        let config = McConfig::new(n_samples.min(5_000), seed);
        let a = simulate_ergodic_rate(&s, &config).expect("valid scenario");
        let b = simulate_ergodic_rate(&s, &config).expect("valid scenario");
        checks.push(CheckResult {
            name: "reproducibility",
            passed: a == b,
            detail: format!("two runs at seed {seed}: means {} and {}", a.mean_nats, b.mean_nats),
        });
    }

    SelftestReport {
        n_samples,
        seed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_at_reduced_sample_counts() {
        let report = run_selftest(10_000, 12345);
        for check in &report.checks {
            assert!(check.passed, "{} failed: {}", check.name, check.detail);
        }
        assert!(report.passed());
        assert_eq!(report.checks.len(), 10);
    }

    #[test]
    fn selftest_is_deterministic() {
        let a = run_selftest(2_000, 9);
        let b = run_selftest(2_000, 9);
        assert_eq!(a.passed(), b.passed());
        for (x, y) in a.checks.iter().zip(b.checks.iter()) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.detail, y.detail, "check {} must reproduce exactly", x.name);
        }
    }

    #[test]
    fn check_names_are_unique_and_kebab_case() {
        let report = run_selftest(1_000, 1);
        let mut names: Vec<&str> = report.checks.iter().map(|c| c.name).collect();
        let total = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), total, "duplicate check names");
        for name in names {
            assert!(
                name.chars().all(|c| c.is_ascii_lowercase() || c == '-'),
                "check name {name:?} is not kebab-case"
            );
        }
    }
}
