//! Command-line frontend for the uplink capacity-bound library.
//!
//! Five subcommands cover the full workflow:
//!
//! * `bound` — evaluate the closed-form lower bound on the ergodic uplink
//!   rate for one scenario,
//! * `simulate` — estimate the exact ergodic rate by Monte Carlo,
//! * `sweep` — tabulate bounds (optionally with simulation columns) along a
//!   distance or density grid, as CSV,
//! * `plan` — invert the bound: the minimum small-cell density meeting a
//!   rate target,
//! * `selftest` — run the built-in invariant suite.
//!
//! Results go to stdout as JSON (CSV for `sweep`). Every run with the same
//! inputs produces byte-identical output, regardless of thread count.
//! Failures print a machine-readable `{"error": {"kind", "message"}}`
//! object on stderr and exit with a code identifying the failure class —
//! see [`exit_code`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dudecap::config::{plan_from_json, scenario_from_json, sweep_from_json};
use dudecap::planner::{rate_to_target_units, nats_from_bits_per_s_hz, RateReport};
use dudecap::selftest::{run_selftest, SelftestReport};
use dudecap::sweep::csv_string;
use dudecap::{
    bound_general, bound_general_approx, plan_min_density, run_sweep, simulate_ergodic_rate,
    AssociationPolicy, BoundBreakdown, Error, McConfig, McEstimate, PlanRequest, PlanResult,
    PolicyKind, Result, SamplingMode, Scenario,
};
use serde::Serialize;

/// Density search bracket used when `plan` starts from a bare scenario
/// file: 0.01 small cells per km² up to 10⁴ per km².
const DEFAULT_PLAN_BRACKET: (f64, f64) = (1e-8, 1e-2);

// --- argument grammar ---------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "dudecap",
    version,
    about = "Ergodic uplink capacity bounds for decoupled heterogeneous networks",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form lower bound on the ergodic uplink rate.
    Bound {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Use the saturating-integral approximation (requires
        /// α·d0·√(λπ) ≥ 4; exits with code 5 otherwise).
        #[arg(long)]
        approx: bool,
        /// Unit for the extra headline-rate field (the breakdown always
        /// carries nats).
        #[arg(long, value_enum, default_value_t = Units::Nats)]
        units: Units,
    },
    /// Estimate the exact ergodic uplink rate by Monte Carlo simulation.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of independent realizations.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// RNG seed; identical seeds give bit-identical estimates.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nearest-distance sampling strategy.
        #[arg(long, default_value = "inverse-cdf")]
        mode: SamplingMode,
        /// Multiplier on the minimum simulation-window radius
        /// (finite-ppp mode only).
        #[arg(long, default_value_t = 1.0)]
        window_factor: f64,
    },
    /// Tabulate bounds along a distance or density grid and emit CSV.
    Sweep {
        /// Sweep description (JSON).
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Find the minimum small-cell density meeting a rate target.
    Plan {
        /// Full planning problem (JSON): link budget, policy, distance,
        /// target, and bracket.
        #[arg(long, value_name = "FILE", conflicts_with = "config")]
        spec: Option<PathBuf>,
        /// Scenario description (JSON); requires --target or --target-bits.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Target rate, nats per channel use.
        #[arg(long, conflicts_with = "target_bits")]
        target: Option<f64>,
        /// Target spectral efficiency, bit/s/Hz.
        #[arg(long)]
        target_bits: Option<f64>,
        /// Lower edge of the density search bracket, SC/m².
        #[arg(long)]
        lambda_lo: Option<f64>,
        /// Upper edge of the density search bracket, SC/m².
        #[arg(long)]
        lambda_hi: Option<f64>,
        /// Relative tolerance on the returned density, in (0, 0.1).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Override the association policy.
        #[arg(long)]
        policy: Option<PolicyKind>,
        /// Override the macro distance, meters.
        #[arg(long)]
        d0: Option<f64>,
    },
    /// Run the built-in invariant suite at a configurable sample count.
    Selftest {
        /// Realizations for each statistical check.
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        /// RNG seed for the statistical checks.
        #[arg(long, default_value_t = 12_345)]
        seed: u64,
        /// Emit the full report as JSON instead of one line per check.
        #[arg(long)]
        json: bool,
    },
}

/// Scenario file plus field-level overrides, shared by `bound` and
/// `simulate`.
#[derive(Args)]
struct ScenarioArgs {
    /// Scenario description (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the association policy.
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Override the macro distance, meters.
    #[arg(long)]
    d0: Option<f64>,
    /// Override the small-cell density, SC/m².
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the macro antenna count M.
    #[arg(long)]
    m: Option<u32>,
    /// Override the small-cell antenna count N.
    #[arg(long)]
    n: Option<u32>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let base = scenario_from_json(&read_file(&self.config)?)?;
        apply_overrides(&base, self.policy, self.d0, self.lambda, self.m, self.n)
    }
}

/// Rebuild a scenario with any overridden fields, revalidating the result.
fn apply_overrides(
    base: &Scenario,
    policy: Option<PolicyKind>,
    d0: Option<f64>,
    lambda: Option<f64>,
    m: Option<u32>,
    n: Option<u32>,
) -> Result<Scenario> {
    let current = base.policy();
    let policy = AssociationPolicy::new(
        policy.unwrap_or(current.kind()),
        m.unwrap_or(current.m_antennas()),
        n.unwrap_or(current.n_antennas()),
    )?;
    Scenario::new(
        *base.link(),
        policy,
        lambda.unwrap_or(base.lambda_sc()),
        d0.unwrap_or(base.d0_m()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    /// Nats per channel use (the native unit; no extra field).
    Nats,
    /// Spectral efficiency, bit/s/Hz.
    Bits,
    /// Throughput over the configured bandwidth, Mbit/s.
    Mbps,
}

// --- output shapes --------------------------------------------------------------

/// JSON has no literal for infinities; the small-cell-only decision factor
/// α = ∞ serializes as the string "inf" so it is never silently null.
fn serialize_extended_real<S: serde::Serializer>(
    value: &f64,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    if value.is_infinite() {
        serializer.serialize_str(if *value > 0.0 { "inf" } else { "-inf" })
    } else {
        serializer.serialize_f64(*value)
    }
}

/// Input echo common to `bound` and `simulate` output, so downstream
/// tooling never has to re-open the config file.
#[derive(Serialize)]
struct ScenarioEcho {
    policy: &'static str,
    m_antennas: u32,
    n_antennas: u32,
    #[serde(serialize_with = "serialize_extended_real")]
    alpha: f64,
    lambda_sc: f64,
    d0_m: f64,
}

impl ScenarioEcho {
    fn new(scenario: &Scenario) -> Self {
        ScenarioEcho {
            policy: scenario.policy().kind().name(),
            m_antennas: scenario.policy().m_antennas(),
            n_antennas: scenario.policy().n_antennas(),
            alpha: scenario.alpha(),
            lambda_sc: scenario.lambda_sc(),
            d0_m: scenario.d0_m(),
        }
    }
}

#[derive(Serialize)]
struct BoundOutput {
    #[serde(flatten)]
    scenario: ScenarioEcho,
    #[serde(flatten)]
    breakdown: BoundBreakdown,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_bits_per_s_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_mbit_per_s: Option<f64>,
}

#[derive(Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    scenario: ScenarioEcho,
    sampling_mode: &'static str,
    #[serde(flatten)]
    estimate: McEstimate,
    /// Closed-form lower bound for the same scenario, for immediate
    /// comparison against `mean_nats`.
    bound_nats: f64,
}

#[derive(Serialize)]
struct PlanOutput {
    policy: &'static str,
    d0_m: f64,
    target_rate_nats: f64,
    tolerance: f64,
    lambda_bracket: [f64; 2],
    #[serde(flatten)]
    result: PlanResult,
    /// The achieved bound in every accepted unit, over the configured
    /// bandwidth.
    achieved_rate: RateReport,
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value)
        .expect("plain data structures serialize without error");
    println!("{text}");
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|err| Error::Config(format!("cannot read {}: {err}", path.display())))
}

// --- subcommand bodies ------------------------------------------------------------

fn cmd_bound(args: &ScenarioArgs, approx: bool, units: Units) -> Result<()> {
    let scenario = args.load()?;
    let breakdown = if approx {
        bound_general_approx(&scenario)?
    } else {
        bound_general(&scenario)
    };
    let report = rate_to_target_units(breakdown.total_nats, scenario.link().bandwidth_hz);
    print_json(&BoundOutput {
        scenario: ScenarioEcho::new(&scenario),
        breakdown,
        total_bits_per_s_hz: (units == Units::Bits).then_some(report.bits_per_s_hz),
        total_mbit_per_s: (units == Units::Mbps).then_some(report.mbit_per_s),
    });
    Ok(())
}

fn cmd_simulate(
    args: &ScenarioArgs,
    samples: u64,
    seed: u64,
    mode: SamplingMode,
    window_factor: f64,
) -> Result<()> {
    let scenario = args.load()?;
    let config = McConfig {
        n_samples: samples,
        seed,
        sampling_mode: mode,
        ppp_window_radius_factor: window_factor,
    };
    config.validate()?;
    let estimate = simulate_ergodic_rate(&scenario, &config)?;
    print_json(&SimulateOutput {
        scenario: ScenarioEcho::new(&scenario),
        sampling_mode: mode.name(),
        estimate,
        bound_nats: bound_general(&scenario).total_nats,
    });
    Ok(())
}

fn cmd_sweep(spec_path: &Path, out: Option<&Path>) -> Result<()> {
    let spec = sweep_from_json(&read_file(spec_path)?)?;
    let csv = csv_string(&run_sweep(&spec)?);
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|err| Error::Config(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    spec: Option<&Path>,
    config: Option<&Path>,
    target: Option<f64>,
    target_bits: Option<f64>,
    lambda_lo: Option<f64>,
    lambda_hi: Option<f64>,
    tolerance: Option<f64>,
    policy: Option<PolicyKind>,
    d0: Option<f64>,
) -> Result<()> {
    let mut request: PlanRequest = match (spec, config) {
        (Some(path), None) => plan_from_json(&read_file(path)?)?,
        (None, Some(path)) => {
            let scenario = scenario_from_json(&read_file(path)?)?;
            if target.is_none() && target_bits.is_none() {
                return Err(Error::Config(
                    "planning from a scenario file requires --target or --target-bits".into(),
                ));
            }
            PlanRequest::new(
                f64::NAN, // placeholder; target flags are applied below
                scenario.d0_m(),
                *scenario.policy(),
                *scenario.link(),
                DEFAULT_PLAN_BRACKET,
            )
        }
        (None, None) => {
            return Err(Error::Config(
                "plan requires --spec (full problem) or --config (scenario plus --target)".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --spec together with --config"),
    };

    if let Some(t) = target {
        request.target_rate_nats = t;
    }
    if let Some(b) = target_bits {
        request.target_rate_nats = nats_from_bits_per_s_hz(b);
    }
    if let Some(lo) = lambda_lo {
        request.lambda_bracket.0 = lo;
    }
    if let Some(hi) = lambda_hi {
        request.lambda_bracket.1 = hi;
    }
    if let Some(tol) = tolerance {
        request.tolerance = tol;
    }
    if let Some(kind) = policy {
        request.policy = AssociationPolicy::new(
            kind,
            request.policy.m_antennas(),
            request.policy.n_antennas(),
        )?;
    }
    if let Some(distance) = d0 {
        request.d0_m = distance;
    }

    let result = plan_min_density(&request)?;
    print_json(&PlanOutput {
        policy: request.policy.kind().name(),
        d0_m: request.d0_m,
        target_rate_nats: request.target_rate_nats,
        tolerance: request.tolerance,
        lambda_bracket: [request.lambda_bracket.0, request.lambda_bracket.1],
        achieved_rate: rate_to_target_units(
            result.achieved_bound.total_nats,
            request.link.bandwidth_hz,
        ),
        result,
    });
    Ok(())
}

fn cmd_selftest(samples: u64, seed: u64, json: bool) -> Result<()> {
    let report: SelftestReport = run_selftest(samples, seed);
    if json {
        print_json(&report);
    } else {
        for check in &report.checks {
            let verdict = if check.passed { "PASS" } else { "FAIL" };
            println!("{}: {} — {}", check.name, verdict, check.detail);
        }
        let passed = report.checks.iter().filter(|c| c.passed).count();
        println!("{passed}/{} checks passed", report.checks.len());
    }
    if !report.passed() {
        let failed = report.checks.len() - report.checks.iter().filter(|c| c.passed).count();
        eprintln!(
            "{}",
            serde_json::json!({
                "error": {
                    "kind": "selftest-failure",
                    "message": format!("{failed} of {} invariant checks failed", report.checks.len()),
                }
            })
        );
        std::process::exit(6);
    }
    Ok(())
}

// --- dispatch -----------------------------------------------------------------------

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bound {
            scenario,
            approx,
            units,
        } => cmd_bound(&scenario, approx, units),
        Command::Simulate {
            scenario,
            samples,
            seed,
            mode,
            window_factor,
        } => cmd_simulate(&scenario, samples, seed, mode, window_factor),
        Command::Sweep { spec, out } => cmd_sweep(&spec, out.as_deref()),
        Command::Plan {
            spec,
            config,
            target,
            target_bits,
            lambda_lo,
            lambda_hi,
            tolerance,
            policy,
            d0,
        } => cmd_plan(
            spec.as_deref(),
            config.as_deref(),
            target,
            target_bits,
            lambda_lo,
            lambda_hi,
            tolerance,
            policy,
            d0,
        ),
        Command::Selftest {
            samples,
            seed,
            json,
        } => cmd_selftest(samples, seed, json),
    }
}

/// Process exit code for each failure class:
///
/// * 2 — bad input: unreadable or invalid config, argument outside its
///   domain, policy misuse, conditioning on a zero-probability event
///   (clap itself also exits 2 on malformed command lines),
/// * 3 — planner target unreachable within the bracket,
/// * 4 — planner bracket on which the bound is not monotone,
/// * 5 — approximation requested outside its validity region,
/// * 6 — internal invariant failure (sampling modes disagree, selftest).
fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::DegenerateConditioning
        | Error::InvalidPolicy(_) => 2,
        Error::UnreachableTarget { .. } => 3,
        Error::NonMonotoneRegime { .. } => 4,
        Error::ApproximationDomain { .. } => 5,
        Error::SamplingInconsistency { .. } => 6,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!(
            "{}",
            serde_json::json!({
                "error": { "kind": error.kind(), "message": error.to_string() }
            })
        );
        std::process::exit(exit_code(&error));
    }
}
