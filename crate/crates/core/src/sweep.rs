//! Parameter-sweep experiment harness.
//!
//! A sweep walks one geometric axis — the macro distance `d0` or the
//! small-cell density λ — over a grid, evaluates the analytic bounds for a
//! set of association policies at every point, optionally runs the Monte
//! Carlo estimator alongside, and serializes everything as CSV with a
//! stable schema. Rate-versus-distance and rate-versus-density curves are
//! sweeps over `d0` and `lambda` respectively.
//!
//! Determinism contract: given the same spec, the produced rows (and the
//! CSV bytes) are identical on every run, independent of how many worker
//! threads evaluate grid points.

use crate::bounds::{bound_general, bound_general_approx};
use crate::error::{Error, Result};
use crate::link_budget::{AssociationPolicy, Scenario};
use crate::monte_carlo::{simulate_ergodic_rate, McConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which scenario field the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Vary the macro distance `d0_m`, meters.
    D0,
    /// Vary the small-cell density `lambda_sc`, SC/m².
    Lambda,
}

impl SweepAxis {
    /// Stable lowercase name, matching the serialized form.
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::D0 => "d0",
            SweepAxis::Lambda => "lambda",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d0" => Ok(SweepAxis::D0),
            "lambda" => Ok(SweepAxis::Lambda),
            other => Err(Error::Config(format!(
                "unknown sweep axis {other:?}; expected \"d0\" or \"lambda\""
            ))),
        }
    }
}

/// Grid-point placement along the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    /// Equally spaced values.
    Linear,
    /// Equal ratios between consecutive values; requires a positive range.
    Log,
}

impl std::str::FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::Config(format!(
                "unknown spacing {other:?}; expected \"linear\" or \"log\""
            ))),
        }
    }
}

/// A full sweep description: axis, grid, policies, base scenario, and an
/// optional simulation rider.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Swept field.
    pub axis: SweepAxis,
    /// `[min, max]` in axis units.
    pub range: (f64, f64),
    /// Grid size, ≥ 2.
    pub points: usize,
    /// Grid placement.
    pub spacing: Spacing,
    /// Policies evaluated at every grid point, in output order.
    pub policies: Vec<AssociationPolicy>,
    /// Scenario providing every non-swept field (the swept one is ignored).
    pub scenario_base: Scenario,
    /// When present, Monte Carlo columns are emitted using this config at
    /// every row (same seed per row; rows differ by scenario).
    pub mc: Option<McConfig>,
}

impl SweepSpec {
    /// Check grid and policy-set invariants.
    pub fn validate(&self) -> Result<()> {
        let (min, max) = self.range;
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!(
                "sweep range must satisfy min < max, got [{min}, {max}]"
            )));
        }
        if self.spacing == Spacing::Log && min <= 0.0 {
            return Err(Error::Config(format!(
                "log spacing requires a positive range, got min = {min}"
            )));
        }
        if self.points < 2 {
            return Err(Error::Config(format!(
                "a sweep needs at least 2 grid points, got {}",
                self.points
            )));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("policy list must not be empty".into()));
        }
        if let Some(mc) = &self.mc {
            mc.validate()?;
        }
        Ok(())
    }

    /// The grid values, endpoints exact.
    ///
    /// Interior points are interpolated (linearly or in the log domain),
    /// but the first and last values are the configured bounds bit-for-bit
    /// so downstream joins on the axis column never chase rounding.
    pub fn grid(&self) -> Vec<f64> {
        let (min, max) = self.range;
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    min
                } else if i == last {
                    max
                } else {
                    let t = i as f64 / last as f64;
                    match self.spacing {
                        Spacing::Linear => min + (max - min) * t,
                        Spacing::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
                    }
                }
            })
            .collect()
    }
}

/// One (grid point × policy) evaluation.
///
/// Simulation columns are `None` when the sweep ran without Monte Carlo;
/// `approx_bound_nats` is `None` wherever the saturating approximation's
/// precondition `α·d0·√(λπ) ≥ 4` fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    /// Macro distance, meters.
    pub d0_m: f64,
    /// Small-cell density, SC/m².
    pub lambda_sc: f64,
    /// Policy name (`macro`, `sc`, `decoupled`, `coupled`).
    pub policy: &'static str,
    /// Decision factor α (0 and +∞ for the degenerate policies).
    pub alpha: f64,
    /// Exact lower bound, nats per channel use.
    pub bound_nats: f64,
    /// Saturating-integral approximation of the bound, where valid.
    pub approx_bound_nats: Option<f64>,
    /// Monte Carlo mean rate, nats.
    pub mc_mean_nats: Option<f64>,
    /// Standard error of the Monte Carlo mean, nats.
    pub mc_stderr_nats: Option<f64>,
    /// Analytic small-cell association probability.
    pub p_sc_analytic: f64,
    /// Empirical small-cell association fraction.
    pub p_sc_empirical: Option<f64>,
    /// Monte Carlo realizations behind the simulation columns.
    pub n_samples: Option<u64>,
    /// Seed behind the simulation columns.
    pub seed: Option<u64>,
}

/// Evaluate the sweep: one row per (grid value × policy), ordered by grid
/// value first and by the spec's policy order second.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    let cells: Vec<(f64, &AssociationPolicy)> = grid
        .iter()
        .flat_map(|&value| spec.policies.iter().map(move |policy| (value, policy)))
        .collect();
    cells
        .into_par_iter()
        .map(|(value, policy)| {
            let with_policy = spec.scenario_base.with_policy(*policy)?;
            let scenario = match spec.axis {
                SweepAxis::D0 => with_policy.with_d0(value)?,
                SweepAxis::Lambda => with_policy.with_lambda(value)?,
            };
            let breakdown = bound_general(&scenario);
            let approx_bound_nats = bound_general_approx(&scenario)
                .ok()
                .map(|approx| approx.total_nats);
            let estimate = spec
                .mc
                .as_ref()
                .map(|config| simulate_ergodic_rate(&scenario, config))
                .transpose()?;
            Ok(SweepRow {
                d0_m: scenario.d0_m(),
                lambda_sc: scenario.lambda_sc(),
                policy: scenario.policy().kind().name(),
                alpha: scenario.alpha(),
                bound_nats: breakdown.total_nats,
                approx_bound_nats,
                mc_mean_nats: estimate.map(|e| e.mean_nats),
                mc_stderr_nats: estimate.map(|e| e.stderr_nats),
                p_sc_analytic: breakdown.p_sc,
                p_sc_empirical: estimate.map(|e| e.p_sc_empirical),
                n_samples: estimate.map(|e| e.n_samples),
                seed: estimate.map(|e| e.seed),
            })
        })
        .collect()
}

// --- CSV serialization ---------------------------------------------------------

/// The stable CSV schema, exactly as consumers rely on it.
pub const CSV_HEADER: &str = "d0_m,lambda_sc,policy,alpha,bound_nats,approx_bound_nats,\
mc_mean_nats,mc_stderr_nats,p_sc_analytic,p_sc_empirical,n_samples,seed";

/// Serialize a float with 17 significant digits so parsing the field
/// recovers the exact bit pattern; infinities print as `inf`.
fn format_float(x: f64) -> String {
    if x.is_infinite() {
        (if x > 0.0 { "inf" } else { "-inf" }).to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn format_optional_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Write header plus one line per row. Missing optional fields are empty,
/// not sentinel numbers.
pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], writer: &mut W) -> std::io::Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            format_float(row.d0_m),
            format_float(row.lambda_sc),
            row.policy,
            format_float(row.alpha),
            format_float(row.bound_nats),
            format_optional_float(row.approx_bound_nats),
            format_optional_float(row.mc_mean_nats),
            format_optional_float(row.mc_stderr_nats),
            format_float(row.p_sc_analytic),
            format_optional_float(row.p_sc_empirical),
            row.n_samples.map(|n| n.to_string()).unwrap_or_default(),
            row.seed.map(|s| s.to_string()).unwrap_or_default(),
        )?;
    }
    Ok(())
}

/// Render the sweep as a CSV string (header included).
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buffer = Vec::new();
    write_csv(rows, &mut buffer).expect("writing to a Vec cannot fail");
    String::from_utf8(buffer).expect("CSV output is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_budget::{LinkBudget, PolicyKind};

    /// Tolerance for spacing regularity checks.
    const EPSILON: f64 = 1e-9;

    fn reference_link() -> LinkBudget {
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

    fn base_scenario() -> Scenario {
        Scenario::new(
            reference_link(),
            AssociationPolicy::single_antenna(PolicyKind::Decoupled),
            6.25e-6,
            250.0,
        )
        .unwrap()
    }

    fn all_policies() -> Vec<AssociationPolicy> {
        PolicyKind::ALL
            .iter()
            .map(|&kind| AssociationPolicy::single_antenna(kind))
            .collect()
    }

    fn d0_spec(points: usize) -> SweepSpec {
        SweepSpec {
            axis: SweepAxis::D0,
            range: (50.0, 2000.0),
            points,
            spacing: Spacing::Linear,
            policies: all_policies(),
            scenario_base: base_scenario(),
            mc: None,
        }
    }

    #[test]
    fn grid_endpoints_are_exact_for_both_spacings() {
        let mut spec = d0_spec(7);
        let grid = spec.grid();
        assert_eq!(grid[0].to_bits(), 50.0f64.to_bits());
        assert_eq!(grid[6].to_bits(), 2000.0f64.to_bits());

        spec.spacing = Spacing::Log;
        spec.range = (1e-7, 1e-4);
        let grid = spec.grid();
        assert_eq!(grid[0].to_bits(), 1e-7f64.to_bits());
        assert_eq!(grid[6].to_bits(), 1e-4f64.to_bits());
    }

    #[test]
    fn linear_spacing_has_equal_steps_and_log_equal_ratios() {
        let grid = d0_spec(14).grid();
        let step = grid[1] - grid[0];
        for pair in grid.windows(2) {
            assert!(
                ((pair[1] - pair[0]) / step - 1.0).abs() < EPSILON,
                "uneven linear step: {} vs {}",
                pair[1] - pair[0],
                step
            );
        }

        let mut spec = d0_spec(14);
        spec.spacing = Spacing::Log;
        spec.range = (1e-7, 1e-4);
        let grid = spec.grid();
        let ratio = grid[1] / grid[0];
        for pair in grid.windows(2) {
            assert!(
                (pair[1] / pair[0] / ratio - 1.0).abs() < EPSILON,
                "uneven log ratio: {} vs {ratio}",
                pair[1] / pair[0]
            );
        }
    }

    #[test]
    fn rows_are_ordered_axis_first_then_policy() {
        let spec = d0_spec(5);
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 5 * 4);
        let policy_names: Vec<&str> = PolicyKind::ALL.iter().map(|k| k.name()).collect();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.policy, policy_names[i % 4], "policy order at row {i}");
        }
        for chunk in rows.chunks(4).collect::<Vec<_>>().windows(2) {
            assert!(
                chunk[1][0].d0_m > chunk[0][0].d0_m,
                "axis values must be increasing"
            );
        }
    }

    #[test]
    fn sweep_rows_match_direct_bound_evaluation() {
        // The harness must add nothing to the math: a row equals a direct
        // call at the same scenario, bit for bit.
        let spec = d0_spec(2);
        let rows = run_sweep(&spec).unwrap();
        let direct = bound_general(
            &base_scenario()
                .with_policy(AssociationPolicy::single_antenna(PolicyKind::Coupled))
                .unwrap()
                .with_d0(50.0)
                .unwrap(),
        );
        let row = rows
            .iter()
            .find(|r| r.policy == "coupled" && r.d0_m == 50.0)
            .unwrap();
        assert_eq!(row.bound_nats.to_bits(), direct.total_nats.to_bits());
        assert_eq!(row.p_sc_analytic.to_bits(), direct.p_sc.to_bits());
    }

    #[test]
    fn approx_column_appears_exactly_where_the_precondition_holds() {
        let mut spec = d0_spec(6);
        spec.axis = SweepAxis::Lambda;
        spec.spacing = Spacing::Log;
        spec.range = (1e-7, 1e-3);
        let rows = run_sweep(&spec).unwrap();
        for row in &rows {
            let u = row.alpha * row.d0_m * (row.lambda_sc * std::f64::consts::PI).sqrt();
            assert_eq!(
                row.approx_bound_nats.is_some(),
                u >= 4.0,
                "approx column mismatch at policy {}, λ={:e} (u = {u})",
                row.policy,
                row.lambda_sc
            );
            if let Some(approx) = row.approx_bound_nats {
                assert!(
                    ((approx - row.bound_nats) / row.bound_nats).abs() <= 1e-3,
                    "approximation drifted from the exact bound"
                );
            }
        }
        // The SC-only policy has α = +∞, so its precondition always holds.
        assert!(rows
            .iter()
            .filter(|r| r.policy == "sc")
            .all(|r| r.approx_bound_nats.is_some()));
    }

    #[test]
    fn simulation_columns_appear_and_respect_the_bound() {
        let mut spec = d0_spec(3);
        spec.mc = Some(McConfig::new(4000, 7));
        let rows = run_sweep(&spec).unwrap();
        for row in &rows {
            let mean = row.mc_mean_nats.expect("mc columns must be populated");
            let stderr = row.mc_stderr_nats.unwrap();
            assert_eq!(row.n_samples, Some(4000));
            assert_eq!(row.seed, Some(7));
            assert!(
                row.bound_nats <= mean + 3.0 * stderr,
                "bound {} violates MC mean {mean} ± {stderr} at {} / {}",
                row.bound_nats,
                row.policy,
                row.d0_m
            );
            let p_emp = row.p_sc_empirical.unwrap();
            assert!((0.0..=1.0).contains(&p_emp));
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let mut spec = d0_spec(3);
        spec.mc = Some(McConfig::new(2000, 3));
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(csv_string(&a), csv_string(&b));
    }

    #[test]
    fn csv_header_and_field_shapes_are_stable() {
        let mut spec = d0_spec(2);
        spec.policies = vec![
            AssociationPolicy::single_antenna(PolicyKind::MacroOnly),
            AssociationPolicy::single_antenna(PolicyKind::SmallCellOnly),
        ];
        let rows = run_sweep(&spec).unwrap();
        let csv = csv_string(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "d0_m,lambda_sc,policy,alpha,bound_nats,approx_bound_nats,mc_mean_nats,\
             mc_stderr_nats,p_sc_analytic,p_sc_empirical,n_samples,seed"
        );
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 12, "every row has 12 fields: {line}");
            // No simulation config → the four MC fields are empty.
            assert_eq!(fields[6], "");
            assert_eq!(fields[7], "");
            assert_eq!(fields[9], "");
            assert_eq!(fields[10], "");
            assert_eq!(fields[11], "");
        }
        // α = +∞ serializes as a parseable token, not a number soup.
        assert!(
            csv.lines().any(|l| l.contains(",sc,inf,")),
            "SC-only rows must carry alpha = inf:\n{csv}"
        );
    }

    #[test]
    fn csv_floats_round_trip_exactly() {
        let spec = d0_spec(3);
        let rows = run_sweep(&spec).unwrap();
        let csv = csv_string(&rows);
        for (line, row) in csv.lines().skip(1).zip(rows.iter()) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[0].parse::<f64>().unwrap().to_bits(), row.d0_m.to_bits());
            assert_eq!(
                fields[4].parse::<f64>().unwrap().to_bits(),
                row.bound_nats.to_bits()
            );
            assert_eq!(
                fields[8].parse::<f64>().unwrap().to_bits(),
                row.p_sc_analytic.to_bits()
            );
            let alpha: f64 = fields[3].parse().unwrap();
            assert_eq!(alpha.to_bits(), row.alpha.to_bits(), "alpha round trip");
        }
    }

    #[test]
    fn invalid_specs_are_rejected_with_config_errors() {
        let mut spec = d0_spec(1);
        assert!(run_sweep(&spec).is_err());
        spec = d0_spec(5);
        spec.range = (2000.0, 50.0);
        assert!(run_sweep(&spec).is_err());
        spec = d0_spec(5);
        spec.spacing = Spacing::Log;
        spec.range = (-1.0, 10.0);
        assert!(run_sweep(&spec).is_err());
        spec = d0_spec(5);
        spec.policies.clear();
        assert!(run_sweep(&spec).is_err());
        spec = d0_spec(5);
        spec.mc = Some(McConfig::new(0, 1));
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn rate_vs_distance_sweep_shows_the_expected_curve_shapes() {
        // Fixed density, distance sweep: the macro-only curve decreases,
        // the SC-only curve is flat, and the decoupled curve approaches
        // the SC-only one at large d0.
        let spec = d0_spec(12);
        let rows = run_sweep(&spec).unwrap();
        let series = |name: &str| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.policy == name)
                .map(|r| r.bound_nats)
                .collect()
        };
        let macro_curve = series("macro");
        assert!(
            macro_curve.windows(2).all(|w| w[1] < w[0]),
            "macro-only rate must decrease with distance"
        );
        let sc_curve = series("sc");
        assert!(
            sc_curve.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-12),
            "SC-only rate must not depend on d0"
        );
        let decoupled_curve = series("decoupled");
        let final_gap = (decoupled_curve.last().unwrap() - sc_curve.last().unwrap()).abs();
        assert!(
            final_gap < 1e-3,
            "decoupled must converge to SC-only at 2000 m, gap {final_gap}"
        );
    }
}
