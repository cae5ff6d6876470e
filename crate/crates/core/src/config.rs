//! Flat JSON configuration files.
//!
//! Every file is a single flat object with snake_case keys — no nesting,
//! so a config is greppable and diffs stay line-local. Unknown keys are
//! rejected to catch typos (`lamda_sc` fails loudly instead of silently
//! using a default).
//!
//! Three shapes exist:
//! * a **scenario** file fully describes one evaluation point (link
//!   budget, policy, antenna counts, density, distance);
//! * a **sweep** file is a scenario plus grid keys (`axis`, `range`,
//!   `points`, `spacing`, `policies`) and optional simulation keys
//!   (`n_samples`, `seed`, `sampling_mode`, `ppp_window_radius_factor`);
//! * a **plan** file is a scenario (density omitted — it is the unknown)
//!   plus `target_rate`, `lambda_bracket`, and optional `tolerance`.

use crate::error::{Error, Result};
use crate::link_budget::{AssociationPolicy, LinkBudget, PolicyKind, Scenario};
use crate::monte_carlo::{McConfig, SamplingMode};
use crate::planner::{PlanRequest, DEFAULT_PLAN_TOLERANCE};
use crate::sweep::{Spacing, SweepAxis, SweepSpec};

use serde::Deserialize;

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|err| Error::Config(format!("invalid {what} config: {err}")))
}

// --- scenario files -------------------------------------------------------------

/// One evaluation point, flat on disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    p_ue_dbm: f64,
    p_sc_dbm: f64,
    p_mc_dbm: f64,
    bandwidth_hz: f64,
    noise_psd_dbm_hz: f64,
    l_ref_db: f64,
    beta: f64,
    policy: PolicyKind,
    m_antennas: u32,
    n_antennas: u32,
    lambda_sc: f64,
    d0_m: f64,
}

impl ScenarioFile {
    fn link(&self) -> LinkBudget {
        LinkBudget {
            p_ue_dbm: self.p_ue_dbm,
            p_sc_dbm: self.p_sc_dbm,
            p_mc_dbm: self.p_mc_dbm,
            bandwidth_hz: self.bandwidth_hz,
            noise_psd_dbm_hz: self.noise_psd_dbm_hz,
            l_ref_db: self.l_ref_db,
            beta: self.beta,
        }
    }

    fn into_scenario(self) -> Result<Scenario> {
        let link = self.link();
        let policy = AssociationPolicy::new(self.policy, self.m_antennas, self.n_antennas)?;
        Scenario::new(link, policy, self.lambda_sc, self.d0_m)
    }
}

/// Parse a scenario config file.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    parse_json::<ScenarioFile>(text, "scenario")?.into_scenario()
}

// --- sweep files ----------------------------------------------------------------

/// Scenario keys plus the sweep grid and optional simulation rider.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    p_ue_dbm: f64,
    p_sc_dbm: f64,
    p_mc_dbm: f64,
    bandwidth_hz: f64,
    noise_psd_dbm_hz: f64,
    l_ref_db: f64,
    beta: f64,
    m_antennas: u32,
    n_antennas: u32,
    lambda_sc: f64,
    d0_m: f64,
    axis: SweepAxis,
    range: [f64; 2],
    points: usize,
    spacing: Spacing,
    policies: Vec<PolicyKind>,
    n_samples: Option<u64>,
    seed: Option<u64>,
    sampling_mode: Option<SamplingMode>,
    ppp_window_radius_factor: Option<f64>,
}

/// Parse a sweep config file into a validated [`SweepSpec`].
pub fn sweep_from_json(text: &str) -> Result<SweepSpec> {
    let file: SweepFile = parse_json(text, "sweep")?;
    if file.policies.is_empty() {
        return Err(Error::Config("policies must list at least one policy".into()));
    }
    for (i, kind) in file.policies.iter().enumerate() {
        if file.policies[..i].contains(kind) {
            return Err(Error::Config(format!(
                "policies lists {:?} twice",
                kind.name()
            )));
        }
    }
    if file.n_samples.is_none()
        && (file.seed.is_some()
            || file.sampling_mode.is_some()
            || file.ppp_window_radius_factor.is_some())
    {
        return Err(Error::Config(
            "simulation keys (seed, sampling_mode, ppp_window_radius_factor) require n_samples"
                .into(),
        ));
    }
    let link = LinkBudget {
        p_ue_dbm: file.p_ue_dbm,
        p_sc_dbm: file.p_sc_dbm,
        p_mc_dbm: file.p_mc_dbm,
        bandwidth_hz: file.bandwidth_hz,
        noise_psd_dbm_hz: file.noise_psd_dbm_hz,
        l_ref_db: file.l_ref_db,
        beta: file.beta,
    };
    // The base carries every non-swept field; build it under the first
    // swept policy so construction-time validation reflects the sweep.
    let base_policy = AssociationPolicy::new(file.policies[0], file.m_antennas, file.n_antennas)?;
    let scenario_base = Scenario::new(link, base_policy, file.lambda_sc, file.d0_m)?;
    let policies = file
        .policies
        .iter()
        .map(|&kind| AssociationPolicy::new(kind, file.m_antennas, file.n_antennas))
        .collect::<Result<Vec<_>>>()?;
    let mc = file.n_samples.map(|n_samples| McConfig {
        n_samples,
        seed: file.seed.unwrap_or(0),
        sampling_mode: file.sampling_mode.unwrap_or_default(),
        ppp_window_radius_factor: file.ppp_window_radius_factor.unwrap_or(1.0),
    });
    let spec = SweepSpec {
        axis: file.axis,
        range: (file.range[0], file.range[1]),
        points: file.points,
        spacing: file.spacing,
        policies,
        scenario_base,
        mc,
    };
    spec.validate()?;
    Ok(spec)
}

// --- plan files -----------------------------------------------------------------

/// Scenario keys (minus the density, which is the unknown) plus the
/// planning target and bracket.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    p_ue_dbm: f64,
    p_sc_dbm: f64,
    p_mc_dbm: f64,
    bandwidth_hz: f64,
    noise_psd_dbm_hz: f64,
    l_ref_db: f64,
    beta: f64,
    policy: PolicyKind,
    m_antennas: u32,
    n_antennas: u32,
    d0_m: f64,
    /// Accepted so a scenario file can be reused as a plan file; the
    /// planner searches the density, so a configured value is ignored.
    #[serde(default)]
    #[allow(dead_code)]
    lambda_sc: Option<f64>,
    /// QoS floor, nats per channel use.
    target_rate: f64,
    lambda_bracket: [f64; 2],
    tolerance: Option<f64>,
}

/// Parse a plan config file into a validated [`PlanRequest`].
pub fn plan_from_json(text: &str) -> Result<PlanRequest> {
    let file: PlanFile = parse_json(text, "plan")?;
    let link = LinkBudget {
        p_ue_dbm: file.p_ue_dbm,
        p_sc_dbm: file.p_sc_dbm,
        p_mc_dbm: file.p_mc_dbm,
        bandwidth_hz: file.bandwidth_hz,
        noise_psd_dbm_hz: file.noise_psd_dbm_hz,
        l_ref_db: file.l_ref_db,
        beta: file.beta,
    };
    let policy = AssociationPolicy::new(file.policy, file.m_antennas, file.n_antennas)?;
    let request = PlanRequest {
        target_rate_nats: file.target_rate,
        d0_m: file.d0_m,
        policy,
        link,
        lambda_bracket: (file.lambda_bracket[0], file.lambda_bracket[1]),
        tolerance: file.tolerance.unwrap_or(DEFAULT_PLAN_TOLERANCE),
    };
    request.validate()?;
    Ok(request)
}
