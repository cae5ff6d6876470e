//! Radio link budget, association policies, and the derived quantities the
//! capacity bounds consume.
//!
//! All user-facing configuration is in dB/dBm, mirroring how link budgets
//! are tabulated; all internal math is linear. The conversion happens
//! exactly once, when a [`Scenario`] is constructed, so downstream code
//! never mixes domains.
//!
//! The four uplink association policies are unified under a single decision
//! factor α: the user attaches to the nearest small cell iff its distance
//! `d` satisfies `d ≤ α·d0`, where `d0` is the distance to the macro AP.
//! `α = 0` is macro-only, `α = +∞` is small-cell-only, and the coupled /
//! decoupled policies produce intermediate factors from the power ratio and
//! the antenna-dependent fading constants.

use crate::error::{Error, Result};
use crate::fading::rho;

// --- unit conversions ---------------------------------------------------

/// Convert a power in dBm to watts: `10^((x − 30)/10)`.
pub fn dbm_to_watts(dbm: f64) -> Result<f64> {
    if !dbm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "power in dBm must be finite, got {dbm}"
        )));
    }
    Ok(10f64.powf((dbm - 30.0) / 10.0))
}

/// Convert a power in watts to dBm: `10·log10(w) + 30`.
pub fn watts_to_dbm(watts: f64) -> Result<f64> {
    if !(watts.is_finite() && watts > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power in watts must be finite and positive, got {watts}"
        )));
    }
    Ok(10.0 * watts.log10() + 30.0)
}

// --- link budget ----------------------------------------------------------

/// Radio parameters of the network, in the dB domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// UE transmit power, dBm.
    pub p_ue_dbm: f64,
    /// Small-cell transmit power, dBm.
    pub p_sc_dbm: f64,
    /// Macro-cell transmit power, dBm.
    pub p_mc_dbm: f64,
    /// System bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// Path loss at the 1 m reference distance including antenna gains, dB.
    pub l_ref_db: f64,
    /// Path-loss exponent; must exceed 2 for the small-cell expectation to
    /// be finite.
    pub beta: f64,
}

impl LinkBudget {
    /// Check the structural invariants: finite fields, positive bandwidth,
    /// path-loss exponent above 2.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_ue_dbm", self.p_ue_dbm),
            ("p_sc_dbm", self.p_sc_dbm),
            ("p_mc_dbm", self.p_mc_dbm),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("l_ref_db", self.l_ref_db),
            ("beta", self.beta),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {value}")));
            }
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(Error::Config(format!(
                "bandwidth_hz must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        if self.beta <= 2.0 {
            return Err(Error::Config(format!(
                "beta must exceed 2 (finite small-cell expectation), got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Total noise power over the system bandwidth, dBm:
    /// `noise_psd_dbm_hz + 10·log10(bandwidth_hz)`.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }

    /// SNR at the 1 m reference distance, linear:
    /// `P_UE / (σ² · L_ref) = 10^((p_ue_dbm − noise_power_dbm − l_ref_db)/10)`.
    ///
    /// Computed in the dB domain and converted once, which is numerically
    /// identical (within rounding) to the linear-domain quotient.
    pub fn gamma(&self) -> f64 {
        10f64.powf((self.p_ue_dbm - self.noise_power_dbm() - self.l_ref_db) / 10.0)
    }
}

// --- association policies -------------------------------------------------

/// The four uplink association policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PolicyKind {
    /// Always attach to the macro AP (α = 0).
    #[serde(rename = "macro")]
    MacroOnly,
    /// Always attach to the nearest small cell (α = +∞).
    #[serde(rename = "sc")]
    SmallCellOnly,
    /// Uplink chooses the AP with the smallest uplink path loss,
    /// independent of the downlink attachment.
    #[serde(rename = "decoupled")]
    Decoupled,
    /// Uplink follows the downlink attachment, which is driven by the
    /// downlink receive powers.
    #[serde(rename = "coupled")]
    Coupled,
}

impl PolicyKind {
    /// All policies in canonical (CSV/report) order.
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::MacroOnly,
        PolicyKind::SmallCellOnly,
        PolicyKind::Decoupled,
        PolicyKind::Coupled,
    ];

    /// The stable lower-case name used in config files and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::MacroOnly => "macro",
            PolicyKind::SmallCellOnly => "sc",
            PolicyKind::Decoupled => "decoupled",
            PolicyKind::Coupled => "coupled",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro" => Ok(PolicyKind::MacroOnly),
            "sc" => Ok(PolicyKind::SmallCellOnly),
            "decoupled" => Ok(PolicyKind::Decoupled),
            "coupled" => Ok(PolicyKind::Coupled),
            other => Err(Error::Config(format!(
                "unknown policy {other:?}; expected one of macro, sc, decoupled, coupled"
            ))),
        }
    }
}

/// An association policy together with the antenna counts that enter the
/// multi-antenna decision factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssociationPolicy {
    kind: PolicyKind,
    m_antennas: u32,
    n_antennas: u32,
}

impl AssociationPolicy {
    /// Build a policy; antenna counts must both be at least 1.
    pub fn new(kind: PolicyKind, m_antennas: u32, n_antennas: u32) -> Result<Self> {
        if m_antennas < 1 || n_antennas < 1 {
            return Err(Error::Config(format!(
                "antenna counts must be >= 1, got M = {m_antennas}, N = {n_antennas}"
            )));
        }
        Ok(AssociationPolicy {
            kind,
            m_antennas,
            n_antennas,
        })
    }

    /// Single-antenna shorthand (M = N = 1).
    pub fn single_antenna(kind: PolicyKind) -> Self {
        AssociationPolicy {
            kind,
            m_antennas: 1,
            n_antennas: 1,
        }
    }

    /// Which of the four policies this is.
    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Antenna count M at the macro AP.
    pub fn m_antennas(&self) -> u32 {
        self.m_antennas
    }

    /// Antenna count N at the small-cell APs.
    pub fn n_antennas(&self) -> u32 {
        self.n_antennas
    }
}

/// Unified decision factor α for a policy under a given link budget.
///
/// * macro-only → 0
/// * small-cell-only → +∞
/// * coupled → `(M·ρ(N)·P_SC / (N·ρ(M)·P_MC))^(1/β)` with linear powers
/// * decoupled → `(ρ(N)/ρ(M))^(1/β)`
///
/// With M = N = 1 the last two reduce to `(P_SC/P_MC)^(1/β)` and 1.
pub fn alpha_for_policy(policy: &AssociationPolicy, link: &LinkBudget) -> f64 {
    let m = policy.m_antennas();
    let n = policy.n_antennas();
    match policy.kind() {
        PolicyKind::MacroOnly => 0.0,
        PolicyKind::SmallCellOnly => f64::INFINITY,
        PolicyKind::Decoupled => {
            let rho_m = rho(m).expect("antenna count validated at construction");
            let rho_n = rho(n).expect("antenna count validated at construction");
            (rho_n / rho_m).powf(1.0 / link.beta)
        }
        PolicyKind::Coupled => {
            let rho_m = rho(m).expect("antenna count validated at construction");
            let rho_n = rho(n).expect("antenna count validated at construction");
            let p_sc_w = dbm_to_watts(link.p_sc_dbm).expect("validated link budget");
            let p_mc_w = dbm_to_watts(link.p_mc_dbm).expect("validated link budget");
            ((m as f64 * rho_n * p_sc_w) / (n as f64 * rho_m * p_mc_w)).powf(1.0 / link.beta)
        }
    }
}

// --- scenario ---------------------------------------------------------------

/// Full input to any bound or simulation: link budget, policy, small-cell
/// density, and macro distance, plus the derived linear quantities.
///
/// Immutable after construction; the dB→linear conversion and the fading
/// constants are computed here exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    link: LinkBudget,
    policy: AssociationPolicy,
    lambda_sc: f64,
    d0_m: f64,
    // Derived, cached at construction.
    gamma: f64,
    alpha: f64,
    rho_m: f64,
    rho_n: f64,
}

impl Scenario {
    /// Validate all invariants and precompute γ, α, ρ(M), ρ(N).
    ///
    /// `lambda_sc` must be positive unless the policy is macro-only (which
    /// never uses it); `d0_m` must be positive unless the policy is
    /// small-cell-only (which never uses it).
    pub fn new(
        link: LinkBudget,
        policy: AssociationPolicy,
        lambda_sc: f64,
        d0_m: f64,
    ) -> Result<Self> {
        link.validate()?;
        if !lambda_sc.is_finite() || lambda_sc < 0.0 {
            return Err(Error::Config(format!(
                "lambda_sc must be finite and nonnegative, got {lambda_sc}"
            )));
        }
        if lambda_sc == 0.0 && policy.kind() != PolicyKind::MacroOnly {
            return Err(Error::Config(format!(
                "lambda_sc must be positive for policy {}",
                policy.kind()
            )));
        }
        if !d0_m.is_finite() || d0_m < 0.0 {
            return Err(Error::Config(format!(
                "d0_m must be finite and nonnegative, got {d0_m}"
            )));
        }
        if d0_m == 0.0 && policy.kind() != PolicyKind::SmallCellOnly {
            return Err(Error::Config(format!(
                "d0_m must be positive for policy {}",
                policy.kind()
            )));
        }
        let gamma = link.gamma();
        let alpha = alpha_for_policy(&policy, &link);
        let rho_m = rho(policy.m_antennas())?;
        let rho_n = rho(policy.n_antennas())?;
        Ok(Scenario {
            link,
            policy,
            lambda_sc,
            d0_m,
            gamma,
            alpha,
            rho_m,
            rho_n,
        })
    }

    /// Same scenario at a different small-cell density.
    pub fn with_lambda(&self, lambda_sc: f64) -> Result<Self> {
        Scenario::new(self.link, self.policy, lambda_sc, self.d0_m)
    }

    /// Same scenario at a different macro distance.
    pub fn with_d0(&self, d0_m: f64) -> Result<Self> {
        Scenario::new(self.link, self.policy, self.lambda_sc, d0_m)
    }

    /// Same geometry and link budget under a different association policy.
    pub fn with_policy(&self, policy: AssociationPolicy) -> Result<Self> {
        Scenario::new(self.link, policy, self.lambda_sc, self.d0_m)
    }

    /// The dB-domain link budget this scenario was built from.
    pub fn link(&self) -> &LinkBudget {
        &self.link
    }

    /// The association policy.
    pub fn policy(&self) -> &AssociationPolicy {
        &self.policy
    }

    /// Small-cell spatial density, SC/m².
    pub fn lambda_sc(&self) -> f64 {
        self.lambda_sc
    }

    /// Distance from the reference user to the macro AP, meters.
    pub fn d0_m(&self) -> f64 {
        self.d0_m
    }

    /// SNR at the 1 m reference distance, linear.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Unified association decision factor α (0 and +∞ are first-class).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ρ(M) for the macro link.
    pub fn rho_m(&self) -> f64 {
        self.rho_m
    }

    /// ρ(N) for the small-cell link.
    pub fn rho_n(&self) -> f64 {
        self.rho_n
    }

    /// Path-loss exponent β (copied out of the link budget for brevity).
    pub fn beta(&self) -> f64 {
        self.link.beta
    }
}
