//! Ergodic uplink rate bounds, exact simulation, and density planning for
//! a two-tier cellular network with decoupled uplink/downlink association.
//!
//! The model: a user sits at a known distance `d0` from its macro AP
//! inside a Poisson field of small cells with density λ; all links are
//! Rayleigh-faded with path-loss exponent β and interference-free. The
//! user's uplink attaches to the nearest small cell when that cell is
//! closer than `α·d0`, where the decision factor α encodes the
//! association policy — always-macro (α = 0), always-small-cell
//! (α = +∞), decoupled (uplink picks its own best AP), or coupled
//! (uplink follows the downlink attachment).
//!
//! What the crate provides, by module:
//! * [`link_budget`] — dB-domain radio parameters, the reference SNR γ,
//!   and the policy → α mapping.
//! * [`fading`] — the log-fading constants ρ(n) = exp(E[ln ‖h‖²]).
//! * [`bounds`] — closed-form Jensen lower bounds on the ergodic rate,
//!   exact and in a saturating approximation, decomposed into
//!   inspectable parts.
//! * [`monte_carlo`] — a reproducible, parallel, exact simulator the
//!   bounds are validated against.
//! * [`planner`] — inversion of the bound: the minimum density λ meeting
//!   a rate target at a given distance.
//! * [`sweep`] — grid experiments over `d0` or λ with CSV output.
//! * [`config`] — flat JSON configuration parsing.
//! * [`selftest`] — a reduced invariant suite runnable in the field.
//!
//! All rates are in nats per channel use unless a conversion from
//! [`planner::rate_to_target_units`] says otherwise.

pub mod bounds;
pub mod config;
pub mod error;
pub mod fading;
pub mod link_budget;
pub mod monte_carlo;
mod numeric;
pub mod planner;
pub mod selftest;
pub mod sweep;

pub use bounds::{bound_general, bound_general_approx, BoundBreakdown};
pub use error::{Error, Result};
pub use link_budget::{AssociationPolicy, LinkBudget, PolicyKind, Scenario};
pub use monte_carlo::{simulate_ergodic_rate, McConfig, McEstimate, SamplingMode};
pub use planner::{plan_min_density, PlanRequest, PlanResult};
pub use sweep::{run_sweep, SweepRow, SweepSpec};
