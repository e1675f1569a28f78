//! Market models for an entrant network service provider whose quality of
//! service degrades with its own subscriber count.
//!
//! The crate covers the whole decision chain of the entrant:
//!
//! - [`valuation`] and [`qos`]: the users' valuation law and the QoS curves.
//! - [`monopoly`]: subscription dynamics with no incumbent, their unique
//!   equilibrium and the contraction-style convergence conditions.
//! - [`monopoly_revenue`]: revenue-optimal pricing through the marginal user.
//! - [`duopoly`]: two-provider dynamics and the equilibrium solver.
//! - [`competition`]: Cournot market-share competition and best-response
//!   dynamics.
//! - [`selection`]: entry and technology choice under per-period costs.
//!
//! Every solver is a pure function of immutable inputs.

pub mod competition;
pub mod duopoly;
mod error;
pub mod monopoly;
pub mod monopoly_revenue;
pub(crate) mod numeric;
pub mod qos;
pub mod selection;
pub mod valuation;

pub use competition::{
    best_response, best_response_closed, inverse_demand, marginal_valuations, nash_iterate,
    nash_solve, nash_solve_multistart, revenues, supermodularity_check, BestResponseRun,
    CournotGame, MultiStartReport, NashOutcome, Player, SupermodularityReport,
};
pub use duopoly::{
    bertrand_revenues, convergence_condition_duopoly, equilibrium_duopoly, simulate_duopoly,
    step_duopoly, DuopolyEquilibrium, DuopolyMarket, Regime,
};
pub use error::{Error, Result};
pub use monopoly::{
    convergence_condition, convergence_condition_linear, convergence_condition_partial,
    convergence_condition_positive_ext, equilibrium, equilibrium_closed_form, simulate,
    step_variant, switching_cost_equilibrium_band, Condition, DynamicsTrace, MonopolyMarket,
    MonopolyVariant, ThresholdBand,
};
pub use monopoly_revenue::{
    optimize, optimum_bounds, optimum_closed_form, price_from_marginal, revenue_at_price,
    revenue_curve, Bound, OptimumBounds, RevenueOptimum,
};
pub use qos::{average_throughput, fit_affine, AffineFit, QosModel, Technology, NOT_ENTER};
pub use selection::{
    decision_map, select, technology_profit, technology_revenue, DecisionMap, MarketMode,
    Selection, SelectionProblem,
};
pub use valuation::ValuationDistribution;

/// Default iteration cap for subscription dynamics.
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Default step-change tolerance for subscription dynamics.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default round cap for best-response dynamics.
pub const DEFAULT_MAX_ROUNDS: usize = 1_000;
