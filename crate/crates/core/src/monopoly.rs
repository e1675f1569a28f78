//! The entrant-only market: subscription dynamics, the equilibrium and
//! sufficient conditions for global convergence.

use crate::numeric;
use crate::qos::{check_share, QosModel};
use crate::valuation::ValuationDistribution;
use crate::{Error, Result};

const EQ_FTOL: f64 = 1e-12;
const BAND_XTOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct MonopolyMarket {
    pub dist: ValuationDistribution,
    pub qos: QosModel,
    pub price: f64,
}

impl MonopolyMarket {
    pub fn new(dist: ValuationDistribution, qos: QosModel, price: f64) -> Result<Self> {
        if !(price.is_finite() && price >= 0.0) {
            return Err(Error::domain(format!("price must be non-negative, got {price}")));
        }
        Ok(Self { dist, qos, price })
    }

    pub fn with_price(&self, price: f64) -> Result<Self> {
        Self::new(self.dist.clone(), self.qos.clone(), price)
    }

    /// One period of the synchronous update, `h_m(λ) = 1 − F(p / g(λ))`.
    pub fn step(&self, lambda_prev: f64) -> Result<f64> {
        check_share(lambda_prev)?;
        Ok(self.h(lambda_prev))
    }

    pub(crate) fn h(&self, lambda: f64) -> f64 {
        if self.price == 0.0 {
            return 1.0;
        }
        let t = self.price / self.qos.value(lambda);
        if t >= self.dist.beta() {
            0.0
        } else {
            1.0 - self.dist.cdf(t)
        }
    }

    /// Highest price at which anyone subscribes, `β·g(0)`.
    pub fn max_price(&self) -> f64 {
        self.dist.beta() * self.qos.peak()
    }
}

/// Alternative update rules for the monopoly market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonopolyVariant {
    Synchronous,
    /// Only a fraction `epsilon` of users revisit their decision each period.
    Partial { epsilon: f64 },
    /// Joining or leaving costs `c_s`. The state is the valuation threshold
    /// of the subscriber set rather than the share.
    SwitchingCost { c_s: f64 },
    /// Utility `α·q_bar − δ·λ + φ·λ^γ − p`; the market's QoS model is unused.
    PositiveExternality { q_bar: f64, delta: f64, phi: f64, gamma: f64 },
}

impl MonopolyVariant {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MonopolyVariant::Synchronous => Ok(()),
            MonopolyVariant::Partial { epsilon } => {
                if epsilon > 0.0 && epsilon <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("epsilon must lie in (0, 1], got {epsilon}")))
                }
            }
            MonopolyVariant::SwitchingCost { c_s } => {
                if c_s.is_finite() && c_s >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("switching cost must be non-negative, got {c_s}")))
                }
            }
            MonopolyVariant::PositiveExternality { q_bar, delta, phi, gamma } => {
                let ok = q_bar.is_finite()
                    && q_bar > 0.0
                    && delta.is_finite()
                    && delta >= 0.0
                    && phi.is_finite()
                    && phi >= 0.0
                    && gamma.is_finite()
                    && gamma > 0.0;
                if ok {
                    Ok(())
                } else {
                    Err(Error::domain("externality parameters need q_bar > 0, delta >= 0, phi >= 0, gamma > 0"))
                }
            }
        }
    }

    fn uses_threshold(&self) -> bool {
        matches!(self, MonopolyVariant::SwitchingCost { .. })
    }
}

/// Switching-cost thresholds `t_s` (stay) and `t_j` (join) at threshold `a`.
fn switching_thresholds(mkt: &MonopolyMarket, c_s: f64, a: f64) -> (f64, f64) {
    let g = mkt.qos.value(1.0 - mkt.dist.cdf(a));
    ((mkt.price - c_s) / g, (mkt.price + c_s) / g)
}

/// One period of `variant`. `state` is a share in `[0, 1]`, except for
/// [`MonopolyVariant::SwitchingCost`] where it is a threshold in `[0, β]`.
pub fn step_variant(mkt: &MonopolyMarket, variant: &MonopolyVariant, state: f64) -> Result<f64> {
    variant.validate()?;
    if variant.uses_threshold() {
        if !(0.0..=mkt.dist.beta()).contains(&state) {
            return Err(Error::domain(format!("threshold {state} outside [0, {}]", mkt.dist.beta())));
        }
    } else {
        check_share(state)?;
    }
    Ok(step_unchecked(mkt, variant, state))
}

fn step_unchecked(mkt: &MonopolyMarket, variant: &MonopolyVariant, x: f64) -> f64 {
    match *variant {
        MonopolyVariant::Synchronous => mkt.h(x),
        MonopolyVariant::Partial { epsilon } => (1.0 - epsilon) * x + epsilon * mkt.h(x),
        MonopolyVariant::SwitchingCost { c_s } => {
            let (t_s, t_j) = switching_thresholds(mkt, c_s, x);
            if t_j <= x {
                t_j
            } else if t_s <= x {
                x
            } else {
                t_s.min(mkt.dist.beta())
            }
        }
        MonopolyVariant::PositiveExternality { q_bar, delta, phi, gamma } => {
            let t = (mkt.price + delta * x - phi * x.powf(gamma)) / q_bar;
            1.0 - mkt.dist.cdf(t.max(0.0))
        }
    }
}

/// Time series produced by iterating a subscription map.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace<S> {
    /// `states[0]` is the initial point.
    pub states: Vec<S>,
    pub converged: bool,
    /// Number of recorded transitions.
    pub iterations: usize,
    /// Size of the last computed step change.
    pub residual: f64,
}

impl<S: Copy> DynamicsTrace<S> {
    pub fn last(&self) -> S {
        *self.states.last().expect("trace holds its initial state")
    }
}

/// Iterates `step` until a step would move the state by less than `tol`
/// (that final step is not recorded) or `max_iter` transitions are recorded.
pub(crate) fn iterate<S: Copy>(
    x0: S,
    max_iter: usize,
    tol: f64,
    step: impl Fn(S) -> S,
    dist: impl Fn(S, S) -> f64,
) -> DynamicsTrace<S> {
    let mut states = vec![x0];
    let mut x = x0;
    let (converged, residual) = loop {
        let next = step(x);
        let residual = dist(next, x);
        if residual < tol {
            break (true, residual);
        }
        if states.len() > max_iter {
            break (false, residual);
        }
        states.push(next);
        x = next;
    };
    DynamicsTrace { iterations: states.len() - 1, states, converged, residual }
}

/// Simulates the market shares from `lambda0`. Non-convergence is reported
/// through the trace, not as an error.
pub fn simulate(
    mkt: &MonopolyMarket,
    variant: &MonopolyVariant,
    lambda0: f64,
    max_iter: usize,
    tol: f64,
) -> Result<DynamicsTrace<f64>> {
    variant.validate()?;
    check_share(lambda0)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if !variant.uses_threshold() {
        return Ok(iterate(lambda0, max_iter, tol, |x| step_unchecked(mkt, variant, x), |a, b| (a - b).abs()));
    }
    // Track the threshold exactly and report shares.
    let a0 = mkt.dist.quantile_unchecked(1.0 - lambda0);
    let share = |a: f64| if a == a0 { lambda0 } else { 1.0 - mkt.dist.cdf(a) };
    let tr = iterate(a0, max_iter, tol, |a| step_unchecked(mkt, variant, a), |a, b| (share(a) - share(b)).abs());
    Ok(DynamicsTrace {
        states: tr.states.into_iter().map(share).collect(),
        converged: tr.converged,
        iterations: tr.iterations,
        residual: tr.residual,
    })
}

/// The unique fixed point of the synchronous map, by bisection on
/// `h_m(λ) − λ`.
pub fn equilibrium(mkt: &MonopolyMarket) -> f64 {
    if mkt.price == 0.0 {
        return 1.0;
    }
    if mkt.price >= mkt.max_price() {
        return 0.0;
    }
    numeric::bisect_decreasing(|l| mkt.h(l) - l, 0.0, 1.0, EQ_FTOL)
}

/// Closed-form equilibrium for uniform valuations and linear (or constant)
/// QoS.
pub fn equilibrium_closed_form(dist: &ValuationDistribution, qos: &QosModel, price: f64) -> Result<f64> {
    if !dist.is_uniform() {
        return Err(Error::model("closed-form equilibrium needs uniform valuations"));
    }
    let (q_bar, c) = linear_coefficients(qos)?;
    if !(price.is_finite() && price >= 0.0) {
        return Err(Error::domain(format!("price must be non-negative, got {price}")));
    }
    let beta = dist.beta();
    if price >= beta * q_bar {
        return Ok(0.0);
    }
    let d = (q_bar - c).powi(2) + 4.0 * c * price / beta;
    Ok((2.0 * (q_bar - price / beta) / (q_bar + c + d.sqrt())).min(1.0))
}

pub(crate) fn linear_coefficients(qos: &QosModel) -> Result<(f64, f64)> {
    match *qos {
        QosModel::Linear { q_bar, c } => Ok((q_bar, c)),
        QosModel::Constant { q } => Ok((q, 0.0)),
        QosModel::Tabulated { .. } => Err(Error::model("closed form needs a linear or constant QoS model")),
    }
}

/// Outcome of a sufficient-condition check: `holds` iff `lhs < rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl Condition {
    pub(crate) fn new(lhs: f64, rhs: f64) -> Self {
        Self { holds: lhs < rhs, lhs, rhs }
    }
}

/// `max −g'/g < 1/K`: the synchronous dynamics converge from any start.
pub fn convergence_condition(dist: &ValuationDistribution, qos: &QosModel) -> Condition {
    Condition::new(qos.max_relative_decay(), 1.0 / dist.k_constant())
}

/// The equivalent linear-QoS form `c/q_bar < 1/(1 + K)`; `None` for
/// tabulated QoS.
pub fn convergence_condition_linear(dist: &ValuationDistribution, qos: &QosModel) -> Option<Condition> {
    let (q_bar, c) = linear_coefficients(qos).ok()?;
    Some(Condition::new(c / q_bar, 1.0 / (1.0 + dist.k_constant())))
}

/// Condition for the partial-updating dynamics: `max −g'/g < 1/(εK)`.
pub fn convergence_condition_partial(dist: &ValuationDistribution, qos: &QosModel, epsilon: f64) -> Result<Condition> {
    MonopolyVariant::Partial { epsilon }.validate()?;
    Ok(Condition::new(qos.max_relative_decay(), 1.0 / (epsilon * dist.k_constant())))
}

/// Condition for the positive-externality dynamics:
/// `max f · (φγ + δ) / q_bar < 1`, valid for `γ ≥ 1`.
pub fn convergence_condition_positive_ext(
    dist: &ValuationDistribution,
    q_bar: f64,
    delta: f64,
    phi: f64,
    gamma: f64,
) -> Result<Condition> {
    MonopolyVariant::PositiveExternality { q_bar, delta, phi, gamma }.validate()?;
    if gamma < 1.0 {
        return Err(Error::domain(format!("the externality condition needs gamma >= 1, got {gamma}")));
    }
    Ok(Condition::new(dist.max_pdf() * (phi * gamma + delta) / q_bar, 1.0))
}

/// Closed interval of subscriber thresholds `[lo, hi] ⊂ [0, β]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBand {
    pub lo: f64,
    pub hi: f64,
}

impl ThresholdBand {
    pub fn contains(&self, a: f64) -> bool {
        self.lo <= a && a <= self.hi
    }

    /// Corresponding market shares `(min, max)`.
    pub fn share_range(&self, dist: &ValuationDistribution) -> (f64, f64) {
        (1.0 - dist.cdf(self.hi), 1.0 - dist.cdf(self.lo))
    }
}

/// All thresholds left unchanged by the switching-cost dynamics.
pub fn switching_cost_equilibrium_band(mkt: &MonopolyMarket, c_s: f64) -> Result<ThresholdBand> {
    MonopolyVariant::SwitchingCost { c_s }.validate()?;
    let beta = mkt.dist.beta();
    let t_s = |a: f64| switching_thresholds(mkt, c_s, a).0;
    let t_j = |a: f64| switching_thresholds(mkt, c_s, a).1;
    // a − t_s(a) is increasing and t_j(a) − a decreasing in a.
    if t_s(beta) > beta {
        return Ok(ThresholdBand { lo: beta, hi: beta });
    }
    let lo = if t_s(0.0) <= 0.0 { 0.0 } else { numeric::bisect_predicate(|a| a < t_s(a), 0.0, beta, BAND_XTOL).1 };
    let hi = if t_j(beta) >= beta { beta } else { numeric::bisect_predicate(|a| a <= t_j(a), 0.0, beta, BAND_XTOL).0 };
    if lo > hi {
        let mid = 0.5 * (lo + hi);
        return Ok(ThresholdBand { lo: mid, hi: mid });
    }
    Ok(ThresholdBand { lo, hi })
}
