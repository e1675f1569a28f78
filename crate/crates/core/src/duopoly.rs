//! Incumbent with constant QoS `q1` against the entrant with QoS `g(λ2)`.

use crate::monopoly::{iterate, Condition, DynamicsTrace};
use crate::numeric;
use crate::qos::{check_share, max_over_shares, QosModel};
use crate::valuation::ValuationDistribution;
use crate::{Error, Result};

const EQ_FTOL: f64 = 1e-12;
const FEASIBLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DuopolyMarket {
    pub dist: ValuationDistribution,
    pub q1: f64,
    pub qos2: QosModel,
    pub p1: f64,
    pub p2: f64,
}

/// Checks `0 < g(λ) < q1` on `[0, 1]`; `g` is non-increasing so `g(0)` decides.
pub(crate) fn check_incumbent(q1: f64, qos2: &QosModel) -> Result<()> {
    if !(q1.is_finite() && q1 > 0.0) {
        return Err(Error::model(format!("incumbent QoS must be positive, got {q1}")));
    }
    if qos2.peak() >= q1 {
        return Err(Error::model(format!(
            "entrant QoS g(0) = {} must stay below the incumbent's q1 = {q1}",
            qos2.peak()
        )));
    }
    Ok(())
}

pub(crate) fn check_pair(l1: f64, l2: f64) -> Result<()> {
    if l1 >= 0.0 && l2 >= 0.0 && l1 + l2 <= 1.0 + FEASIBLE_SLACK {
        Ok(())
    } else {
        Err(Error::domain(format!("({l1}, {l2}) is not a feasible pair of market shares")))
    }
}

impl DuopolyMarket {
    pub fn new(dist: ValuationDistribution, q1: f64, qos2: QosModel, p1: f64, p2: f64) -> Result<Self> {
        check_incumbent(q1, &qos2)?;
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::domain(format!("{name} must be non-negative, got {p}")));
            }
        }
        Ok(Self { dist, q1, qos2, p1, p2 })
    }

    /// Marginal valuations `(θ1, θ2)` at entrant share `λ2`, or `None` when
    /// the entrant is priced out (`p1/q1 ≤ p2/g(λ2)`).
    fn thetas(&self, lambda2: f64) -> Option<(f64, f64)> {
        let g = self.qos2.value(lambda2);
        if self.p1 / self.q1 > self.p2 / g {
            Some(((self.p1 - self.p2) / (self.q1 - g), self.p2 / g))
        } else {
            None
        }
    }

    fn step_unchecked(&self, lambda2: f64) -> (f64, f64) {
        let f = |x: f64| self.dist.cdf(x);
        match self.thetas(lambda2) {
            Some((t1, t2)) => (1.0 - f(t1), (f(t1) - f(t2)).max(0.0)),
            None => (1.0 - f(self.p1 / self.q1), 0.0),
        }
    }

    /// The entrant's share update `h_{d,2}(λ2)`; it does not depend on `λ1`.
    pub fn h2(&self, lambda2: f64) -> Result<f64> {
        check_share(lambda2)?;
        Ok(self.step_unchecked(lambda2).1)
    }
}

/// One period of the two-provider dynamics.
pub fn step_duopoly(mkt: &DuopolyMarket, lambda1_prev: f64, lambda2_prev: f64) -> Result<(f64, f64)> {
    check_pair(lambda1_prev, lambda2_prev)?;
    Ok(mkt.step_unchecked(lambda2_prev.min(1.0)))
}

pub fn simulate_duopoly(
    mkt: &DuopolyMarket,
    start: (f64, f64),
    max_iter: usize,
    tol: f64,
) -> Result<DynamicsTrace<(f64, f64)>> {
    check_pair(start.0, start.1)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(iterate(
        start,
        max_iter,
        tol,
        |(_, l2)| mkt.step_unchecked(l2.min(1.0)),
        |a, b| (a.0 - b.0).abs().max((a.1 - b.1).abs()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    EntrantShutOut,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuopolyEquilibrium {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `(θ1, θ2)` in the interior regime.
    pub theta: Option<(f64, f64)>,
    pub regime: Regime,
}

/// The unique equilibrium, via the entrant's one-dimensional fixed point.
pub fn equilibrium_duopoly(mkt: &DuopolyMarket) -> DuopolyEquilibrium {
    let shut_out = mkt.p1 / mkt.q1 <= mkt.p2 / mkt.qos2.peak();
    if shut_out {
        return DuopolyEquilibrium {
            lambda1: 1.0 - mkt.dist.cdf(mkt.p1 / mkt.q1),
            lambda2: 0.0,
            theta: None,
            regime: Regime::EntrantShutOut,
        };
    }
    let l2 = numeric::bisect_decreasing(|l| mkt.step_unchecked(l).1 - l, 0.0, 1.0, EQ_FTOL);
    let theta = mkt.thetas(l2);
    let lambda1 = match theta {
        Some((t1, _)) => 1.0 - mkt.dist.cdf(t1),
        None => 1.0 - mkt.dist.cdf(mkt.p1 / mkt.q1),
    };
    DuopolyEquilibrium { lambda1, lambda2: l2, theta, regime: Regime::Interior }
}

/// `max [−g'/g]·[q1/(q1 − g)] < 1/K`: the two-provider dynamics converge
/// from any feasible start.
pub fn convergence_condition_duopoly(dist: &ValuationDistribution, q1: f64, qos2: &QosModel) -> Result<Condition> {
    check_incumbent(q1, qos2)?;
    let lhs = match qos2 {
        QosModel::Constant { .. } => 0.0,
        _ => max_over_shares(|l| {
            let g = qos2.value(l);
            -qos2.slope(l) / g * q1 / (q1 - g)
        }),
    };
    Ok(Condition::new(lhs, 1.0 / dist.k_constant()))
}

/// Per-period revenues `(p1·λ1*, p2·λ2*)` at the equilibrium.
pub fn bertrand_revenues(mkt: &DuopolyMarket) -> (f64, f64) {
    let eq = equilibrium_duopoly(mkt);
    (mkt.p1 * eq.lambda1, mkt.p2 * eq.lambda2)
}
