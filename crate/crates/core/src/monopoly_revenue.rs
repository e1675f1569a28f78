//! Revenue-optimal pricing for the entrant without an incumbent.
//!
//! Price, marginal valuation and market share are interchangeable choice
//! variables: `p = α·g(λ)` with `λ = 1 − F(α)`. The optimizer works in the
//! share, whose domain `[0, 1]` is fixed.

use crate::monopoly::{equilibrium, MonopolyMarket};
use crate::numeric;
use crate::qos::QosModel;
use crate::valuation::ValuationDistribution;
use crate::{Error, Result};

const SCAN_POINTS: usize = 2_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueOptimum {
    pub price: f64,
    pub marginal_valuation: f64,
    pub share: f64,
    pub revenue: f64,
}

/// `p · λ*(p)`.
pub fn revenue_at_price(dist: &ValuationDistribution, qos: &QosModel, price: f64) -> Result<f64> {
    let mkt = MonopolyMarket::new(dist.clone(), qos.clone(), price)?;
    Ok(price * equilibrium(&mkt))
}

/// Price at which the user with valuation `alpha` is marginal.
pub fn price_from_marginal(dist: &ValuationDistribution, qos: &QosModel, alpha: f64) -> Result<f64> {
    if !(0.0..=dist.beta()).contains(&alpha) {
        return Err(Error::domain(format!("marginal valuation {alpha} outside [0, {}]", dist.beta())));
    }
    Ok(alpha * qos.value(1.0 - dist.cdf(alpha)))
}

fn price_at_share(dist: &ValuationDistribution, qos: &QosModel, share: f64) -> f64 {
    dist.quantile_unchecked(1.0 - share) * qos.value(share)
}

/// Maximizes `F⁻¹(1 − λ)·g(λ)·λ` over `λ ∈ [0, 1]`.
pub fn optimize(dist: &ValuationDistribution, qos: &QosModel) -> RevenueOptimum {
    let (share, _) = numeric::maximize(|l| price_at_share(dist, qos, l) * l, 0.0, 1.0, SCAN_POINTS);
    let marginal_valuation = dist.quantile_unchecked(1.0 - share);
    let price = marginal_valuation * qos.value(share);
    RevenueOptimum { price, marginal_valuation, share, revenue: price * share }
}

/// Exact optimum for uniform valuations on `[0, beta]` and
/// `g(λ) = q_bar − c·λ`.
pub fn optimum_closed_form(beta: f64, q_bar: f64, c: f64) -> Result<RevenueOptimum> {
    ValuationDistribution::uniform(beta).map_err(|e| Error::model(e.to_string()))?;
    QosModel::linear(q_bar, c)?;
    let share = q_bar / (c + q_bar + (q_bar * q_bar + c * c - c * q_bar).sqrt());
    let marginal_valuation = beta * (1.0 - share);
    let price = marginal_valuation * (q_bar - c * share);
    Ok(RevenueOptimum { price, marginal_valuation, share, revenue: price * share })
}

/// Interval with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Bound {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

/// Where the revenue optimum must lie when the density is non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumBounds {
    pub price: Bound,
    pub marginal_valuation: Bound,
    pub share: Bound,
    /// Uniform valuations with `−g'/g < 1` everywhere: the upper price and
    /// valuation ends and the lower share end are tightened.
    pub tightened: bool,
}

impl OptimumBounds {
    pub fn contains(&self, opt: &RevenueOptimum) -> bool {
        self.price.contains(opt.price)
            && self.marginal_valuation.contains(opt.marginal_valuation)
            && self.share.contains(opt.share)
    }
}

pub fn optimum_bounds(dist: &ValuationDistribution, qos: &QosModel) -> Result<OptimumBounds> {
    if !dist.is_nonincreasing_pdf() {
        return Err(Error::model("revenue bounds need a non-increasing density"));
    }
    let beta = dist.beta();
    let median = dist.quantile_unchecked(0.5);
    let mut b = OptimumBounds {
        price: Bound { lo: median * qos.value(0.5), hi: beta * qos.peak(), lo_closed: true, hi_closed: false },
        marginal_valuation: Bound { lo: median, hi: beta, lo_closed: true, hi_closed: false },
        share: Bound { lo: 0.0, hi: 0.5, lo_closed: false, hi_closed: true },
        tightened: false,
    };
    if dist.is_uniform() && qos.max_relative_decay() < 1.0 {
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let low_share = 0.5 * (3.0 - 5f64.sqrt());
        b.price.hi = golden * beta * qos.value(low_share);
        b.marginal_valuation.hi = golden * beta;
        b.share.lo = low_share;
        b.tightened = true;
    }
    Ok(b)
}

/// `(λ, price, revenue)` on an `n`-point grid over `[0, 1]`.
pub fn revenue_curve(dist: &ValuationDistribution, qos: &QosModel, n: usize) -> Result<Vec<(f64, f64, f64)>> {
    if n < 2 {
        return Err(Error::domain("a revenue curve needs at least two points"));
    }
    Ok(numeric::grid(0.0, 1.0, n)
        .map(|l| {
            let p = price_at_share(dist, qos, l);
            (l, p, p * l)
        })
        .collect())
}
