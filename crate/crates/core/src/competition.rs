//! Cournot competition in market shares between the incumbent (player 1,
//! constant QoS `q1`) and the entrant (player 2, QoS `g(λ2)`).
//!
//! Prices clear the market through the two marginal users
//! `z1 = F⁻¹(1 − λ1)` and `z2 = F⁻¹(1 − λ1 − λ2)`:
//! `p1 = z1·(q1 − g) + z2·g` and `p2 = z2·g`.

use crate::duopoly::{check_incumbent, check_pair};
use crate::numeric;
use crate::qos::{QosModel, LAMBDA_GRID};
use crate::valuation::ValuationDistribution;
use crate::{Error, Result, DEFAULT_MAX_ROUNDS, DEFAULT_TOL};

const SCAN_POINTS: usize = 2_001;
const GENERAL_GRID: usize = 101;
const NE_IMPROVEMENT_TOL: f64 = 1e-8;
const AGREEMENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct CournotGame {
    pub dist: ValuationDistribution,
    pub q1: f64,
    pub qos2: QosModel,
}

impl CournotGame {
    pub fn new(dist: ValuationDistribution, q1: f64, qos2: QosModel) -> Result<Self> {
        check_incumbent(q1, &qos2)?;
        Ok(Self { dist, q1, qos2 })
    }

    /// `Some((q_bar, c))` when the closed-form best responses apply.
    fn closed_form_params(&self) -> Option<(f64, f64)> {
        match (self.dist.is_uniform(), &self.qos2) {
            (true, &QosModel::Linear { q_bar, c }) if c > 0.0 => Some((q_bar, c)),
            _ => None,
        }
    }

    fn prices_unchecked(&self, l1: f64, l2: f64) -> (f64, f64) {
        let z1 = self.dist.quantile_unchecked(1.0 - l1);
        let z2 = self.dist.quantile_unchecked(1.0 - l1 - l2);
        let g = self.qos2.value(l2.min(1.0));
        (z1 * (self.q1 - g) + z2 * g, z2 * g)
    }

    fn revenue_of(&self, player: Player, l1: f64, l2: f64) -> f64 {
        let (r1, r2) = revenues(self, l1, l2);
        match player {
            Player::Incumbent => r1,
            Player::Entrant => r2,
        }
    }

    fn require_nonincreasing(&self) -> Result<()> {
        if self.dist.is_nonincreasing_pdf() {
            Ok(())
        } else {
            Err(Error::model("Cournot solvers need a non-increasing valuation density"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    /// Player 1, constant QoS.
    Incumbent,
    /// Player 2, congestion-degraded QoS.
    Entrant,
}

/// `(F⁻¹(1 − λ1), F⁻¹(1 − λ1 − λ2))`.
pub fn marginal_valuations(dist: &ValuationDistribution, lambda1: f64, lambda2: f64) -> Result<(f64, f64)> {
    check_pair(lambda1, lambda2)?;
    Ok((dist.quantile_unchecked(1.0 - lambda1), dist.quantile_unchecked(1.0 - lambda1 - lambda2)))
}

/// Market-clearing prices `(p1, p2)` that realize the shares `(λ1, λ2)`.
pub fn inverse_demand(game: &CournotGame, lambda1: f64, lambda2: f64) -> Result<(f64, f64)> {
    check_pair(lambda1, lambda2)?;
    Ok(game.prices_unchecked(lambda1, lambda2))
}

/// `(λ1·p1, λ2·p2)`; zero for infeasible pairs.
pub fn revenues(game: &CournotGame, lambda1: f64, lambda2: f64) -> (f64, f64) {
    if check_pair(lambda1, lambda2).is_err() {
        return (0.0, 0.0);
    }
    let (p1, p2) = game.prices_unchecked(lambda1, lambda2);
    (lambda1 * p1, lambda2 * p2)
}

/// Revenue-maximizing share in `[0, 1/2]` against `lambda_other`.
pub fn best_response(game: &CournotGame, player: Player, lambda_other: f64) -> Result<f64> {
    game.require_nonincreasing()?;
    if !(0.0..1.0).contains(&lambda_other) {
        return Err(Error::domain(format!("opponent share {lambda_other} outside [0, 1)")));
    }
    Ok(best_response_unchecked(game, player, lambda_other).0)
}

fn best_response_unchecked(game: &CournotGame, player: Player, other: f64) -> (f64, f64) {
    let objective = |l: f64| match player {
        Player::Incumbent => game.revenue_of(player, l, other),
        Player::Entrant => game.revenue_of(player, other, l),
    };
    let (l, r) = numeric::maximize(objective, 0.0, 0.5, SCAN_POINTS);
    debug_assert!(l > 0.0 && l <= 0.5, "best response {l} outside (0, 1/2]");
    (l, r)
}

/// Closed-form best responses for uniform valuations and
/// `g(λ2) = q_bar − c·λ2`.
pub fn best_response_closed(q1: f64, q_bar: f64, c: f64, player: Player, lambda_other: f64) -> Result<f64> {
    if !(c > 0.0 && c < q_bar && q_bar < q1 && q1.is_finite()) {
        return Err(Error::model(format!("closed-form best responses need 0 < c < q_bar < q1, got c={c}, q_bar={q_bar}, q1={q1}")));
    }
    if !(0.0..=1.0).contains(&lambda_other) {
        return Err(Error::domain(format!("opponent share {lambda_other} outside [0, 1]")));
    }
    Ok(closed_unchecked(q1, q_bar, c, player, lambda_other))
}

fn closed_unchecked(q1: f64, q_bar: f64, c: f64, player: Player, other: f64) -> f64 {
    match player {
        Player::Incumbent => (q1 - other * (q_bar - c * other)) / (2.0 * q1),
        Player::Entrant => {
            let s = 1.0 - other;
            q_bar * s / (c * s + q_bar + (q_bar * q_bar + c * c * s * s - c * q_bar * s).sqrt())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermodularityReport {
    pub holds: bool,
    /// Grid point with the smallest margin, as `(λ1, λ2)`.
    pub worst_point: (f64, f64),
    pub worst_margin: f64,
}

/// Checks the mixed-partial sign conditions that make the game supermodular
/// after flipping the incumbent's action. Uniform valuations use the
/// reduction `g(λ2) + λ2·g'(λ2) ≥ 0` on `[0, 1/2]`.
pub fn supermodularity_check(game: &CournotGame) -> Result<SupermodularityReport> {
    let mut worst = SupermodularityReport { holds: true, worst_point: (0.0, 0.0), worst_margin: f64::INFINITY };
    let mut visit = |point: (f64, f64), margin: f64| {
        if margin < worst.worst_margin {
            worst.worst_margin = margin;
            worst.worst_point = point;
        }
    };
    if game.dist.is_uniform() {
        let g = &game.qos2;
        for l2 in numeric::grid(0.0, 0.5, LAMBDA_GRID) {
            visit((0.0, l2), g.value(l2) + l2 * g.slope(l2));
        }
    } else {
        game.require_nonincreasing()?;
        let d = &game.dist;
        for l1 in numeric::grid(0.0, 0.5, GENERAL_GRID) {
            for l2 in numeric::grid(0.0, 0.5, GENERAL_GRID) {
                let z1 = d.quantile_unchecked(1.0 - l1);
                let z2 = d.quantile_unchecked(1.0 - l1 - l2);
                let (f1, f2, df2) = (d.pdf(z1), d.pdf(z2), d.pdf_derivative(z2));
                let (g, dg) = (game.qos2.value(l2), game.qos2.slope(l2));
                let first = (1.0 / f2 + l1 * df2 / f2.powi(3)) * g + (z1 - l1 / f1 - z2 + l1 / f2) * dg;
                let second = (1.0 / f2 + l2 * df2 / f2.powi(3)) * g + l2 / f2 * dg;
                for m in [first, second] {
                    // 1/f is unbounded where a tabulated density touches zero.
                    if m.is_finite() {
                        visit((l1, l2), m);
                    }
                }
            }
        }
    }
    worst.holds = worst.worst_margin >= 0.0;
    Ok(worst)
}

/// Sequence of best-response rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseRun {
    /// `trajectory[0]` is the start; entry `k` is the pair after round `k`.
    pub trajectory: Vec<(f64, f64)>,
    pub converged: bool,
    pub rounds: usize,
    pub residual: f64,
}

/// Gauss–Seidel best-response dynamics: each round the incumbent responds
/// first, then the entrant responds to the new incumbent share.
pub fn nash_iterate(game: &CournotGame, start: (f64, f64), max_rounds: usize, tol: f64) -> Result<BestResponseRun> {
    game.require_nonincreasing()?;
    let half = 0.0..=0.5;
    if !(half.contains(&start.0) && half.contains(&start.1)) {
        return Err(Error::domain(format!("start ({}, {}) outside [0, 1/2]^2", start.0, start.1)));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let closed = game.closed_form_params();
    let respond = |player: Player, other: f64| match closed {
        Some((q_bar, c)) => closed_unchecked(game.q1, q_bar, c, player, other),
        None => best_response_unchecked(game, player, other).0,
    };
    let mut trajectory = vec![start];
    let (mut l1, mut l2) = start;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while trajectory.len() <= max_rounds {
        let n1 = respond(Player::Incumbent, l2);
        let n2 = respond(Player::Entrant, n1);
        residual = (n1 - l1).abs().max((n2 - l2).abs());
        l1 = n1;
        l2 = n2;
        trajectory.push((l1, l2));
        if residual < tol {
            converged = true;
            break;
        }
    }
    Ok(BestResponseRun { rounds: trajectory.len() - 1, trajectory, converged, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashOutcome {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: f64,
    pub p2: f64,
    pub r1: f64,
    pub r2: f64,
    pub iterations: usize,
    pub supermodular_check: bool,
    pub start: (f64, f64),
    /// Largest revenue gain either player finds by re-optimizing at the
    /// reported point.
    pub max_improvement: f64,
}

/// Runs the best-response dynamics to convergence and certifies the result
/// as a Nash equilibrium.
pub fn nash_solve(game: &CournotGame, start: (f64, f64), max_rounds: usize, tol: f64) -> Result<NashOutcome> {
    let run = nash_iterate(game, start, max_rounds, tol)?;
    if !run.converged {
        return Err(Error::NonConvergence { rounds: run.rounds, residual: run.residual });
    }
    let (l1, l2) = *run.trajectory.last().expect("run has a start");
    let (r1, r2) = revenues(game, l1, l2);
    let gain1 = best_response_unchecked(game, Player::Incumbent, l2).1 - r1;
    let gain2 = best_response_unchecked(game, Player::Entrant, l1).1 - r2;
    let max_improvement = gain1.max(gain2).max(0.0);
    if max_improvement >= NE_IMPROVEMENT_TOL {
        return Err(Error::model(format!(
            "best-response fixed point ({l1}, {l2}) is not an equilibrium: a player gains {max_improvement:e}"
        )));
    }
    let (p1, p2) = game.prices_unchecked(l1, l2);
    Ok(NashOutcome {
        lambda1: l1,
        lambda2: l2,
        p1,
        p2,
        r1,
        r2,
        iterations: run.rounds,
        supermodular_check: supermodularity_check(game)?.holds,
        start,
        max_improvement,
    })
}

/// [`nash_solve`] with the default round cap and tolerance.
pub fn nash_solve_default(game: &CournotGame, start: (f64, f64)) -> Result<NashOutcome> {
    nash_solve(game, start, DEFAULT_MAX_ROUNDS, DEFAULT_TOL)
}

pub const MULTI_STARTS: [(f64, f64); 5] = [(0.0, 0.0), (0.5, 0.5), (0.0, 0.5), (0.5, 0.0), (0.25, 0.25)];

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartReport {
    /// One outcome per start, sorted lexicographically by `(λ1, λ2)`.
    pub outcomes: Vec<NashOutcome>,
    /// Largest pairwise max-norm distance between outcomes.
    pub spread: f64,
    pub agree: bool,
}

impl MultiStartReport {
    pub fn best(&self) -> &NashOutcome {
        &self.outcomes[0]
    }
}

/// Solves from each of [`MULTI_STARTS`] and flags disagreement.
pub fn nash_solve_multistart(game: &CournotGame, max_rounds: usize, tol: f64) -> Result<MultiStartReport> {
    let mut outcomes = MULTI_STARTS
        .iter()
        .map(|&s| nash_solve(game, s, max_rounds, tol))
        .collect::<Result<Vec<_>>>()?;
    outcomes.sort_by(|a, b| a.lambda1.total_cmp(&b.lambda1).then(a.lambda2.total_cmp(&b.lambda2)));
    let mut spread: f64 = 0.0;
    for a in &outcomes {
        for b in &outcomes {
            spread = spread.max((a.lambda1 - b.lambda1).abs().max((a.lambda2 - b.lambda2).abs()));
        }
    }
    Ok(MultiStartReport { outcomes, spread, agree: spread < AGREEMENT_TOL })
}
