//! Entry and technology choice: each option earns its equilibrium
//! per-period revenue minus its per-period cost.

use crate::competition::{nash_solve, CournotGame};
use crate::duopoly::check_incumbent;
use crate::monopoly_revenue::optimize;
use crate::qos::{Technology, NOT_ENTER};
use crate::valuation::ValuationDistribution;
use crate::{Error, Result, DEFAULT_MAX_ROUNDS, DEFAULT_TOL};

/// Start of the best-response dynamics used for duopoly revenues.
const NE_START: (f64, f64) = (0.25, 0.25);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarketMode {
    NoIncumbent,
    /// An incumbent with constant QoS `q1`.
    OneIncumbent(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    /// Candidate options; the not-enter option is always last.
    pub technologies: Vec<Technology>,
    pub mode: MarketMode,
    pub dist: ValuationDistribution,
}

impl SelectionProblem {
    /// Validates the candidates and appends the not-enter option if it is
    /// missing.
    pub fn new(technologies: Vec<Technology>, mode: MarketMode, dist: ValuationDistribution) -> Result<Self> {
        let mut entering: Vec<Technology> = technologies.into_iter().filter(|t| !t.is_not_enter()).collect();
        if entering.is_empty() {
            return Err(Error::model("at least one technology besides not-enter is required"));
        }
        for (i, t) in entering.iter().enumerate() {
            if entering[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::model(format!("duplicate technology name `{}`", t.name)));
            }
            if let (MarketMode::OneIncumbent(q1), Some(qos)) = (mode, &t.qos) {
                check_incumbent(q1, qos).map_err(|e| Error::model(format!("technology `{}`: {e}", t.name)))?;
            }
        }
        entering.push(Technology::not_enter());
        Ok(Self { technologies: entering, mode, dist })
    }

    pub fn find(&self, name: &str) -> Option<&Technology> {
        self.technologies.iter().find(|t| t.name == name)
    }
}

/// Equilibrium per-period revenue of `tech`, ignoring its cost.
pub fn technology_revenue(problem: &SelectionProblem, tech: &Technology) -> Result<f64> {
    let Some(qos) = &tech.qos else {
        return Ok(0.0);
    };
    match problem.mode {
        MarketMode::NoIncumbent => Ok(optimize(&problem.dist, qos).revenue),
        MarketMode::OneIncumbent(q1) => {
            let game = CournotGame::new(problem.dist.clone(), q1, qos.clone())?;
            Ok(nash_solve(&game, NE_START, DEFAULT_MAX_ROUNDS, DEFAULT_TOL)?.r2)
        }
    }
}

pub fn technology_profit(problem: &SelectionProblem, tech: &Technology) -> Result<f64> {
    Ok(technology_revenue(problem, tech)? - tech.cost_per_period)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: Technology,
    /// `(name, profit)` for every option in problem order.
    pub profits: Vec<(String, f64)>,
}

/// Index of the chosen option: the most profitable entering option if its
/// profit is positive, otherwise not-enter. Ties keep list order.
fn choose(profits: impl Iterator<Item = f64>, not_enter: usize) -> usize {
    let mut best = not_enter;
    let mut best_profit = 0.0;
    for (i, p) in profits.enumerate() {
        if i != not_enter && p > best_profit {
            best = i;
            best_profit = p;
        }
    }
    best
}

pub fn select(problem: &SelectionProblem) -> Result<Selection> {
    let profits = problem
        .technologies
        .iter()
        .map(|t| Ok((t.name.clone(), technology_profit(problem, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let i = choose(profits.iter().map(|p| p.1), problem.technologies.len() - 1);
    Ok(Selection { chosen: problem.technologies[i].clone(), profits })
}

/// Choices over a product grid of costs for two technologies.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMap {
    pub names: [String; 2],
    pub k_first: Vec<f64>,
    pub k_second: Vec<f64>,
    /// Cost-free revenue of each technology, computed once.
    pub revenues: [f64; 2],
    /// `cells[i][j]` is the choice at `(k_first[i], k_second[j])`.
    pub cells: Vec<Vec<String>>,
}

impl DecisionMap {
    /// Rows `(k_first, k_second, choice)` in grid order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, &str)> + '_ {
        self.k_first.iter().enumerate().flat_map(move |(i, &a)| {
            self.k_second.iter().enumerate().map(move |(j, &b)| (a, b, self.cells[i][j].as_str()))
        })
    }

    pub fn count(&self, choice: &str) -> usize {
        self.cells.iter().flatten().filter(|c| *c == choice).count()
    }
}

/// Sweeps the costs of the problem's two entering technologies over the
/// given ascending grids. The technologies' own costs are ignored.
pub fn decision_map(problem: &SelectionProblem, k_first: &[f64], k_second: &[f64]) -> Result<DecisionMap> {
    let entering = &problem.technologies[..problem.technologies.len() - 1];
    let [a, b] = entering else {
        return Err(Error::model(format!(
            "a decision map needs exactly two entering technologies, found {}",
            entering.len()
        )));
    };
    for grid in [k_first, k_second] {
        if grid.is_empty() || grid.iter().any(|k| !k.is_finite() || *k < 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("cost grids must be non-empty, non-negative and strictly ascending"));
        }
    }
    let revenues = [technology_revenue(problem, a)?, technology_revenue(problem, b)?];
    let names = [a.name.clone(), b.name.clone()];
    let cells = k_first
        .iter()
        .map(|&ka| {
            k_second
                .iter()
                .map(|&kb| {
                    let i = choose([revenues[0] - ka, revenues[1] - kb, 0.0].into_iter(), 2);
                    if i == 2 { NOT_ENTER.to_string() } else { names[i].clone() }
                })
                .collect()
        })
        .collect();
    Ok(DecisionMap { names, k_first: k_first.to_vec(), k_second: k_second.to_vec(), revenues, cells })
}
