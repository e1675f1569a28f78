use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nspmarket_core::{
    convergence_condition, convergence_condition_duopoly, convergence_condition_linear,
    convergence_condition_partial, convergence_condition_positive_ext, decision_map,
    equilibrium, equilibrium_duopoly, fit_affine, inverse_demand, nash_iterate, nash_solve,
    optimize, optimum_bounds, optimum_closed_form, revenue_curve, revenues, select, simulate,
    simulate_duopoly, switching_cost_equilibrium_band, technology_revenue, Bound, Condition,
    CournotGame, DuopolyMarket, MonopolyMarket, QosModel, Regime,
    DEFAULT_MAX_ITER, DEFAULT_MAX_ROUNDS, DEFAULT_TOL,
};

use crate::output::{fmt_num, summary, CsvOut};
use crate::scenario::{InitialShares, Scenario, VariantSpec};
use crate::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "nspmarket", version, about = "Market dynamics, pricing and entry decisions for a congestion-limited entrant")]
pub struct Cli {
    /// Convergence tolerance; overrides the scenario.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration or round cap; overrides the scenario.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the subscription dynamics and write the share trajectory.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        tech: Option<String>,
    },
    /// Equilibria, convergence conditions and the revenue optimum.
    Analyze {
        scenario: PathBuf,
        #[arg(long)]
        tech: Option<String>,
        /// Also write the revenue curve sampled at this many shares.
        #[arg(long)]
        curve_points: Option<usize>,
    },
    /// Cournot competition between the incumbent and one technology.
    Compete {
        scenario: PathBuf,
        #[arg(long)]
        tech: Option<String>,
        /// Starting shares `λ1,λ2`.
        #[arg(long, value_parser = parse_pair, default_value = "0.25,0.25")]
        start: (f64, f64),
    },
    /// Profit table and, with grid flags, the cost decision map.
    Select {
        scenario: PathBuf,
        /// Cost grid `start:stop:step` for the first technology.
        #[arg(long, value_parser = parse_grid)]
        k_first: Option<Grid>,
        /// Cost grid for the second technology; defaults to `--k-first`.
        #[arg(long, value_parser = parse_grid, requires = "k_first")]
        k_second: Option<Grid>,
    },
    /// Least-squares affine fit of a `lambda,qos` table.
    FitQos { samples: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err("expected `start:stop:step`".into());
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err("need step > 0 and stop >= start".into());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok(Grid((0..n).map(|i| start + step * i as f64).collect()))
}

/// Runs one command, writing summaries to `stdout`. Returns the CSV files
/// written.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Simulate { scenario, tech } => cmd_simulate(cli, scenario, tech.as_deref(), stdout),
        Command::Analyze { scenario, tech, curve_points } => {
            cmd_analyze(cli, scenario, tech.as_deref(), *curve_points, stdout)
        }
        Command::Compete { scenario, tech, start } => cmd_compete(cli, scenario, tech.as_deref(), *start, stdout),
        Command::Select { scenario, k_first, k_second } => {
            cmd_select(cli, scenario, k_first.as_ref(), k_second.as_ref(), stdout)
        }
        Command::FitQos { samples } => cmd_fit_qos(cli, samples, stdout),
    }
}

fn entrant_qos(sc: &Scenario, tech: Option<&str>) -> Result<QosModel> {
    Ok(sc.technology(tech)?.qos.clone().expect("scenario technologies enter"))
}

fn cmd_simulate(cli: &Cli, path: &Path, tech: Option<&str>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let sc = Scenario::load(path)?;
    let dy = sc.dynamics.as_ref().ok_or_else(|| CliError::Invalid("simulate needs a `dynamics` section".into()))?;
    let prices = sc.prices.ok_or_else(|| CliError::Invalid("simulate needs a `prices` section".into()))?;
    let max_iter = cli.max_iter.or(dy.max_iter).unwrap_or(DEFAULT_MAX_ITER);
    let tol = cli.tol.or(dy.tol).unwrap_or(DEFAULT_TOL);
    let qos = entrant_qos(&sc, tech)?;
    let stem = format!("{}_simulate", sc.name);
    match (sc.q1, dy.lambda0) {
        (None, InitialShares::Monopoly(l0)) => {
            let mkt = MonopolyMarket::new(sc.dist.clone(), qos, prices.p2)?;
            let trace = simulate(&mkt, &dy.variant.into(), l0, max_iter, tol)?;
            let mut csv = CsvOut::create(&cli.out, &stem, &["t", "lambda2"])?;
            for (t, l) in trace.states.iter().enumerate() {
                csv.nums(&[t as f64, *l])?;
            }
            summary(stdout, &[
                ("converged", trace.converged.to_string()),
                ("iterations", trace.iterations.to_string()),
                ("lambda2", fmt_num(trace.last())),
            ])?;
            Ok(vec![csv.finish()?])
        }
        (Some(q1), InitialShares::Duopoly([a, b])) => {
            if dy.variant != VariantSpec::Synchronous {
                return Err(CliError::Invalid("dynamics variants apply to the monopoly market only".into()));
            }
            let p1 = prices.p1.ok_or_else(|| CliError::Invalid("the duopoly needs `prices.p1`".into()))?;
            let mkt = DuopolyMarket::new(sc.dist.clone(), q1, qos, p1, prices.p2)?;
            let trace = simulate_duopoly(&mkt, (a, b), max_iter, tol)?;
            let mut csv = CsvOut::create(&cli.out, &stem, &["t", "lambda1", "lambda2"])?;
            for (t, (l1, l2)) in trace.states.iter().enumerate() {
                csv.nums(&[t as f64, *l1, *l2])?;
            }
            let (l1, l2) = trace.last();
            summary(stdout, &[
                ("converged", trace.converged.to_string()),
                ("iterations", trace.iterations.to_string()),
                ("lambda1", fmt_num(l1)),
                ("lambda2", fmt_num(l2)),
            ])?;
            Ok(vec![csv.finish()?])
        }
        (None, InitialShares::Duopoly(_)) => {
            Err(CliError::Invalid("a `[lambda1, lambda2]` start needs an `incumbent` section".into()))
        }
        (Some(_), InitialShares::Monopoly(_)) => {
            Err(CliError::Invalid("with an incumbent, `lambda0` must be a `[lambda1, lambda2]` pair".into()))
        }
    }
}

/// Rows of the `section,item,value` analysis table.
struct Report(Vec<[String; 3]>);

impl Report {
    fn push(&mut self, section: &str, item: &str, value: String) {
        self.0.push([section.to_string(), item.to_string(), value]);
    }

    fn num(&mut self, section: &str, item: &str, v: f64) {
        self.push(section, item, fmt_num(v));
    }

    fn condition(&mut self, section: &str, c: &Condition) {
        self.push(section, "holds", c.holds.to_string());
        self.num(section, "lhs", c.lhs);
        self.num(section, "rhs", c.rhs);
    }

    fn bound(&mut self, name: &str, b: &Bound) {
        self.num("bounds", &format!("{name}_lo"), b.lo);
        self.num("bounds", &format!("{name}_hi"), b.hi);
        self.push("bounds", &format!("{name}_lo_closed"), b.lo_closed.to_string());
        self.push("bounds", &format!("{name}_hi_closed"), b.hi_closed.to_string());
    }
}

fn cmd_analyze(
    cli: &Cli,
    path: &Path,
    tech: Option<&str>,
    curve_points: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let sc = Scenario::load(path)?;
    let qos = entrant_qos(&sc, tech)?;
    let dist = &sc.dist;
    let mut r = Report(Vec::new());

    match (sc.q1, sc.prices) {
        (None, Some(prices)) => {
            let mkt = MonopolyMarket::new(dist.clone(), qos.clone(), prices.p2)?;
            r.num("equilibrium", "lambda2", equilibrium(&mkt));
            if let Some(VariantSpec::SwitchingCost { c_s }) = sc.dynamics.as_ref().map(|d| d.variant) {
                let band = switching_cost_equilibrium_band(&mkt, c_s)?;
                let (lo, hi) = band.share_range(dist);
                r.num("switching_band", "threshold_lo", band.lo);
                r.num("switching_band", "threshold_hi", band.hi);
                r.num("switching_band", "lambda2_lo", lo);
                r.num("switching_band", "lambda2_hi", hi);
            }
        }
        (Some(q1), Some(prices)) => {
            if let Some(p1) = prices.p1 {
                let mkt = DuopolyMarket::new(dist.clone(), q1, qos.clone(), p1, prices.p2)?;
                let eq = equilibrium_duopoly(&mkt);
                r.num("equilibrium", "lambda1", eq.lambda1);
                r.num("equilibrium", "lambda2", eq.lambda2);
                let regime = match eq.regime {
                    Regime::EntrantShutOut => "entrant_shut_out",
                    Regime::Interior => "interior",
                };
                r.push("equilibrium", "regime", regime.to_string());
            }
        }
        _ => {}
    }

    r.condition("convergence", &convergence_condition(dist, &qos));
    if let Some(c) = convergence_condition_linear(dist, &qos) {
        r.condition("convergence_linear", &c);
    }
    match sc.dynamics.as_ref().map(|d| d.variant) {
        Some(VariantSpec::Partial { epsilon }) => {
            r.condition("convergence_partial", &convergence_condition_partial(dist, &qos, epsilon)?);
        }
        Some(VariantSpec::PositiveExternality { q_bar, delta, phi, gamma }) if gamma >= 1.0 => {
            let c = convergence_condition_positive_ext(dist, q_bar, delta, phi, gamma)?;
            r.condition("convergence_positive_externality", &c);
        }
        _ => {}
    }
    if let Some(q1) = sc.q1 {
        r.condition("convergence_duopoly", &convergence_condition_duopoly(dist, q1, &qos)?);
    }

    let opt = optimize(dist, &qos);
    r.num("optimum", "price", opt.price);
    r.num("optimum", "marginal_valuation", opt.marginal_valuation);
    r.num("optimum", "share", opt.share);
    r.num("optimum", "revenue", opt.revenue);
    if let (true, QosModel::Linear { q_bar, c }) = (dist.is_uniform(), &qos) {
        let cf = optimum_closed_form(dist.beta(), *q_bar, *c)?;
        r.num("optimum_closed_form", "price", cf.price);
        r.num("optimum_closed_form", "share", cf.share);
        r.num("optimum_closed_form", "revenue", cf.revenue);
    }
    if dist.is_nonincreasing_pdf() {
        let b = optimum_bounds(dist, &qos)?;
        r.bound("price", &b.price);
        r.bound("marginal_valuation", &b.marginal_valuation);
        r.bound("share", &b.share);
        r.push("bounds", "tightened", b.tightened.to_string());
        r.push("bounds", "optimum_within", b.contains(&opt).to_string());
    }

    let mut csv = CsvOut::create(&cli.out, &format!("{}_analyze", sc.name), &["section", "item", "value"])?;
    for row in &r.0 {
        csv.row(row)?;
    }
    let mut written = vec![csv.finish()?];
    if let Some(n) = curve_points {
        let mut curve = CsvOut::create(&cli.out, &format!("{}_analyze_curve", sc.name), &["lambda", "price", "revenue"])?;
        for (l, p, rev) in revenue_curve(dist, &qos, n)? {
            curve.nums(&[l, p, rev])?;
        }
        written.push(curve.finish()?);
    }
    summary(stdout, &[
        ("price", fmt_num(opt.price)),
        ("share", fmt_num(opt.share)),
        ("revenue", fmt_num(opt.revenue)),
    ])?;
    Ok(written)
}

fn cmd_compete(
    cli: &Cli,
    path: &Path,
    tech: Option<&str>,
    start: (f64, f64),
    stdout: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let sc = Scenario::load(path)?;
    let game = CournotGame::new(sc.dist.clone(), sc.require_q1()?, entrant_qos(&sc, tech)?)?;
    let max_rounds = cli.max_iter.unwrap_or(DEFAULT_MAX_ROUNDS);
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let run = nash_iterate(&game, start, max_rounds, tol)?;
    let header = ["round", "lambda1", "lambda2", "p1", "p2", "R1", "R2"];
    let mut csv = CsvOut::create(&cli.out, &format!("{}_compete", sc.name), &header)?;
    for (k, &(l1, l2)) in run.trajectory.iter().enumerate() {
        let (p1, p2) = inverse_demand(&game, l1, l2)?;
        let (r1, r2) = revenues(&game, l1, l2);
        csv.nums(&[k as f64, l1, l2, p1, p2, r1, r2])?;
    }
    let written = csv.finish()?;
    let ne = nash_solve(&game, start, max_rounds, tol)?;
    summary(stdout, &[
        ("lambda1", fmt_num(ne.lambda1)),
        ("lambda2", fmt_num(ne.lambda2)),
        ("p1", fmt_num(ne.p1)),
        ("p2", fmt_num(ne.p2)),
        ("R1", fmt_num(ne.r1)),
        ("R2", fmt_num(ne.r2)),
        ("rounds", ne.iterations.to_string()),
        ("supermodular", ne.supermodular_check.to_string()),
    ])?;
    Ok(vec![written])
}

fn cmd_select(
    cli: &Cli,
    path: &Path,
    k_first: Option<&Grid>,
    k_second: Option<&Grid>,
    stdout: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let sc = Scenario::load(path)?;
    let problem = sc.selection_problem()?;
    let sel = select(&problem)?;
    for (t, (name, profit)) in problem.technologies.iter().zip(&sel.profits) {
        summary(stdout, &[
            ("technology", name.clone()),
            ("revenue", fmt_num(technology_revenue(&problem, t)?)),
            ("cost", fmt_num(t.cost_per_period)),
            ("profit", fmt_num(*profit)),
        ])?;
    }
    summary(stdout, &[("chosen", sel.chosen.name.clone())])?;
    let Some(k1) = k_first else {
        return Ok(Vec::new());
    };
    let k2 = k_second.unwrap_or(k1);
    let map = decision_map(&problem, &k1.0, &k2.0)?;
    let header = [format!("k_{}", map.names[0]), format!("k_{}", map.names[1]), "choice".to_string()];
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvOut::create(&cli.out, &format!("{}_select", sc.name), &header)?;
    for (a, b, choice) in map.rows() {
        csv.row(&[fmt_num(a), fmt_num(b), choice.to_string()])?;
    }
    Ok(vec![csv.finish()?])
}

fn cmd_fit_qos(cli: &Cli, path: &Path, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let model = QosModel::from_csv_path(path).map_err(|e| CliError::data(path, e))?;
    let QosModel::Tabulated { samples } = &model else {
        unreachable!("tables load as tabulated models")
    };
    let fit = fit_affine(samples)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("qos");
    let mut csv = CsvOut::create(&cli.out, &format!("{stem}_fit-qos"), &["lambda", "qos", "fitted"])?;
    for &(l, q) in samples {
        csv.nums(&[l, q, fit.q_bar - fit.c * l])?;
    }
    summary(stdout, &[
        ("q_bar", fmt_num(fit.q_bar)),
        ("c", fmt_num(fit.c)),
        ("rms_residual", fmt_num(fit.rms_residual)),
    ])?;
    Ok(vec![csv.finish()?])
}
