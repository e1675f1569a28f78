//! Entrant QoS curves `g(λ)`, affine fitting, and technology options.

use std::io::Read;
use std::path::Path;

use crate::numeric;
use crate::valuation::read_pairs;
use crate::{Error, Result};

const MONOTONE_SLACK: f64 = 1e-12;
/// Grid used wherever a maximum over `λ ∈ [0, 1]` is taken numerically.
pub(crate) const LAMBDA_GRID: usize = 10_001;

/// QoS delivered by the entrant as a function of its market share.
///
/// Every variant is positive and non-increasing on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum QosModel {
    Constant { q: f64 },
    /// `g(λ) = q_bar − c·λ` with `0 ≤ c < q_bar`.
    Linear { q_bar: f64, c: f64 },
    /// Linear interpolation between `(λ, q)` samples; flat outside the table.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl QosModel {
    pub fn constant(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::model(format!("constant QoS must be positive, got {q}")));
        }
        Ok(QosModel::Constant { q })
    }

    pub fn linear(q_bar: f64, c: f64) -> Result<Self> {
        if !(q_bar.is_finite() && q_bar > 0.0) {
            return Err(Error::model(format!("q_bar must be positive, got {q_bar}")));
        }
        if !(c.is_finite() && (0.0..q_bar).contains(&c)) {
            return Err(Error::model(format!("degradation c must lie in [0, q_bar) = [0, {q_bar}), got {c}")));
        }
        Ok(QosModel::Linear { q_bar, c })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::model("a QoS table needs at least two samples"));
        }
        for (i, &(l, q)) in samples.iter().enumerate() {
            if !(l.is_finite() && (0.0..=1.0).contains(&l)) {
                return Err(Error::model(format!("sample {i}: lambda {l} outside [0, 1]")));
            }
            if !(q.is_finite() && q > 0.0) {
                return Err(Error::model(format!("sample {i}: QoS must be positive, got {q}")));
            }
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::model("QoS table lambdas must be strictly ascending"));
            }
            if w[1].1 > w[0].1 + MONOTONE_SLACK {
                return Err(Error::model(format!(
                    "QoS must be non-increasing: g({}) = {} > g({}) = {}",
                    w[1].0, w[1].1, w[0].0, w[0].1
                )));
            }
        }
        Ok(QosModel::Tabulated { samples })
    }

    /// Loads a table from CSV with header `lambda,qos`.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        Self::tabulated(read_pairs(reader, ["lambda", "qos"])?)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::from_csv_reader(file)
    }

    pub fn evaluate(&self, lambda: f64) -> Result<f64> {
        check_share(lambda)?;
        Ok(self.value(lambda))
    }

    pub fn derivative(&self, lambda: f64) -> Result<f64> {
        check_share(lambda)?;
        Ok(self.slope(lambda))
    }

    /// `g(λ)` without the domain check.
    pub(crate) fn value(&self, lambda: f64) -> f64 {
        match self {
            QosModel::Constant { q } => *q,
            QosModel::Linear { q_bar, c } => q_bar - c * lambda,
            QosModel::Tabulated { samples } => {
                let (first, last) = (samples[0], samples[samples.len() - 1]);
                if lambda <= first.0 {
                    return first.1;
                }
                if lambda >= last.0 {
                    return last.1;
                }
                let i = samples.partition_point(|s| s.0 <= lambda) - 1;
                let (l0, q0) = samples[i];
                let (l1, q1) = samples[i + 1];
                q0 + (lambda - l0) * (q1 - q0) / (l1 - l0)
            }
        }
    }

    /// One-sided `g'(λ)`: right segment at a knot, left segment at the last knot.
    pub(crate) fn slope(&self, lambda: f64) -> f64 {
        match self {
            QosModel::Constant { .. } => 0.0,
            QosModel::Linear { c, .. } => -c,
            QosModel::Tabulated { samples } => {
                let n = samples.len();
                if lambda < samples[0].0 || lambda > samples[n - 1].0 {
                    return 0.0;
                }
                let i = samples.partition_point(|s| s.0 <= lambda).clamp(1, n - 1) - 1;
                let (l0, q0) = samples[i];
                let (l1, q1) = samples[i + 1];
                (q1 - q0) / (l1 - l0)
            }
        }
    }

    /// `g(0)`, the largest QoS the entrant can deliver.
    pub fn peak(&self) -> f64 {
        self.value(0.0)
    }

    /// `max_{λ∈[0,1]} −g'(λ)/g(λ)`; exact for constant and linear models.
    pub fn max_relative_decay(&self) -> f64 {
        match self {
            QosModel::Constant { .. } => 0.0,
            QosModel::Linear { q_bar, c } => c / (q_bar - c),
            QosModel::Tabulated { .. } => max_over_shares(|l| -self.slope(l) / self.value(l)),
        }
    }
}

/// Maximum of `h` over the 10,001-point grid on `[0, 1]`.
pub(crate) fn max_over_shares(h: impl Fn(f64) -> f64) -> f64 {
    numeric::grid(0.0, 1.0, LAMBDA_GRID).map(h).fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn check_share(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::domain(format!("market share {lambda} outside [0, 1]")))
    }
}

/// Least-squares affine approximation of tabulated QoS.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub model: QosModel,
    pub q_bar: f64,
    pub c: f64,
    /// Root-mean-square residual of the returned line over the samples.
    pub rms_residual: f64,
}

/// Fits `q ≈ q_bar − c·λ` by ordinary least squares. A fitted increasing
/// slope is clamped to `c = 0`.
pub fn fit_affine(samples: &[(f64, f64)]) -> Result<AffineFit> {
    if samples.len() < 2 {
        return Err(Error::Fit("need at least two samples".into()));
    }
    if samples.iter().any(|&(l, q)| !(l.is_finite() && q.is_finite())) {
        return Err(Error::Fit("samples must be finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[1].0 == w[0].0 {
            return Err(Error::Fit(format!("duplicate lambda {}", w[0].0)));
        }
        if w[1].1 > w[0].1 + MONOTONE_SLACK {
            return Err(Error::Fit(format!("QoS samples increase between lambda {} and {}", w[0].0, w[1].0)));
        }
    }
    let n = samples.len() as f64;
    let mean_l = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_q = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mean_l).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mean_l) * (s.1 - mean_q)).sum();
    let slope = sxy / sxx;
    let q_bar = mean_q - slope * mean_l;
    let c = (-slope).max(0.0);
    let model = QosModel::linear(q_bar, c).map_err(|e| Error::Fit(format!("fitted line is not a valid QoS model: {e}")))?;
    let sse: f64 = samples.iter().map(|&(l, q)| (q - (q_bar - c * l)).powi(2)).sum();
    Ok(AffineFit { model, q_bar, c, rms_residual: (sse / n).sqrt() })
}

/// Average throughput of a user spending fraction `f_o` of the time outdoors:
/// `(1 − f_o)·t_broadband + f_o·t_macro`.
pub fn average_throughput(f_o: f64, t_broadband: f64, t_macro: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_o) {
        return Err(Error::domain(format!("outdoor fraction {f_o} outside [0, 1]")));
    }
    if !(t_broadband >= 0.0 && t_macro >= 0.0) {
        return Err(Error::domain("throughputs must be non-negative"));
    }
    Ok((1.0 - f_o) * t_broadband + f_o * t_macro)
}

pub const NOT_ENTER: &str = "not-enter";

/// An option available to the entrant: a QoS curve plus its average cost per
/// period over the technology's life-span.
#[derive(Debug, Clone, PartialEq)]
pub struct Technology {
    pub name: String,
    /// `None` only for the not-enter option.
    pub qos: Option<QosModel>,
    pub cost_per_period: f64,
}

impl Technology {
    pub fn new(name: impl Into<String>, qos: QosModel, cost_per_period: f64) -> Result<Self> {
        let name = name.into();
        if name == NOT_ENTER {
            return Err(Error::model("`not-enter` is reserved; use Technology::not_enter()"));
        }
        if !(cost_per_period.is_finite() && cost_per_period >= 0.0) {
            return Err(Error::model(format!("cost of `{name}` must be non-negative, got {cost_per_period}")));
        }
        Ok(Self { name, qos: Some(qos), cost_per_period })
    }

    pub fn not_enter() -> Self {
        Self { name: NOT_ENTER.to_string(), qos: None, cost_per_period: 0.0 }
    }

    pub fn is_not_enter(&self) -> bool {
        self.qos.is_none()
    }
}
