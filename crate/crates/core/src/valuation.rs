//! Distribution of the users' valuations of QoS on `[0, β]`.
//!
//! A user with valuation `α` obtains utility `α·q − p` from a service of
//! quality `q` sold at price `p`. Densities are either uniform or tabulated
//! on a grid with linear interpolation between samples.

use std::io::Read;
use std::path::Path;

use crate::numeric;
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-9;
const MONOTONE_SLACK: f64 = 1e-12;
const K_GRID: usize = 10_001;

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationDistribution {
    beta: f64,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Uniform,
    Custom(Table),
}

/// Piecewise-linear density with its cumulative integral at each knot.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    alpha: Vec<f64>,
    pdf: Vec<f64>,
    cum: Vec<f64>,
}

impl Table {
    /// Index `i` of the segment `[alpha[i], alpha[i+1]]` holding `x`.
    fn segment(&self, x: f64) -> usize {
        let n = self.alpha.len();
        match self.alpha.partition_point(|&a| a <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn pdf_at(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (a0, a1) = (self.alpha[i], self.alpha[i + 1]);
        let t = (x - a0) / (a1 - a0);
        self.pdf[i] + t * (self.pdf[i + 1] - self.pdf[i])
    }

    fn slope(&self, i: usize) -> f64 {
        (self.pdf[i + 1] - self.pdf[i]) / (self.alpha[i + 1] - self.alpha[i])
    }

    /// Unnormalized integral from 0 to `x` of the interpolant (exact).
    fn integral_to(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let fx = self.pdf_at(x);
        self.cum[i] + 0.5 * (x - self.alpha[i]) * (self.pdf[i] + fx)
    }

    fn total(&self) -> f64 {
        *self.cum.last().expect("table has at least two knots")
    }
}

impl ValuationDistribution {
    /// Uniform valuations on `[0, beta]`.
    pub fn uniform(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self { beta, kind: Kind::Uniform })
    }

    /// Tabulated density from `(alpha, f(alpha))` samples. The first sample
    /// must sit at `alpha = 0` and the last defines `beta`; the trapezoidal
    /// mass must equal 1 within 1e-9.
    pub fn custom(samples: &[(f64, f64)]) -> Result<Self> {
        let table = build_table(samples)?;
        let mass = table.total();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!(
                "density integrates to {mass}, expected 1 within {MASS_TOL:e}"
            )));
        }
        Ok(Self { beta: *table.alpha.last().unwrap(), kind: Kind::Custom(table) })
    }

    /// Like [`custom`](Self::custom) but rescales the samples to unit mass.
    pub fn custom_normalized(samples: &[(f64, f64)]) -> Result<Self> {
        let table = build_table(samples)?;
        let mass = table.total();
        let scaled: Vec<(f64, f64)> = samples.iter().map(|&(a, f)| (a, f / mass)).collect();
        Self::custom(&scaled)
    }

    /// Loads a density from CSV with header `alpha,pdf`.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let samples = read_pairs(reader, ["alpha", "pdf"])?;
        Self::custom(&samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::from_csv_reader(file)
    }

    /// Upper end of the support.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform)
    }

    /// Knots of a tabulated density; `None` for the uniform law.
    pub fn samples(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            Kind::Uniform => None,
            Kind::Custom(t) => Some(t.alpha.iter().copied().zip(t.pdf.iter().copied()).collect()),
        }
    }

    /// Density `f(α)`; zero outside `[0, β]`.
    pub fn pdf(&self, alpha: f64) -> f64 {
        if !(0.0..=self.beta).contains(&alpha) {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => 1.0 / self.beta,
            Kind::Custom(t) => t.pdf_at(alpha) / t.total(),
        }
    }

    /// One-sided derivative `f'(α)` on `[0, β]`: right segment at a knot, left
    /// segment at `β`. Zero outside the support.
    pub fn pdf_derivative(&self, alpha: f64) -> f64 {
        if !(0.0..=self.beta).contains(&alpha) {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => 0.0,
            Kind::Custom(t) => t.slope(t.segment(alpha)) / t.total(),
        }
    }

    /// Cumulative distribution `F(α)`, clamped to `[0, 1]`.
    pub fn cdf(&self, alpha: f64) -> f64 {
        if alpha.is_nan() {
            return f64::NAN;
        }
        if alpha <= 0.0 {
            return 0.0;
        }
        if alpha >= self.beta {
            return 1.0;
        }
        match &self.kind {
            Kind::Uniform => alpha / self.beta,
            Kind::Custom(t) => (t.integral_to(alpha) / t.total()).clamp(0.0, 1.0),
        }
    }

    /// Quantile `F⁻¹(u)` with `F⁻¹(0) = 0` and `F⁻¹(1) = β`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("quantile level {u} outside [0, 1]")));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// Quantile for `u` already known to lie in `[0, 1]`; values outside are clamped.
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return self.beta;
        }
        match &self.kind {
            Kind::Uniform => self.beta * u,
            Kind::Custom(t) => {
                let target = u * t.total();
                let i = t.cum.partition_point(|&c| c <= target).clamp(1, t.alpha.len() - 1) - 1;
                // F is quadratic on the segment: ½·s·x² + f0·x = r with x = α − α_i.
                let r = target - t.cum[i];
                let (f0, s) = (t.pdf[i], t.slope(i));
                let disc = (f0 * f0 + 2.0 * s * r).max(0.0);
                let x = if r <= 0.0 { 0.0 } else { 2.0 * r / (f0 + disc.sqrt()) };
                (t.alpha[i] + x).clamp(t.alpha[i], t.alpha[i + 1])
            }
        }
    }

    /// `K = max_{α∈[0,β]} f(α)·α`, the constant entering every convergence
    /// condition. Exactly 1 for the uniform law.
    pub fn k_constant(&self) -> f64 {
        match &self.kind {
            Kind::Uniform => 1.0,
            Kind::Custom(_) => {
                let (_, k) = numeric::maximize(|a| self.pdf(a) * a, 0.0, self.beta, K_GRID);
                k
            }
        }
    }

    /// `max_{α∈[0,β]} f(α)`; attained at a knot for tabulated densities.
    pub fn max_pdf(&self) -> f64 {
        match &self.kind {
            Kind::Uniform => 1.0 / self.beta,
            Kind::Custom(t) => t.pdf.iter().copied().fold(0.0, f64::max) / t.total(),
        }
    }

    pub fn is_nonincreasing_pdf(&self) -> bool {
        match &self.kind {
            Kind::Uniform => true,
            Kind::Custom(t) => t.pdf.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK),
        }
    }
}

fn build_table(samples: &[(f64, f64)]) -> Result<Table> {
    if samples.len() < 2 {
        return Err(Error::domain("a tabulated density needs at least two samples"));
    }
    if samples[0].0 != 0.0 {
        return Err(Error::domain(format!(
            "first density sample must be at alpha = 0, got {}",
            samples[0].0
        )));
    }
    for (i, &(a, f)) in samples.iter().enumerate() {
        if !(a.is_finite() && f.is_finite()) {
            return Err(Error::domain(format!("sample {i} is not finite")));
        }
        if f < 0.0 {
            return Err(Error::domain(format!("density is negative at alpha = {a}")));
        }
    }
    let mut cum = Vec::with_capacity(samples.len());
    cum.push(0.0);
    for (i, w) in samples.windows(2).enumerate() {
        let ((a0, f0), (a1, f1)) = (w[0], w[1]);
        if a1 <= a0 {
            return Err(Error::domain(format!("alpha must be strictly ascending (sample {})", i + 1)));
        }
        let area = 0.5 * (a1 - a0) * (f0 + f1);
        if area <= 0.0 {
            return Err(Error::domain(format!(
                "density vanishes on [{a0}, {a1}]; it must be positive inside the support"
            )));
        }
        cum.push(cum[i] + area);
    }
    Ok(Table {
        alpha: samples.iter().map(|s| s.0).collect(),
        pdf: samples.iter().map(|s| s.1).collect(),
        cum,
    })
}

/// Reads a two-column numeric CSV with the given header. Line numbers in
/// errors count the header as line 1.
pub(crate) fn read_pairs(reader: impl Read, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if found.len() != 2 || found.get(0) != Some(header[0]) || found.get(1) != Some(header[1]) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{},{}`, found `{}`", header[0], header[1], found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |idx: usize| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column `{}`: `{raw}` is not a number", header[idx]),
            })
        };
        out.push((parse(0)?, parse(1)?));
    }
    Ok(out)
}
