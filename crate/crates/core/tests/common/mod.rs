#![allow(dead_code)]

use nspmarket_core::{QosModel, ValuationDistribution};
use proptest::prelude::*;

pub fn uniform(beta: f64) -> ValuationDistribution {
    ValuationDistribution::uniform(beta).unwrap()
}

pub fn linear(q_bar: f64, c: f64) -> QosModel {
    QosModel::linear(q_bar, c).unwrap()
}

/// Non-increasing tabulated density on `[0, beta]` with equispaced knots.
pub fn stepdown_density(beta: f64, base: f64, drops: &[f64]) -> ValuationDistribution {
    let n = drops.len() + 1;
    let mut values = vec![base; n];
    for i in (0..n - 1).rev() {
        values[i] = values[i + 1] + drops[i];
    }
    let samples: Vec<(f64, f64)> =
        values.iter().enumerate().map(|(i, &f)| (if i == n - 1 { beta } else { beta * i as f64 / (n - 1) as f64 }, f)).collect();
    ValuationDistribution::custom_normalized(&samples).unwrap()
}

pub fn nonincreasing_density() -> impl Strategy<Value = ValuationDistribution> {
    (0.5..3.0f64, 0.01..1.0f64, prop::collection::vec(0.0..1.0f64, 1..8))
        .prop_map(|(beta, base, drops)| stepdown_density(beta, base, &drops))
}

/// Linear QoS with `c/q_bar` drawn from `ratio`.
pub fn linear_qos(ratio: std::ops::Range<f64>) -> impl Strategy<Value = QosModel> {
    (0.5..2.0f64, ratio).prop_map(|(q, r)| linear(q, r * q))
}

/// Independent maximizer: dense scan, then golden section on the
/// neighbouring cells.
pub fn argmax(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let n = 4001;
    let h = (b - a) / (n - 1) as f64;
    let (mut bi, mut bf) = (0, f64::NEG_INFINITY);
    for i in 0..n {
        let v = f((a + h * i as f64).min(b));
        if v > bf {
            bi = i;
            bf = v;
        }
    }
    let (mut lo, mut hi) = ((a + h * bi as f64 - h).max(a), (a + h * bi as f64 + h).min(b));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if f(x1) >= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    if fx >= bf {
        (x, fx)
    } else {
        ((a + h * bi as f64).min(b), bf)
    }
}
