//! One-dimensional root finding and maximization shared by the solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Evenly spaced grid of `n >= 2` points on `[a, b]`, endpoints exact.
pub(crate) fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    debug_assert!(n >= 2);
    let last = n - 1;
    (0..n).map(move |i| {
        if i == last {
            b
        } else {
            a + (b - a) * i as f64 / last as f64
        }
    })
}

/// Bisection for the root of a function that is non-negative at `lo` and
/// non-positive at `hi`. Stops when `|f(mid)| < ftol` or the bracket can no
/// longer be split.
pub(crate) fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, ftol: f64) -> f64 {
    let f_lo = f(lo);
    if f_lo.abs() < ftol {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi.abs() < ftol {
        return hi;
    }
    debug_assert!(f_lo > 0.0 && f_hi < 0.0, "bracket does not straddle a root");
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() < ftol {
            return mid;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection on `[lo, hi]` for the boundary of a monotone predicate
/// (`pred(lo)` true, `pred(hi)` false) down to width `xtol`. Returns the last
/// point where the predicate holds and the first where it fails.
pub(crate) fn bisect_predicate(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub(crate) fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes `f` on `[a, b]`: an `n`-point scan (ties go to the smaller
/// abscissa), golden-section refinement around the best grid point, then a
/// safeguarded Newton polish on a central-difference derivative. The result
/// is never worse than the best grid point.
pub(crate) fn maximize(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let step = (b - a) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_x = a;
    let mut best_f = f64::NEG_INFINITY;
    for (i, x) in grid(a, b, n).enumerate() {
        let v = f(x);
        if v > best_f {
            best_i = i;
            best_x = x;
            best_f = v;
        }
    }
    let lo = if best_i == 0 { a } else { a + step * (best_i - 1) as f64 };
    let hi = if best_i + 1 >= n { b } else { (a + step * (best_i + 1) as f64).min(b) };
    let (mut x, mut fx) = golden_max(&f, lo, hi);
    if fx < best_f {
        x = best_x;
        fx = best_f;
    }
    let (x, fx) = polish(&f, x, fx, lo, hi);
    // Golden section never lands on an end of the interval; near a maximum
    // at the boundary the objective is flat to rounding there.
    if (best_i == 0 || best_i + 1 == n) && best_f >= fx {
        return (best_x, best_f);
    }
    (x, fx)
}

/// Up to a few Newton steps on the central-difference derivative, each kept
/// only if it stays inside `[lo, hi]` and does not lower the objective.
fn polish(f: &impl Fn(f64) -> f64, mut x: f64, mut fx: f64, lo: f64, hi: f64) -> (f64, f64) {
    const H: f64 = 1e-5;
    for _ in 0..4 {
        if x - H < lo || x + H > hi {
            break;
        }
        let fp = f(x + H);
        let fm = f(x - H);
        let d1 = (fp - fm) / (2.0 * H);
        let d2 = (fp - 2.0 * fx + fm) / (H * H);
        if !(d2 < 0.0) || !d1.is_finite() {
            break;
        }
        let step = -d1 / d2;
        if step.abs() > H {
            // outside the quadratic model's trust region
            break;
        }
        let xn = x + step;
        let fxn = f(xn);
        let slack = 4.0 * f64::EPSILON * fx.abs().max(1e-300);
        if !(fxn >= fx - slack) {
            break;
        }
        x = xn;
        fx = fxn.max(fx);
        if step.abs() < 1e-15 {
            break;
        }
    }
    (x, fx)
}
