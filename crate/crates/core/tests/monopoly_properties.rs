mod common;

use common::*;
use nspmarket_core::*;
use proptest::prelude::*;

const STARTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn market(dist: ValuationDistribution, qos: QosModel, p: f64) -> MonopolyMarket {
    MonopolyMarket::new(dist, qos, p).unwrap()
}

#[test]
fn closed_form_agrees_on_grid() {
    for beta in [0.5, 1.0, 3.0] {
        for i in 0..8 {
            let q = 0.5 + 1.5 * i as f64 / 7.0;
            for j in 0..8 {
                let c = q * (0.01 + 0.89 * j as f64 / 7.0);
                for k in 0..=10 {
                    let p = beta * q * k as f64 / 10.0;
                    let m = market(uniform(beta), linear(q, c), p);
                    let cf = equilibrium_closed_form(&m.dist, &m.qos, p).unwrap();
                    assert!((cf - equilibrium(&m)).abs() < 1e-8, "beta={beta} q={q} c={c} p={p}");
                }
            }
        }
    }
}

#[test]
fn steep_qos_is_simulated_without_error() {
    let m = market(uniform(1.0), linear(1.0, 0.9), 0.3);
    assert!(!convergence_condition(&m.dist, &m.qos).holds);
    let tr = simulate(&m, &MonopolyVariant::Synchronous, 0.0, 10_000, 1e-10).unwrap();
    assert!(tr.states.iter().all(|l| (0.0..=1.0).contains(l)));
}

proptest! {
    #[test]
    fn equilibrium_is_a_fixed_point(d in nonincreasing_density(), g in linear_qos(0.0..0.95), t in 0.0..1.2f64) {
        let p = t * d.beta() * g.evaluate(0.0).unwrap();
        let m = market(d, g, p);
        let l = equilibrium(&m);
        prop_assert!((0.0..=1.0).contains(&l));
        prop_assert!((m.step(l).unwrap() - l).abs() < 1e-10);
    }

    #[test]
    fn equilibrium_is_nonincreasing_in_price(beta in 0.5..3.0f64, g in linear_qos(0.0..0.95)) {
        let top = beta * g.evaluate(0.0).unwrap();
        let base = market(uniform(beta), g, 0.0);
        prop_assert_eq!(equilibrium(&base), 1.0);
        let mut prev = 1.0;
        for i in 0..=60 {
            let p = top * 1.2 * i as f64 / 60.0;
            let l = equilibrium(&base.with_price(p).unwrap());
            prop_assert!(l <= prev + 1e-12);
            if p >= top {
                prop_assert_eq!(l, 0.0);
            }
            prev = l;
        }
    }

    #[test]
    fn update_map_is_nonincreasing(d in nonincreasing_density(), g in linear_qos(0.0..0.99), t in 0.0..1.0f64) {
        let p = t * d.beta() * g.evaluate(0.0).unwrap();
        let m = market(d, g, p);
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let v = m.step(i as f64 / 200.0).unwrap();
            prop_assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn condition_implies_global_convergence(d in nonincreasing_density(), g in linear_qos(0.0..0.9), t in 0.0..1.0f64) {
        let cond = convergence_condition(&d, &g);
        prop_assume!(cond.holds && cond.lhs < 0.98 * cond.rhs);
        let p = t * d.beta() * g.evaluate(0.0).unwrap();
        let m = market(d, g, p);
        let target = equilibrium(&m);
        for l0 in STARTS {
            let tr = simulate(&m, &MonopolyVariant::Synchronous, l0, 10_000, 1e-12).unwrap();
            prop_assert!(tr.converged);
            prop_assert!((tr.last() - target).abs() < 1e-8);
        }
    }

    #[test]
    fn partial_condition_implies_convergence(g in linear_qos(0.0..0.95), eps in 0.2..=1.0f64, t in 0.0..1.0f64) {
        let d = uniform(1.0);
        let cond = convergence_condition_partial(&d, &g, eps).unwrap();
        prop_assume!(cond.holds && cond.lhs < 0.98 * cond.rhs);
        let p = t * g.evaluate(0.0).unwrap();
        let m = market(d, g, p);
        let target = equilibrium(&m);
        for l0 in STARTS {
            let tr = simulate(&m, &MonopolyVariant::Partial { epsilon: eps }, l0, 10_000, 1e-12).unwrap();
            prop_assert!(tr.converged);
            prop_assert!((tr.last() - target).abs() < 1e-8);
        }
    }

    #[test]
    fn linear_form_matches_general_condition(d in nonincreasing_density(), g in linear_qos(0.0..0.99)) {
        let a = convergence_condition(&d, &g);
        let b = convergence_condition_linear(&d, &g).unwrap();
        prop_assume!((a.lhs - a.rhs).abs() > 1e-9);
        prop_assert_eq!(a.holds, b.holds);
    }

    #[test]
    fn costless_switching_is_synchronous(g in linear_qos(0.0..0.95), t in 0.0..1.0f64, a0 in 0.0..=1.0f64) {
        let d = uniform(1.0);
        let p = t * g.evaluate(0.0).unwrap();
        let m = market(d, g, p);
        let sw = MonopolyVariant::SwitchingCost { c_s: 0.0 };
        let mut a = a0;
        let mut l = 1.0 - a0;
        for _ in 0..30 {
            a = step_variant(&m, &sw, a).unwrap();
            l = m.step(l).unwrap();
            prop_assert!((1.0 - a - l).abs() < 1e-12);
        }
    }

    #[test]
    fn band_is_exactly_the_fixed_set(g in linear_qos(0.0..0.95), t in 0.05..1.0f64, cs in 0.0..0.5f64) {
        let d = uniform(1.0);
        let p = t * g.evaluate(0.0).unwrap();
        let m = market(d, g, p);
        let band = switching_cost_equilibrium_band(&m, cs).unwrap();
        let v = MonopolyVariant::SwitchingCost { c_s: cs };
        for i in 0..=400 {
            let a = i as f64 / 400.0;
            let fixed = step_variant(&m, &v, a).unwrap() == a;
            let inside = band.contains(a);
            // grid points within rounding distance of an end are ambiguous
            let near_end = (a - band.lo).abs() < 1e-9 || (a - band.hi).abs() < 1e-9;
            prop_assert!(near_end || fixed == inside, "a={} band=[{}, {}]", a, band.lo, band.hi);
        }
    }
}
