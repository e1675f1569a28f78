mod common;

use common::*;
use nspmarket_core::*;
use proptest::prelude::*;

fn tech(name: &str, q: f64, c: f64, k: f64) -> Technology {
    Technology::new(name, linear(q, c), k).unwrap()
}

#[test]
fn duopoly_revenue_never_exceeds_monopoly_revenue() {
    let techs = vec![tech("split", 1.633, 0.088, 0.0), tech("common", 1.611, 0.129, 0.0)];
    let mono = SelectionProblem::new(techs.clone(), MarketMode::NoIncumbent, uniform(1.0)).unwrap();
    let duo = SelectionProblem::new(techs, MarketMode::OneIncumbent(1.687), uniform(1.0)).unwrap();
    for t in &mono.technologies[..2] {
        let rm = technology_revenue(&mono, t).unwrap();
        let rd = technology_revenue(&duo, t).unwrap();
        assert!(rd < rm, "{}: {rd} vs {rm}", t.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn selection_is_nonnegative_argmax(
        qs in prop::collection::vec((0.5..2.0f64, 0.0..0.9f64, 0.0..0.6f64), 1..4),
        duopoly in any::<bool>(),
    ) {
        let techs: Vec<Technology> =
            qs.iter().enumerate().map(|(i, &(q, r, k))| tech(&format!("t{i}"), q, r * q, k)).collect();
        let mode = if duopoly { MarketMode::OneIncumbent(2.5) } else { MarketMode::NoIncumbent };
        let problem = SelectionProblem::new(techs, mode, uniform(1.0)).unwrap();
        let not_enter = problem.technologies.last().unwrap();
        prop_assert!(not_enter.is_not_enter());
        prop_assert_eq!(technology_profit(&problem, not_enter).unwrap(), 0.0);
        let sel = select(&problem).unwrap();
        let chosen = sel.profits.iter().find(|p| p.0 == sel.chosen.name).unwrap().1;
        prop_assert!(chosen >= 0.0);
        prop_assert!(sel.profits.iter().all(|p| p.1 <= chosen));
    }

    #[test]
    fn map_cells_match_direct_selection(k1 in 0.0..0.5f64, k2 in 0.0..0.5f64) {
        let base = vec![tech("split", 1.633, 0.088, 0.0), tech("common", 1.611, 0.129, 0.0)];
        let problem = SelectionProblem::new(base, MarketMode::NoIncumbent, uniform(1.0)).unwrap();
        let map = decision_map(&problem, &[k1], &[k2]).unwrap();
        let direct = SelectionProblem::new(
            vec![tech("split", 1.633, 0.088, k1), tech("common", 1.611, 0.129, k2)],
            MarketMode::NoIncumbent,
            uniform(1.0),
        ).unwrap();
        prop_assert_eq!(&map.cells[0][0], &select(&direct).unwrap().chosen.name);
    }
}
