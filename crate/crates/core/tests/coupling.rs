use canyon::coupling::{check, ordered_dominated, Property};
use canyon::{FullConfig, RestrictedArrival, RestrictedConfig, UnitPos};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = UnitPos> {
    (0.0..1.0f64).prop_map(|p| UnitPos::new(p).unwrap())
}

fn contains_all(big: &[UnitPos], small: &[UnitPos]) -> bool {
    let mut big = big.to_vec();
    small.iter().all(|p| match big.iter().position(|q| q == p) {
        Some(i) => {
            big.swap_remove(i);
            true
        }
        None => false,
    })
}

proptest! {
    #[test]
    fn nested_full_chains_stay_nested(
        y in prop::collection::vec(unit(), 0..25),
        mask in prop::collection::vec(any::<bool>(), 25),
        arrivals in prop::collection::vec(unit(), 0..300),
    ) {
        let x_start: Vec<UnitPos> = y.iter().zip(&mask).filter(|(_, m)| **m).map(|(p, _)| *p).collect();
        let mut x = FullConfig::from_positions(x_start);
        let mut yc = FullConfig::from_positions(y);
        for u in arrivals {
            x.step(u);
            yc.step(u);
            prop_assert!(contains_all(&yc.sorted(), &x.sorted()));
        }
    }

    #[test]
    fn ordered_domination_is_preserved(
        cutoff in 0.05..0.95f64,
        y in prop::collection::vec(0.0..1.0f64, 0..25),
        shrink in prop::collection::vec(0.0..=1.0f64, 0..25),
        arrivals in prop::collection::vec(0.0..1.0f64, 0..300),
    ) {
        let q = UnitPos::new(cutoff).unwrap();
        let mut y: Vec<f64> = y.iter().map(|p| p * cutoff).collect();
        y.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let x: Vec<UnitPos> = y.iter().zip(&shrink).map(|(p, s)| UnitPos::new(p * s).unwrap()).collect();
        let mut xc = RestrictedConfig::from_positions(q, x).unwrap();
        let mut yc = RestrictedConfig::from_positions(q, y.into_iter().map(|p| UnitPos::new(p).unwrap())).unwrap();
        prop_assert!(ordered_dominated(&xc.sorted(), &yc.sorted()));
        for u in arrivals {
            let a = RestrictedArrival::from_uniform(UnitPos::new(u).unwrap(), q);
            xc.step(a).unwrap();
            yc.step(a).unwrap();
            prop_assert!(ordered_dominated(&xc.sorted(), &yc.sorted()));
        }
    }

    #[test]
    fn restriction_commutes_with_stepping(
        cutoff in unit(),
        start in prop::collection::vec(unit(), 0..25),
        arrivals in prop::collection::vec(unit(), 0..300),
    ) {
        let mut full = FullConfig::from_positions(start);
        let mut restricted = full.restrict(cutoff);
        for u in arrivals {
            full.step(u);
            restricted.step(RestrictedArrival::from_uniform(u, cutoff)).unwrap();
            prop_assert_eq!(full.restrict(cutoff).sorted(), restricted.sorted());
        }
    }

    #[test]
    fn size_deltas_and_removed_minimum(
        cutoff in unit(),
        arrivals in prop::collection::vec(unit(), 0..300),
    ) {
        let mut full = FullConfig::new();
        let mut restricted = RestrictedConfig::new(cutoff);
        for u in arrivals {
            let (n, min) = (full.len(), full.peek_min());
            let o = full.step(u);
            prop_assert!(matches!(full.len() as i64 - n as i64, 0 | 1));
            prop_assert_eq!(full.len() as i64 - n as i64, o.size_delta());
            if let Some(p) = o.removed() {
                prop_assert_eq!(Some(p), min);
            }

            let (n, min) = (restricted.len(), restricted.peek_min());
            let o = restricted.step(RestrictedArrival::from_uniform(u, cutoff)).unwrap();
            prop_assert!(matches!(restricted.len() as i64 - n as i64, -1..=1));
            prop_assert_eq!(restricted.len() as i64 - n as i64, o.size_delta());
            if let Some(p) = o.removed() {
                prop_assert_eq!(Some(p), min);
            }
            prop_assert!(restricted.sorted().iter().all(|p| *p <= cutoff));
        }
    }
}

#[test]
fn randomized_trials_have_no_violations() {
    for p in Property::ALL {
        let r = check(p, 1_000, 500, 77).unwrap();
        assert_eq!(r.violations, 0, "{r:?}");
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| check(Property::OrderedDomination, 300, 100, 5).unwrap())
    };
    assert_eq!(run(1), run(4));
}
