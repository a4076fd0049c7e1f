use canyon::criticality::{
    empirical_growth, estimate_survival, growth_bound, running_max_min,
};
use canyon::{ExpPos, P_C};

#[test]
fn subcritical_excursions_all_return() {
    for q in [0.3, 0.5, 0.6] {
        let s = estimate_survival(q, 1_000_000, 10_000, 17).unwrap();
        assert_eq!(s.survivors, 0, "q = {q}");
    }
}

#[test]
fn supercritical_survival_is_positive() {
    let s = estimate_survival(0.8, 100_000, 10_000, 17).unwrap();
    assert!(s.ci_low > 0.0, "{s:?}");
}

#[test]
fn growth_rate_exceeds_its_lower_bound() {
    for t in [1.2, 2.0, 3.0] {
        let r = empirical_growth(ExpPos::new(t).unwrap(), 1_000_000, 3).unwrap();
        assert!(r.rate >= r.bound - 0.02, "{r:?}");
        assert_eq!(r.bound, growth_bound(ExpPos::new(t).unwrap()).unwrap());
    }
}

#[test]
fn late_running_max_of_minimum_sits_at_p_c() {
    let inside = (0..20)
        .filter(|&seed| {
            let v = running_max_min(seed, 10_000_000, 1_000_000).unwrap().value;
            (0.61..=0.65).contains(&v)
        })
        .count();
    assert!(inside >= 19, "{inside}/20 seeds in [0.61, 0.65]");
}

#[test]
fn early_minima_can_exceed_p_c() {
    // M_1 = U_1 is uniform, so some seed puts it right of p_c.
    assert!((0..20).any(|seed| running_max_min(seed, 100, 0).unwrap().value > P_C));
}
