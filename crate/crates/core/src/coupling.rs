//! Pathwise comparison properties of the chains, checked on random
//! configurations driven by a shared arrival sequence.
//!
//! * Inclusion: if `x ⊆ y`, the full chains from `x` and `y` stay nested.
//! * Ordered domination: for restricted chains, if `|x| <= |y|` and the
//!   `i`-th largest element of `x` is at most the `i`-th largest of `y`,
//!   that stays true.
//! * Restriction: the full chain intersected with `[0, q)` is the restricted
//!   chain fed the induced arrivals.

use std::collections::HashMap;

use serde::Serialize;

use crate::engine::{FullConfig, RestrictedArrival, RestrictedConfig};
use crate::error::Result;
use crate::position::UnitPos;
use crate::rng::RngStream;
use crate::stats::map_blocks;

const BLOCK: u64 = 64;

/// Largest random starting configuration.
const MAX_START: u64 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Inclusion,
    OrderedDomination,
    Restriction,
}

impl Property {
    pub const ALL: [Property; 3] = [
        Property::Inclusion,
        Property::OrderedDomination,
        Property::Restriction,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Property::Inclusion => "inclusion",
            Property::OrderedDomination => "ordered-domination",
            Property::Restriction => "restriction",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub property: Property,
    pub trials: u64,
    pub steps: u64,
    pub checks: u64,
    pub violations: u64,
    /// `(trial, step)` of the first violation in trial order.
    pub first_violation: Option<(u64, u64)>,
}

#[derive(Default)]
struct Tally {
    checks: u64,
    violations: u64,
    first: Option<(u64, u64)>,
}

impl Tally {
    fn record(&mut self, ok: bool, trial: u64, step: u64) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            self.first.get_or_insert((trial, step));
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.violations += other.violations;
        self.first = self.first.or(other.first);
        self
    }
}

/// Storage reused across the trials of one block.
#[derive(Default)]
struct Scratch {
    x: FullConfig,
    y: FullConfig,
    a: Vec<UnitPos>,
    b: Vec<UnitPos>,
}

fn random_set(rng: &mut RngStream, below: f64) -> Vec<UnitPos> {
    let n = rng.below(MAX_START + 1);
    (0..n)
        .map(|_| UnitPos::new(rng.uniform().value() * below).expect("scaled into [0, 1)"))
        .collect()
}

/// Runs `trials` independent trials of `steps` steps; trial `i` uses
/// `RngStream::new(seed, i)` for its start and its arrivals.
pub fn check(property: Property, trials: u64, steps: u64, seed: u64) -> Result<CouplingReport> {
    let tally = map_blocks(trials, BLOCK, |range| {
        let mut t = Tally::default();
        let mut s = Scratch::default();
        for i in range {
            let mut rng = RngStream::new(seed, i);
            match property {
                Property::Inclusion => inclusion_trial(&mut rng, steps, i, &mut t, &mut s),
                Property::OrderedDomination => domination_trial(&mut rng, steps, i, &mut t, &mut s),
                Property::Restriction => restriction_trial(&mut rng, steps, i, &mut t, &mut s),
            }
        }
        t
    })
    .into_iter()
    .fold(Tally::default(), Tally::merge);
    Ok(CouplingReport {
        property,
        trials,
        steps,
        checks: tally.checks,
        violations: tally.violations,
        first_violation: tally.first,
    })
}

/// Multiset inclusion, tracked through the reported step outcomes and
/// confirmed on the stored particles at the end.
fn inclusion_trial(rng: &mut RngStream, steps: u64, trial: u64, t: &mut Tally, s: &mut Scratch) {
    let y_start = random_set(rng, 1.0);
    let x_start: Vec<UnitPos> = y_start.iter().copied().filter(|_| rng.below(2) == 0).collect();
    let (x, y) = (&mut s.x, &mut s.y);
    x.reset(x_start.iter().copied());
    y.reset(y_start.iter().copied());

    // surplus[p] = multiplicity in y minus multiplicity in x.
    let mut surplus: HashMap<u64, i64> = HashMap::new();
    let mut deficits = 0u64;
    let mut bump = |p: UnitPos, d: i64, deficits: &mut u64| {
        let e = surplus.entry(p.value().to_bits()).or_insert(0);
        let before = *e < 0;
        *e += d;
        match (before, *e < 0) {
            (false, true) => *deficits += 1,
            (true, false) => *deficits -= 1,
            _ => {}
        }
    };
    for p in &y_start {
        bump(*p, 1, &mut deficits);
    }
    for p in &x_start {
        bump(*p, -1, &mut deficits);
    }

    for k in 1..=steps {
        let u = rng.uniform();
        let ox = x.step(u);
        let oy = y.step(u);
        if let Some(p) = ox.removed() {
            bump(p, 1, &mut deficits);
        }
        if let Some(p) = oy.removed() {
            bump(p, -1, &mut deficits);
        }
        t.record(deficits == 0 && x.len() <= y.len(), trial, k);
    }
    t.record(is_submultiset(&x.sorted(), &y.sorted()), trial, steps);
}

fn is_submultiset(small: &[UnitPos], big: &[UnitPos]) -> bool {
    let mut j = 0;
    for p in small {
        while j < big.len() && big[j] < *p {
            j += 1;
        }
        if j == big.len() || big[j] != *p {
            return false;
        }
        j += 1;
    }
    true
}

/// `|x| <= |y|` and, both listed in decreasing order, `x_i <= y_i`.
pub fn ordered_dominated(x: &[UnitPos], y: &[UnitPos]) -> bool {
    x.len() <= y.len() && x.iter().rev().zip(y.iter().rev()).all(|(a, b)| a <= b)
}

fn domination_trial(rng: &mut RngStream, steps: u64, trial: u64, t: &mut Tally, s: &mut Scratch) {
    let q = UnitPos::new(0.3 + 0.6 * rng.uniform().value()).expect("in [0.3, 0.9)");
    let mut y_start = random_set(rng, q.value());
    y_start.sort_unstable_by(|a, b| b.cmp(a));
    let keep = rng.below(y_start.len() as u64 + 1) as usize;
    let x_start: Vec<UnitPos> = y_start[..keep]
        .iter()
        .map(|p| UnitPos::new(p.value() * rng.uniform().value()).expect("below p"))
        .collect();
    let mut x = RestrictedConfig::from_positions(q, x_start).expect("below the cutoff");
    let mut y = RestrictedConfig::from_positions(q, y_start).expect("below the cutoff");
    let mut dominated = |x: &RestrictedConfig, y: &RestrictedConfig| {
        x.sorted_into(&mut s.a);
        y.sorted_into(&mut s.b);
        ordered_dominated(&s.a, &s.b)
    };
    t.record(dominated(&x, &y), trial, 0);
    for k in 1..=steps {
        let a = RestrictedArrival::from_uniform(rng.uniform(), q);
        x.step(a).expect("arrival below the cutoff");
        y.step(a).expect("arrival below the cutoff");
        t.record(dominated(&x, &y), trial, k);
    }
}

fn restriction_trial(rng: &mut RngStream, steps: u64, trial: u64, t: &mut Tally, s: &mut Scratch) {
    let q = UnitPos::new(rng.uniform().value()).expect("uniform");
    let full = &mut s.x;
    full.reset(random_set(rng, 1.0));
    let mut restricted = full.restrict(q);
    for k in 1..=steps {
        let u = rng.uniform();
        full.step(u);
        restricted
            .step(RestrictedArrival::from_uniform(u, q))
            .expect("arrival below the cutoff");
        t.record(full.restrict(q).sorted() == restricted.sorted(), trial, k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(v: &[f64]) -> Vec<UnitPos> {
        v.iter().map(|&p| UnitPos::new(p).unwrap()).collect()
    }

    #[test]
    fn domination_examples() {
        assert!(ordered_dominated(&pos(&[0.2, 0.5]), &pos(&[0.1, 0.3, 0.6])));
        assert!(!ordered_dominated(&pos(&[0.2, 0.7]), &pos(&[0.1, 0.3, 0.6])));
        assert!(!ordered_dominated(&pos(&[0.1, 0.2]), &pos(&[0.6])));
        assert!(ordered_dominated(&[], &[]));
    }

    #[test]
    fn submultiset_examples() {
        assert!(is_submultiset(&pos(&[0.2]), &pos(&[0.1, 0.2])));
        assert!(!is_submultiset(&pos(&[0.2, 0.2]), &pos(&[0.1, 0.2])));
        assert!(!is_submultiset(&pos(&[0.3]), &pos(&[0.1, 0.2])));
    }

    #[test]
    fn no_violations_in_small_runs() {
        for p in Property::ALL {
            let r = check(p, 200, 300, 11).unwrap();
            assert_eq!(r.violations, 0, "{r:?}");
            assert!(r.checks >= 200 * 300);
        }
    }
}
