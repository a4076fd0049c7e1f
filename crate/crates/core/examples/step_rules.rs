//! The two step rules on small hand-picked configurations, then a short
//! traced run.
//!
//! ```text
//! cargo run --example step_rules
//! ```

use canyon::engine::{run, RunMode, RunSpec, StepOutcome, StepRecord};
use canyon::{
    step_full, step_restricted, to_exp, FullConfig, RestrictedArrival, RestrictedConfig, UnitPos,
};

fn p(x: f64) -> UnitPos {
    UnitPos::new(x).expect("position in [0, 1)")
}

fn show(v: &[UnitPos]) -> String {
    let inner: Vec<String> = v.iter().map(|x| format!("{}", x.value())).collect();
    format!("{{{}}}", inner.join(", "))
}

fn describe(o: StepOutcome) -> String {
    match o {
        StepOutcome::Displaced(x) | StepOutcome::RemovedMin(x) => {
            format!("{} {}", o.label(), x.value())
        }
        _ => o.label().to_string(),
    }
}

fn main() -> canyon::Result<()> {
    println!("full chain: add u, and remove the minimum if it lies left of u");
    for (start, u) in [(vec![], 0.4), (vec![0.5], 0.3), (vec![0.5], 0.7)] {
        let mut cfg = FullConfig::from_positions(start.iter().map(|&x| p(x)));
        let before = show(&cfg.sorted());
        let outcome = step_full(&mut cfg, p(u));
        println!("  {before} + {u} -> {} ({})", show(&cfg.sorted()), describe(outcome));
    }
    println!("  minimum of the empty set is the sentinel {}", FullConfig::new().minimum());

    println!("restricted chain on [0, 0.7]: outside arrivals only remove the minimum");
    let q = p(0.7);
    for arrival in [
        RestrictedArrival::Outside,
        RestrictedArrival::Inside(p(0.1)),
        RestrictedArrival::Inside(p(0.5)),
    ] {
        let mut cfg = RestrictedConfig::from_positions(q, [p(0.2), p(0.6)])?;
        let outcome = step_restricted(&mut cfg, arrival)?;
        let label = match arrival {
            RestrictedArrival::Outside => "outside".to_string(),
            RestrictedArrival::Inside(x) => x.value().to_string(),
        };
        println!("  {{0.2, 0.6}} + {label} -> {} ({})", show(&cfg.sorted()), describe(outcome));
    }
    let err = step_restricted(&mut RestrictedConfig::new(q), RestrictedArrival::Inside(p(0.9)));
    println!("  inside arrival above the cutoff: {}", err.unwrap_err());

    println!("exponential coordinates: t = -ln(1 - q)");
    for q in [0.0, 0.5, 1.0 - (-1.0f64).exp()] {
        println!("  q = {q:.6} -> t = {:.6}", to_exp(q)?.value());
    }

    println!("ten steps of the full chain with a count at 0.5 (seed 1)");
    let spec = RunSpec {
        seed: 1,
        replica: 0,
        steps: 10,
        mode: RunMode::Full { thresholds: vec![p(0.5)] },
        stride: 1,
    };
    let mut trace = |r: &StepRecord<'_>| {
        println!(
            "  k={:>2} {:<9} min={:.4} size={} count<=0.5: {}",
            r.k,
            r.outcome.label(),
            r.minimum,
            r.size,
            r.counts[0]
        );
    };
    run(&spec, &mut [&mut trace])?;
    Ok(())
}
