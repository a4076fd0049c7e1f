//! Brackets the recurrence/transience transition by bisection on the
//! finite-horizon survival probability.
//!
//! ```text
//! cargo run --release --example critical_point -- [horizon] [replicas] [seed]
//! ```

use canyon::criticality::{estimate_critical_point, CriticalParams};
use canyon::P_C;

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon: u64 = args.next().map_or(100_000, |s| s.parse().expect("horizon"));
    let replicas: u64 = args.next().map_or(10_000, |s| s.parse().expect("replicas"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let est = estimate_critical_point(&CriticalParams {
        horizon,
        replicas,
        seed,
        ..CriticalParams::default()
    })?;
    for p in &est.probes {
        let s = &p.survival;
        println!(
            "q = {:.6}  survivors {:>5}/{:<6} CI [{:.5}, {:.5}]  {}{}",
            s.q,
            s.survivors,
            s.replicas,
            s.ci_low,
            s.ci_high,
            p.class.label(),
            if p.tie_break { " (tie-break)" } else { "" }
        );
    }
    println!("bracket  [{:.6}, {:.6}]", est.bracket.0, est.bracket.1);
    println!("estimate {:.6}  (p_c = {P_C:.6})", est.estimate);
    Ok(())
}
