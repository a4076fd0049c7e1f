//! Checks the pathwise comparison properties on random starts with shared
//! arrivals and reports any violation.
//!
//! ```text
//! cargo run --release --example coupling -- [trials] [steps] [seed]
//! ```

use std::time::Instant;

use canyon::coupling::{check, Property};

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map_or(10_000, |s| s.parse().expect("trials"));
    let steps: u64 = args.next().map_or(1_000, |s| s.parse().expect("steps"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    for p in Property::ALL {
        let start = Instant::now();
        let r = check(p, trials, steps, seed)?;
        println!(
            "{:<20} {} trials x {} steps: {} checks, {} violations ({:.1} s)",
            p.label(),
            r.trials,
            r.steps,
            r.checks,
            r.violations,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
