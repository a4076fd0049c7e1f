//! Fits the return-time tail `P[tau > k] ~ k^{-a}` at, below and above the
//! critical point. The value of `a` at `p_c` is a conjecture check only.
//!
//! ```text
//! cargo run --release --example tail_exponent -- [replicas] [seed]
//! ```

use canyon::criticality::{estimate_tail_exponent, geometric_grid, TailOptions};
use canyon::P_C;

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let replicas: u64 = args.next().map_or(100_000, |s| s.parse().expect("replicas"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let grid = geometric_grid(8, 16);
    let opts = TailOptions {
        discard_first_decade: false,
        ..TailOptions::default()
    };
    for q in [0.3, P_C, 0.8] {
        let fit = estimate_tail_exponent(q, &grid, replicas, seed, &opts)?;
        println!("q = {q:.6}: {:?}", fit.verdict);
        if let (Some(a), Some(r2)) = (fit.exponent, fit.fit_quality) {
            println!("  exponent {a:.4} +- {:.4}, R^2 {r2:.5}", fit.stderr.unwrap_or(f64::NAN));
        }
        for p in &fit.points {
            println!("  k = {:>6}  P[tau > k] = {:.5}", p.k, p.survival);
        }
        for w in &fit.warnings {
            println!("  warning: {w}");
        }
    }
    println!("{}", canyon::criticality::TAIL_LABEL);
    Ok(())
}
