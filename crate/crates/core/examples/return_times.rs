//! Mean return time of the restricted chain to the empty set against
//! `1 / (1 + ln(1 - q))`, and the first few exact probabilities.
//!
//! ```text
//! cargo run --release --example return_times -- [excursions] [seed]
//! ```

use canyon::excursion::{estimate_mean_return, DEFAULT_HORIZON};
use canyon::oracle::{eval_pmf, exact_return_pmf};
use canyon::stats::Z_95;
use canyon::P_C;

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("excursions"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let pmf = exact_return_pmf(6)?;
    for q in [0.1, 0.3, 0.5, 0.6, 0.7] {
        // Above p_c a positive fraction never returns; cap those runs early.
        let horizon = if q < P_C { DEFAULT_HORIZON } else { 10_000 };
        let r = estimate_mean_return(q, n, seed, horizon)?;
        let (lo, hi) = r.estimate.interval(Z_95);
        match r.closed_form.finite() {
            Some(c) => println!(
                "q = {q}: mean {:.5} [{lo:.5}, {hi:.5}], closed form {c:.5}",
                r.estimate.mean
            ),
            None => println!("q = {q}: mean {:.1} (closed form infinite)", r.estimate.mean),
        }
        for w in &r.warnings {
            println!("  warning: {w}");
        }
        let row: Vec<String> = (1..=6)
            .map(|k| {
                let exact = eval_pmf(&pmf[k - 1], q).expect("q in [0, 1]");
                format!("{k}: {:.4}/{exact:.4}", r.empirical_pmf(k))
            })
            .collect();
        println!("  P[tau = k] simulated/exact  {}", row.join("  "));
    }
    Ok(())
}
