//! Regenerative sampling of the stationary restricted chain: the empty
//! state has mass `1 - t`, and the minimum is uniform in exponential
//! coordinates.
//!
//! ```text
//! cargo run --release --example stationary -- [states] [seed]
//! ```

use canyon::excursion::{stationary_min_uniformity, DEFAULT_HORIZON};

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let states: u64 = args.next().map_or(10_000_000, |s| s.parse().expect("states"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    for q in [0.2, 1.0 - (-0.5f64).exp(), 0.5, 0.6] {
        let r = stationary_min_uniformity(q, states, seed, DEFAULT_HORIZON)?;
        let s = &r.summary;
        println!(
            "q = {q:.5} (t = {:.5}): {} cycles, {} states",
            r.t_plus, s.counts.cycles, s.counts.states
        );
        println!(
            "  empty fraction {:.5}, target {:.5}",
            s.empty_fraction, s.empty_fraction_target
        );
        println!("  sup_s |P[N > s] - (1 - s)| = {:.5}", r.max_deviation);
        for p in r.grid.iter().step_by(25) {
            println!("  s = {:.3}: {:.5} vs {:.5}", p.s, p.empirical, p.target);
        }
    }
    Ok(())
}
