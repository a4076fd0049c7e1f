//! Largest value of the full chain's minimum over a late window, for
//! several seeds. It settles near `p_c = 1 - 1/e`.
//!
//! ```text
//! cargo run --release --example running_max -- [steps] [window_start] [seeds]
//! ```

use canyon::criticality::running_max_min;
use canyon::P_C;

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(10_000_000, |s| s.parse().expect("steps"));
    let start: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("window start"));
    let seeds: u64 = args.next().map_or(20, |s| s.parse().expect("seeds"));

    let mut inside = 0;
    for seed in 0..seeds {
        let r = running_max_min(seed, steps, start)?;
        let ok = (0.61..=0.65).contains(&r.value);
        inside += ok as u64;
        println!("seed {seed:>3}  max M_k = {:.6}{}", r.value, if ok { "" } else { "  (outside [0.61, 0.65])" });
    }
    println!("{inside}/{seeds} seeds in [0.61, 0.65]; p_c = {P_C:.6}");
    Ok(())
}
