//! Right of the critical point the count left of `t` grows linearly; its
//! rate is compared with the lower bound `sup_s (e^{-s} - e^{-t}) - (1 - s)`.
//!
//! ```text
//! cargo run --release --example growth -- [steps] [seed]
//! ```

use canyon::criticality::empirical_growth;
use canyon::ExpPos;

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("steps"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    for t in [1.1, 1.5, 2.0, 3.0, 5.0] {
        let r = empirical_growth(ExpPos::new(t)?, steps, seed)?;
        println!(
            "t = {t} (q = {:.5}): F_t(n)/n = {:.5}, lower bound {:.5}",
            r.q, r.rate, r.bound
        );
    }
    Ok(())
}
