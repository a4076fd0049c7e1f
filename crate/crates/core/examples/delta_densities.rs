//! Frequencies of the four increment symbols of the count left of `t`,
//! against `((1-t)e^{-t}, 1-(1+t)e^{-t}, te^{-t}, te^{-t})`.
//!
//! ```text
//! cargo run --release --example delta_densities -- [steps] [burnin] [seed]
//! ```

use canyon::excursion::{estimate_delta_densities, DeltaSymbol};

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(10_000_000, |s| s.parse().expect("steps"));
    let burnin: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("burnin"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    for e in estimate_delta_densities(&[0.2, 0.5, 0.8], steps, burnin, seed)? {
        println!("t = {} (q = {:.5}), max deviation {:.5}", e.t, e.q, e.max_abs_deviation());
        for s in DeltaSymbol::ALL {
            println!(
                "  {:<7} {:.5} +- {:.5}   closed form {:.5}",
                format!("{s:?}"),
                e.densities.get(s),
                e.stderr.get(s),
                e.closed_form.get(s)
            );
        }
    }
    Ok(())
}
