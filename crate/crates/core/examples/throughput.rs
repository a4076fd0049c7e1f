//! Times the min-only full chain.
//!
//! ```text
//! cargo run --release --example throughput -- [steps] [seed]
//! ```

use std::time::Instant;

use canyon::engine::{run, RunSpec};

fn main() -> canyon::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(100_000_000, |s| s.parse().expect("steps"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let start = Instant::now();
    let summary = run(&RunSpec::full(seed, steps), &mut [])?;
    let secs = start.elapsed().as_secs_f64();

    println!("steps           {steps}");
    println!("final size      {}", summary.final_size);
    println!("final minimum   {:.6}", summary.final_minimum);
    println!("displaced frac  {:.6}", summary.displaced as f64 / steps.max(1) as f64);
    println!("elapsed         {secs:.2} s");
    println!("throughput      {:.3e} steps/s", steps as f64 / secs);
    Ok(())
}
