//! Exact return-time probabilities as polynomials in `q`, their truncated
//! mean, and the JSON form.
//!
//! ```text
//! cargo run --release --example exact_oracle -- [kmax]
//! ```

use canyon::oracle::{
    exact_return_pmf, pmf_to_json, tail_mass, truncated_mean_check, truncated_mean_poly,
};

fn main() -> canyon::Result<()> {
    let kmax: usize = std::env::args().nth(1).map_or(8, |s| s.parse().expect("kmax"));
    let pmf = exact_return_pmf(kmax)?;
    for (k, p) in pmf.iter().enumerate().take(6) {
        println!("P[tau = {}] = {p}", k + 1);
    }
    println!("P[tau > {kmax}] = {}", tail_mass(&pmf));

    let mean = truncated_mean_poly(&pmf);
    let series: Vec<String> = (0..=kmax / 2).map(|i| mean.coeff(i).to_string()).collect();
    println!("truncated mean, exact through q^{}: {}", kmax / 2, series.join(", "));

    for q in [0.1, 0.3, 0.5] {
        let t = truncated_mean_check(kmax, q)?;
        println!(
            "q = {q}: lower {:.6}, tail {:.2e}, diagnostic {:.6}, closed form {:.6}",
            t.lower, t.tail_mass, t.diagnostic, t.closed_form
        );
    }
    println!("{}", serde_json::to_string(&pmf_to_json(&pmf[..3])).expect("json"));
    Ok(())
}
