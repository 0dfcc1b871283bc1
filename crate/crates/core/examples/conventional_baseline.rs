// How much the symbol-switching relay gains over conventional relaying,
// where the relay listens for a whole codeword and then forwards it.
//
// Run with `cargo run --example conventional_baseline`.

use hdrelay::baselines::{conventional_rate, LinkRates};
use hdrelay::bsc::{bsc_capacity, BscPair};

pub fn run_example() -> anyhow::Result<()> {
    let rates = LinkRates::new(1.0, 1.0);
    println!(
        "two error-free bits/use links: conventional {:.3}, relay speaks {:.0}% of the time",
        conventional_rate(rates),
        100.0 * rates.balanced_split()
    );

    println!("\neps    capacity  conventional  gain");
    for i in 0..=10 {
        let eps = 0.05 * f64::from(i);
        let pair = BscPair::new(eps, eps)?;
        let cap = bsc_capacity(pair).capacity;
        let conv = conventional_rate(pair.link_rates());
        anyhow::ensure!(cap >= conv - 1e-9, "dominance failed at {eps}");
        let gain = if conv > 0.0 {
            format!("{:+.1}%", 100.0 * (cap / conv - 1.0))
        } else {
            "-".into()
        };
        println!("{eps:<6.2} {cap:.5}   {conv:.5}       {gain}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
