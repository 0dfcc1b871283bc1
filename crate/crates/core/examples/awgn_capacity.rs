// Capacity lower bound for Gaussian hops, bracketed by the conventional
// rate and the Gaussian-input rate from below and the upper bound above.
//
// Run with `cargo run --example awgn_capacity`.

use hdrelay::awgn::{
    awgn_capacity_lower, awgn_conventional_rate, awgn_gaussian_input_rate, awgn_upper_bound,
    optimize_mass_points, AwgnPair, SearchSpec,
};

pub fn run_example() -> anyhow::Result<()> {
    let search = SearchSpec::default();
    println!("snr_db  R_conv    R_gauss   C_L       C_upper   P_U*");
    for snr_db in [0.0, 10.0, 20.0] {
        let pair = AwgnPair::from_db(snr_db, snr_db)?;
        let lower = awgn_capacity_lower(&pair, &search)?;
        let gauss = awgn_gaussian_input_rate(&pair, &search.quad)?;
        let conv = awgn_conventional_rate(&pair);
        let upper = awgn_upper_bound(&pair);
        println!(
            "{snr_db:>6.1}  {conv:.5}   {gauss:.5}   {:.5}   {upper:.5}   {:.5}",
            lower.capacity, lower.p_u_star
        );
        anyhow::ensure!(conv <= gauss + 1e-6 && gauss <= lower.capacity + 1e-6);
        anyhow::ensure!(lower.capacity <= upper + 1e-6);
    }

    // The constellation behind the 10 dB lower bound.
    let pair = AwgnPair::from_db(10.0, 10.0)?;
    let p_u = awgn_capacity_lower(&pair, &search)?.p_u_star;
    let dist = optimize_mass_points(pair.snr2(), p_u, &search)?;
    println!("\nrelay constellation at 10 dB (P_U = {p_u:.4}), one side:");
    for (x, p) in dist.locations().iter().zip(dist.side_probs()) {
        if *p > 1e-7 {
            println!("  x = {x:8.4}   p = {p:.3e}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
