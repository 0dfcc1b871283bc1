// Capacity of the half-duplex relay with binary symmetric hops, for a few
// crossover pairs. The optimum is either where the two rate curves cross
// or, when the relay hop is much worse, at the peak of the relay curve.
//
// Run with `cargo run --example bsc_capacity`.

use hdrelay::bsc::{bsc_capacity, bsc_crossing, BscPair};

pub fn run_example() -> anyhow::Result<()> {
    println!("eps1   eps2   P_U*      capacity  regime");
    for (e1, e2) in [
        (0.0, 0.0),
        (0.05, 0.05),
        (0.1, 0.02),
        (0.0, 0.4),
        (0.5, 0.5),
    ] {
        let pair = BscPair::new(e1, e2)?;
        let sol = bsc_capacity(pair);
        println!(
            "{e1:<6} {e2:<6} {:.5}   {:.5}   {:?}",
            sol.p_u_star, sol.capacity, sol.regime
        );
    }

    // Error-free hops: the optimum satisfies 1 - P = H(P).
    let pair = BscPair::new(0.0, 0.0)?;
    let p = bsc_crossing(pair).expect("curves cross");
    let sol = bsc_capacity(pair);
    println!(
        "\nerror-free crossing at P_U = {p:.9}, capacity {:.5}",
        sol.capacity
    );
    anyhow::ensure!((sol.capacity - 0.77291).abs() < 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
