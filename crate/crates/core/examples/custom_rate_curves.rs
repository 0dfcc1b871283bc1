// The max-min solver works on any pair of rate curves. Here the relay has
// two non-zero symbols on a noiseless ternary hop, so its rate is
// `H(P_U) + P_U`, evaluated through the generic mutual-information code.
//
// Run with `cargo run --example custom_rate_curves`.

use hdrelay::prob::{relay_mutual_information, ConditionalPmf, Pmf, RelayInputModel};
use hdrelay::solver::{solve_capacity, RateCurves, SolverOptions};

pub fn run_example() -> anyhow::Result<()> {
    let channel = ConditionalPmf::noiseless(3)?;
    let active = Pmf::uniform(vec![1, 2])?;
    let r2 = move |p: f64| {
        let model = RelayInputModel::new(p, active.clone()).expect("p in [0, 1]");
        relay_mutual_information(&model, &channel).expect("matching alphabets")
    };
    let curves = RateCurves::new(|p| 1.0 - p, r2);
    let sol = solve_capacity(&curves, &SolverOptions::default());
    println!(
        "ternary relay: P_U* = {:.6}, capacity = {:.6} ({:?})",
        sol.p_u_star, sol.capacity, sol.regime
    );

    // A weak relay hop whose curve peaks before it reaches the source curve.
    let weak = RateCurves::new(|p| 1.0 - 0.2 * p, |p| 0.3 * (4.0 * p * (1.0 - p)));
    let sol = solve_capacity(&weak, &SolverOptions::default());
    println!(
        "weak relay:    P_U* = {:.6}, capacity = {:.6} ({:?})",
        sol.p_u_star, sol.capacity, sol.regime
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
