// One block of the scheme at symbol level: the relay's codeword decides
// where it listens, the source fills exactly those slots, and the relay
// keeps only what it heard there.
//
// Run with `cargo run --example switching_pattern`.

use hdrelay::sim::{
    insert_source_symbols, relay_receive, CodingConfig, Engine, Experiment, RelayMode, Scheme,
};

fn show<T: std::fmt::Debug>(name: &str, v: &[T]) {
    println!("{name:>8}: {v:?}");
}

pub fn run_example() -> anyhow::Result<()> {
    // k = 8, relay transmits in half of the slots.
    let x2 = vec![0, 1, 1, 0, 1, 0, 0, 1];
    let x1r = vec![1, 0, 0, 1];
    let x1 = insert_source_symbols(&x1r, &x2);
    show("x2", &x2);
    show("x1", &x1);
    let y1: Vec<_> = x1
        .iter()
        .zip(&x2)
        .map(|(a, &r)| if r == 0 { *a } else { None })
        .collect();
    show(
        "y1r",
        &relay_receive(RelayMode::SymbolSwitching, &y1, &x2, x1r.len())?,
    );

    // The same picture inside a full simulated trial.
    let cfg = CodingConfig {
        k: 8,
        rate: 0.25,
        p_u: 0.5,
        n_blocks: 2,
        typicality_eps: None,
        relay_mode: RelayMode::SymbolSwitching,
        seed: 6,
        engine: Engine::Explicit,
    };
    let scheme = Scheme::bsc(0.0, 0.0)?;
    let (report, trace) = Experiment::new(&cfg, &scheme)?.run_trial(0, true)?;
    for (b, block) in trace.expect("trace requested").iter().enumerate() {
        println!("\nblock {}", b + 1);
        show("relay x2", &block.relay_x2);
        show("x1", &block.x1);
        println!(
            "   relay decision {:?}, destination decision {:?}",
            block.relay_decision, block.dest_decision
        );
    }
    anyhow::ensure!(report.hd_violations == 0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
