// Drives the command-line sweep from code and reads the CSV back.
//
// Run with `cargo run --example sweep_csv`.

pub fn run_example() -> anyhow::Result<()> {
    let path = std::env::temp_dir().join(format!("hdrelay-sweep-{}.csv", std::process::id()));
    let code = hdrelay::cli::main_with_args([
        "hdrelay",
        "sweep",
        "bsc",
        "--grid",
        "0",
        "0.5",
        "0.1",
        "--out",
        path.to_str().expect("utf-8 temp path"),
    ]);
    anyhow::ensure!(code == 0, "sweep exited with {code}");
    let text = std::fs::read_to_string(&path)?;
    std::fs::remove_file(&path)?;
    print!("{text}");
    anyhow::ensure!(text.lines().count() == 7);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
