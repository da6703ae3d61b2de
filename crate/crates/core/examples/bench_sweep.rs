//! Runs one parameter sweep at a small scale and prints the report.
//!
//! cargo run --release --example bench_sweep -- [size|words|gamma_g|gamma_v] [scale]

use svsjoin::cli::{run_sweep, BenchParams, Sweep};

fn main() -> svsjoin::Result<()> {
    let mut args = std::env::args().skip(1);
    let sweep: Sweep = args.next().map_or(Ok(Sweep::GammaV), |s| s.parse())?;
    let params = BenchParams {
        scale: args.next().and_then(|a| a.parse().ok()).unwrap_or(0.005),
        ..BenchParams::default()
    };
    let report = run_sweep(sweep, &params)?;
    print!("{}", report.to_tsv());
    println!("result counts agree: {}", report.results_agree());
    Ok(())
}
