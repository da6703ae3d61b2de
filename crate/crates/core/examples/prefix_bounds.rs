//! Prints exact thresholds and prefix lengths for a few list sizes.
//!
//! cargo run --example prefix_bounds -- [gamma_v]

use svsjoin::prefixfilter::{overlap_threshold, prefix_bounds};
use svsjoin::Threshold;

fn main() -> svsjoin::Result<()> {
    let gamma_v: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.7);
    let t = Threshold::visual(gamma_v)?;
    println!("threshold {gamma_v} = {t}");
    println!("{:>4} {:>6} {:>6} {:>10}", "n", "probe", "index", "alpha(n,n)");
    for n in [1usize, 2, 3, 5, 10, 20, 60, 100] {
        let b = prefix_bounds(n, t);
        println!("{n:>4} {:>6} {:>6} {:>10}", b.probe_len, b.index_len, overlap_threshold(n as u64, n as u64, t));
    }
    Ok(())
}
