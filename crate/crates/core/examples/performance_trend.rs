//! Times the three indexed joins on the default synthetic workload.
//!
//! cargo run --release --example performance_trend -- [records] [runs] [algos]

use std::time::Instant;

use svsjoin::datagen::{generate, GenSpec};
use svsjoin::model::build_vocabulary;
use svsjoin::{join_with, Algorithm, JoinConfig, WeightScheme};

fn main() -> svsjoin::Result<()> {
    let mut args = std::env::args().skip(1);
    let records: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let runs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let algos: Vec<Algorithm> = match args.next() {
        Some(list) => list.split(',').map(str::parse).collect::<svsjoin::Result<_>>()?,
        None => Algorithm::INDEXED.to_vec(),
    };

    let data = generate(&GenSpec {
        n_records: records,
        tokens_per_record: 60.0,
        ..GenSpec::default()
    })?;
    let vocab = build_vocabulary(&data, WeightScheme::Uniform);
    println!("{records} records, {runs} runs each");
    let mut medians = Vec::new();
    for &algo in &algos {
        let config = JoinConfig::new(0.06, 0.7).with_algorithm(algo);
        let mut times = Vec::new();
        let mut last = None;
        for _ in 0..runs {
            let start = Instant::now();
            let out = join_with(&data, &vocab, &config)?;
            times.push(start.elapsed().as_secs_f64());
            last = Some(out.stats);
        }
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2];
        let s = last.expect("at least one run");
        println!(
            "{:<3} median {median:>8.3}s  scanned {:>10}  candidates {:>10}  verified {:>8}  results {:>7}  index {:>10} B",
            algo.short_name(),
            s.scanned,
            s.candidates,
            s.verified,
            s.results,
            s.index_bytes
        );
        medians.push(median);
    }
    if let [b, g, q] = medians[..] {
        println!("Q/B = {:.3}  Q < G < B: {}", q / b, q < g && g < b);
    }
    Ok(())
}
