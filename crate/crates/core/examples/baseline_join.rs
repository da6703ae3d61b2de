//! Flat-index join on synthetic data, with and without the positional filter.
//!
//! cargo run --release --example baseline_join -- [records]

use std::time::Instant;

use svsjoin::datagen::{generate, GenSpec};
use svsjoin::join::svs_join_b;
use svsjoin::model::build_vocabulary;
use svsjoin::{JoinConfig, WeightScheme};

fn main() -> svsjoin::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5000);
    let data = generate(&GenSpec {
        n_records: n,
        vocab_size: 500,
        tokens_per_record: 12.0,
        ..GenSpec::default()
    })?;
    let vocab = build_vocabulary(&data, WeightScheme::Uniform);
    for positional in [true, false] {
        let config = JoinConfig {
            positional_filter: positional,
            ..JoinConfig::new(0.05, 0.5)
        };
        let start = Instant::now();
        let out = svs_join_b(&data, &vocab, &config)?;
        println!(
            "positional={positional:<5} {:.3}s pairs {} candidates {} verified {}",
            start.elapsed().as_secs_f64(),
            out.pairs.len(),
            out.stats.candidates,
            out.stats.verified
        );
    }
    Ok(())
}
