//! Generates a clustered synthetic dataset and prints a summary and a few lines.
//!
//! cargo run --release --example generate_dataset -- [records] [skew]

use svsjoin::cli::write_dataset;
use svsjoin::datagen::{generate, GenSpec};
use svsjoin::model::{build_vocabulary, max_dis};
use svsjoin::WeightScheme;

fn main() -> svsjoin::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec = GenSpec {
        n_records: args.next().and_then(|a| a.parse().ok()).unwrap_or(10_000),
        token_skew: args.next().and_then(|a| a.parse().ok()).unwrap_or(1.0),
        ..GenSpec::default()
    };
    let data = generate(&spec)?;
    let vocab = build_vocabulary(&data, WeightScheme::Idf);
    let mean = data.iter().map(|r| r.tokens.len()).sum::<usize>() as f64 / data.len() as f64;
    println!("{} records, {} distinct tokens, {mean:.1} tokens/record", data.len(), vocab.len());
    println!("diameter {:.1}", max_dis(&data, None)?);
    for rank in [0, vocab.len() as u32 / 2, vocab.len() as u32 - 1] {
        let t = vocab.token_at(rank);
        let s = vocab.get(t).expect("token present");
        println!("rank {rank:>5}: token {t:>5} df {:>6} idf {:.3}", s.df, s.weight);
    }
    let mut head = Vec::new();
    write_dataset(&mut head, &data[..3.min(data.len())])?;
    print!("{}", String::from_utf8_lossy(&head));
    Ok(())
}
