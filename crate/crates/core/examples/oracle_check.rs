//! Cross-checks every indexed algorithm against the brute-force join on a
//! batch of random small workloads.
//!
//! cargo run --release --example oracle_check -- [instances]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svsjoin::datagen::{generate, GenSpec};
use svsjoin::model::build_vocabulary;
use svsjoin::oracle::brute_force_join;
use svsjoin::{join_with, Algorithm, JoinConfig, WeightScheme};

fn main() -> svsjoin::Result<()> {
    let instances: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    for k in 0..instances {
        let spec = GenSpec {
            n_records: rng.random_range(50..=300),
            vocab_size: rng.random_range(10..=60),
            tokens_per_record: rng.random_range(3.0..8.0),
            n_clusters: 3,
            seed: k as u64,
            ..GenSpec::default()
        };
        let scheme = if k % 2 == 0 { WeightScheme::Uniform } else { WeightScheme::Idf };
        let config = JoinConfig::new(rng.random_range(0.02..0.3), rng.random_range(0.4..0.9)).with_weights(scheme);
        let data = generate(&spec)?;
        let vocab = build_vocabulary(&data, scheme);
        let want = brute_force_join(&data, &vocab, &config)?.pairs;
        let mut line = format!("#{k:<3} n={:<4} pairs={:<5}", data.len(), want.len());
        for algo in Algorithm::INDEXED {
            let got = join_with(&data, &vocab, &config.clone().with_algorithm(algo))?.pairs;
            let ok = got == want;
            failures += usize::from(!ok);
            line.push_str(&format!(" {}={}", algo.short_name(), if ok { "ok" } else { "MISMATCH" }));
        }
        println!("{line}");
    }
    println!("{failures} mismatches");
    Ok(())
}
