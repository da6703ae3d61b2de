//! Randomized join instances shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svsjoin::datagen::{generate, GenSpec};
use svsjoin::{GeoImage, JoinConfig, WeightScheme};

pub struct Instance {
    pub data: Vec<GeoImage>,
    pub config: JoinConfig,
    pub label: String,
}

/// Threshold either rounded to two decimals or left at full f64 precision.
fn threshold(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v: f64 = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        ((v * 100.0).round() / 100.0).clamp(lo, hi)
    } else {
        v
    }
}

/// Records on a small integer lattice with uniform tokens: many exact
/// distance ties and duplicate token sets.
fn lattice(rng: &mut ChaCha8Rng, n: usize, vocab: u32) -> Vec<GeoImage> {
    let side = rng.random_range(3..=30);
    let mut ids: Vec<u64> = (0..n as u64).map(|k| k * 3 + 7).collect();
    ids.shuffle(rng);
    ids.into_iter()
        .map(|id| {
            let k = rng.random_range(1..=vocab.min(8));
            let mut tokens: Vec<u32> = (0..k).map(|_| rng.random_range(0..vocab)).collect();
            tokens.sort_unstable();
            tokens.dedup();
            GeoImage::new(id, rng.random_range(0..=side) as f64, rng.random_range(0..=side) as f64, tokens)
        })
        .collect()
}

/// Instance `k` of the randomized equivalence suite.
pub fn instance(k: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + k);
    let n = rng.random_range(50..=500);
    let vocab: u32 = rng.random_range(10..=100);
    let gamma_g = threshold(&mut rng, 0.02, 0.3);
    let gamma_v = threshold(&mut rng, 0.4, 0.9);
    let scheme = if k % 2 == 0 { WeightScheme::Uniform } else { WeightScheme::Idf };
    let suffix = (k / 2) % 2 == 1;
    let data = if k % 5 == 4 {
        lattice(&mut rng, n, vocab)
    } else {
        let spec = GenSpec {
            n_records: n,
            vocab_size: vocab,
            tokens_per_record: rng.random_range(2.0..10.0),
            token_skew: rng.random_range(0.0..1.5),
            n_clusters: rng.random_range(1..=8),
            cluster_sigma: rng.random_range(5.0..80.0),
            extent: 1000.0,
            seed: rng.random(),
        };
        generate(&spec).expect("valid spec")
    };
    let config = JoinConfig {
        suffix_filter: suffix,
        leaf_capacity: rng.random_range(1..=64),
        ..JoinConfig::new(gamma_g, gamma_v).with_weights(scheme)
    };
    let label = format!(
        "#{k} n={n} vocab={vocab} gamma_g={gamma_g} gamma_v={gamma_v} {scheme:?} suffix={suffix} cap={}",
        config.leaf_capacity
    );
    Instance { data, config, label }
}
