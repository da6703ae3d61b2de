//! Token-only similarity join (no distance predicate) with the prefix-filter
//! kernel. Input must be canonical and sorted by size.
//!
//! cargo run --example ppjoin_tokens -- [gamma_v]

use svsjoin::join::ppjoin;
use svsjoin::model::{build_vocabulary, canonicalize_all};
use svsjoin::{GeoImage, JoinConfig, WeightScheme};

fn main() -> svsjoin::Result<()> {
    let gamma_v: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.6);
    let words = [
        "red bus street london",
        "red bus london bridge",
        "red bus street london night",
        "tower bridge river",
        "tower bridge river night",
        "cat sofa",
    ];
    let mut names: Vec<&str> = Vec::new();
    let data: Vec<GeoImage> = words
        .iter()
        .enumerate()
        .map(|(id, text)| {
            let tokens = text
                .split(' ')
                .map(|w| match names.iter().position(|n| *n == w) {
                    Some(k) => k as u32,
                    None => {
                        names.push(w);
                        names.len() as u32 - 1
                    }
                })
                .collect();
            GeoImage::new(id as u64, 0.0, 0.0, tokens)
        })
        .collect();

    let vocab = build_vocabulary(&data, WeightScheme::Uniform);
    let mut canonical = canonicalize_all(&data, &vocab)?;
    canonical.sort_by_key(|r| (r.tokens.len(), r.id));
    let out = ppjoin(&canonical, &vocab, &JoinConfig::new(0.0, gamma_v))?;
    for &(a, b) in out.pairs.iter() {
        println!("{:<28} ~ {}", words[a as usize], words[b as usize]);
    }
    println!("{:?}", out.stats);
    Ok(())
}
