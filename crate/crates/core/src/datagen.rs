//! Seeded synthetic corpus: clustered points, Poisson token counts, Zipf
//! token ids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, Zipf};

use crate::error::{Error, Result};
use crate::model::GeoImage;

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n_records: usize,
    pub vocab_size: u32,
    pub tokens_per_record: f64,
    /// Zipf exponent; 0 draws token ids uniformly.
    pub token_skew: f64,
    pub n_clusters: usize,
    pub cluster_sigma: f64,
    /// Side of the square `[0, extent]^2` all points are clamped to.
    pub extent: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            n_records: 3000,
            vocab_size: 10_000,
            tokens_per_record: 60.0,
            token_skew: 1.0,
            n_clusters: 20,
            cluster_sigma: 50.0,
            extent: 1000.0,
            seed: 42,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if self.vocab_size < 1 {
            return bad("vocab_size must be at least 1");
        }
        if self.n_clusters < 1 {
            return bad("n_clusters must be at least 1");
        }
        if !(self.tokens_per_record.is_finite() && self.tokens_per_record > 0.0) {
            return bad("tokens_per_record must be positive");
        }
        if !(self.token_skew.is_finite() && self.token_skew >= 0.0) {
            return bad("token_skew must be non-negative");
        }
        if !(self.cluster_sigma.is_finite() && self.cluster_sigma >= 0.0) {
            return bad("cluster_sigma must be non-negative");
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return bad("extent must be positive");
        }
        Ok(())
    }
}

enum TokenDist {
    Uniform(u32),
    Zipf(Zipf<f64>),
}

impl TokenDist {
    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        match self {
            TokenDist::Uniform(n) => rng.random_range(0..*n),
            // Zipf yields ranks 1..=n.
            TokenDist::Zipf(z) => z.sample(rng) as u32 - 1,
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<Vec<GeoImage>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<(f64, f64)> = (0..spec.n_clusters)
        .map(|_| (rng.random_range(0.0..=spec.extent), rng.random_range(0.0..=spec.extent)))
        .collect();
    let spread = Normal::new(0.0, spec.cluster_sigma).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let counts = Poisson::new(spec.tokens_per_record).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let tokens = if spec.token_skew == 0.0 {
        TokenDist::Uniform(spec.vocab_size)
    } else {
        TokenDist::Zipf(Zipf::new(spec.vocab_size as f64, spec.token_skew).map_err(|e| Error::InvalidSpec(e.to_string()))?)
    };

    let mut out = Vec::with_capacity(spec.n_records);
    let mut set = Vec::new();
    for id in 0..spec.n_records {
        let (cx, cy) = centers[rng.random_range(0..centers.len())];
        let x = (cx + spread.sample(&mut rng)).clamp(0.0, spec.extent);
        let y = (cy + spread.sample(&mut rng)).clamp(0.0, spec.extent);
        let k = (counts.sample(&mut rng) as usize).clamp(1, spec.vocab_size as usize);
        set.clear();
        // Heavy skew can make the last few distinct tokens slow to hit.
        let mut attempts = 0;
        while set.len() < k && attempts < 64 * k {
            let t = tokens.sample(&mut rng);
            if !set.contains(&t) {
                set.push(t);
            }
            attempts += 1;
        }
        set.sort_unstable();
        out.push(GeoImage::new(id as u64, x, y, set.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::max_dis;

    #[test]
    fn deterministic() {
        let spec = GenSpec {
            n_records: 500,
            ..GenSpec::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GenSpec { seed: 7, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn single_point_cluster_is_degenerate() {
        let spec = GenSpec {
            n_records: 50,
            n_clusters: 1,
            cluster_sigma: 0.0,
            ..GenSpec::default()
        };
        let data = generate(&spec).unwrap();
        assert!(data.iter().all(|r| r.point() == data[0].point()));
        assert!(matches!(max_dis(&data, None), Err(Error::DegenerateDiameter)));
    }

    #[test]
    fn rejects_empty_vocabulary() {
        let spec = GenSpec {
            vocab_size: 0,
            ..GenSpec::default()
        };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn records_are_well_formed() {
        let spec = GenSpec {
            n_records: 2000,
            vocab_size: 300,
            ..GenSpec::default()
        };
        for r in generate(&spec).unwrap() {
            assert!(!r.tokens.is_empty());
            assert!(r.tokens.windows(2).all(|w| w[0] < w[1]));
            assert!(r.tokens.iter().all(|&t| t < 300));
            assert!((0.0..=spec.extent).contains(&r.x) && (0.0..=spec.extent).contains(&r.y));
        }
    }

    #[test]
    fn mean_token_count_within_five_percent() {
        let spec = GenSpec {
            n_records: 10_000,
            tokens_per_record: 20.0,
            ..GenSpec::default()
        };
        let data = generate(&spec).unwrap();
        let mean = data.iter().map(|r| r.tokens.len()).sum::<usize>() as f64 / data.len() as f64;
        assert!((mean - 20.0).abs() <= 1.0, "mean {mean}");
    }

    #[test]
    fn zero_skew_is_uniform() {
        let spec = GenSpec {
            n_records: 20_000,
            vocab_size: 50,
            tokens_per_record: 1.0,
            token_skew: 0.0,
            ..GenSpec::default()
        };
        let data = generate(&spec).unwrap();
        let mut freq = vec![0u64; 50];
        let mut total = 0u64;
        for r in &data {
            for &t in &r.tokens {
                freq[t as usize] += 1;
                total += 1;
            }
        }
        let p = 1.0 / 50.0;
        let mean = total as f64 * p;
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        for f in freq {
            assert!((f as f64 - mean).abs() <= 3.0 * sd + 1.0, "{f} vs {mean}");
        }
    }
}
