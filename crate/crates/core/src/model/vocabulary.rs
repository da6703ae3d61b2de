use std::collections::HashMap;

use super::{GeoImage, WeightScheme};
use crate::error::{Error, Result};

/// Fixed-point resolution of idf weights. Weights are stored as integer
/// multiples of `1 / IDF_UNIT` so that every overlap and union sum is exact.
pub const IDF_UNIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenStats {
    /// Number of distinct records containing the token.
    pub df: u32,
    pub weight: f64,
    /// Position in the global ordering (rarest first).
    pub rank: u32,
}

/// Global token set with document frequencies, weights and the rarest-first
/// ordering used by every prefix filter.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: HashMap<u32, TokenStats>,
    /// Rank by token id when ids are compact; `u32::MAX` marks gaps.
    dense: Vec<u32>,
    by_rank: Vec<u32>,
    units: Vec<u64>,
    unit_scale: u64,
    n_docs: usize,
    scheme: WeightScheme,
}

/// idf with add-one smoothing: `ln((n + 1) / (df + 1)) + 1`, always `>= 1`.
pub fn idf_weight(n_docs: usize, df: u32) -> f64 {
    ((n_docs as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
}

impl Vocabulary {
    pub fn build(dataset: &[GeoImage], scheme: WeightScheme) -> Self {
        let mut df: HashMap<u32, u32> = HashMap::new();
        let mut seen = Vec::new();
        for img in dataset {
            seen.clear();
            seen.extend_from_slice(&img.tokens);
            seen.sort_unstable();
            seen.dedup();
            for &t in &seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }

        let mut order: Vec<(u32, u32)> = df.iter().map(|(&t, &d)| (d, t)).collect();
        order.sort_unstable();

        let n_docs = dataset.len();
        let unit_scale = match scheme {
            WeightScheme::Uniform => 1,
            WeightScheme::Idf => IDF_UNIT,
        };
        let mut entries = HashMap::with_capacity(order.len());
        let mut by_rank = Vec::with_capacity(order.len());
        let mut units = Vec::with_capacity(order.len());
        for (rank, &(d, token)) in order.iter().enumerate() {
            let u = match scheme {
                WeightScheme::Uniform => 1,
                WeightScheme::Idf => ((idf_weight(n_docs, d) * IDF_UNIT as f64).round() as u64).max(1),
            };
            entries.insert(
                token,
                TokenStats {
                    df: d,
                    weight: u as f64 / unit_scale as f64,
                    rank: rank as u32,
                },
            );
            by_rank.push(token);
            units.push(u);
        }

        let max_id = by_rank.iter().copied().max().map_or(0, |m| m as usize + 1);
        let dense = if max_id <= 4 * by_rank.len() + 1024 {
            let mut d = vec![u32::MAX; max_id];
            for (rank, &t) in by_rank.iter().enumerate() {
                d[t as usize] = rank as u32;
            }
            d
        } else {
            Vec::new()
        };

        Vocabulary {
            entries,
            dense,
            by_rank,
            units,
            unit_scale,
            n_docs,
            scheme,
        }
    }

    pub fn len(&self) -> usize {
        self.by_rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_rank.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn get(&self, token: u32) -> Option<&TokenStats> {
        self.entries.get(&token)
    }

    #[inline]
    pub fn rank(&self, token: u32) -> Option<u32> {
        if !self.dense.is_empty() {
            return self.dense.get(token as usize).copied().filter(|&r| r != u32::MAX);
        }
        self.entries.get(&token).map(|s| s.rank)
    }

    pub fn weight(&self, token: u32) -> Option<f64> {
        self.entries.get(&token).map(|s| s.weight)
    }

    /// Token ids in rank order.
    pub fn ordering(&self) -> &[u32] {
        &self.by_rank
    }

    pub fn token_at(&self, rank: u32) -> u32 {
        self.by_rank[rank as usize]
    }

    /// Integer weight of the token at `rank`, in units of `1 / unit_scale()`.
    pub fn units_at(&self, rank: u32) -> u64 {
        self.units[rank as usize]
    }

    pub fn units_by_rank(&self) -> &[u64] {
        &self.units
    }

    pub fn unit_scale(&self) -> u64 {
        self.unit_scale
    }

    /// Maps tokens to ranks, deduplicated and sorted ascending.
    pub fn ranks_of(&self, tokens: &[u32]) -> Result<Vec<u32>> {
        let mut ranks = Vec::with_capacity(tokens.len());
        for &t in tokens {
            ranks.push(self.rank(t).ok_or(Error::VocabularyMismatch { token: t })?);
        }
        ranks.sort_unstable();
        ranks.dedup();
        Ok(ranks)
    }

    /// Sum of integer weights of a rank-sorted token list.
    pub fn total_units(&self, ranks: &[u32]) -> u64 {
        ranks.iter().map(|&r| self.units[r as usize]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(id: u64, tokens: &[u32]) -> GeoImage {
        GeoImage::new(id, 0.0, 0.0, tokens.to_vec())
    }

    fn sample() -> Vec<GeoImage> {
        vec![img(0, &[1, 2]), img(1, &[2]), img(2, &[2, 3])]
    }

    #[test]
    fn document_frequencies_and_order() {
        let v = Vocabulary::build(&sample(), WeightScheme::Uniform);
        assert_eq!(v.get(2).unwrap().df, 3);
        assert_eq!(v.get(1).unwrap().df, 1);
        assert_eq!(v.get(3).unwrap().df, 1);
        assert_eq!(v.ordering(), &[1, 3, 2]);
    }

    #[test]
    fn duplicates_counted_once_per_record() {
        let v = Vocabulary::build(&[img(0, &[5, 5, 5]), img(1, &[6])], WeightScheme::Uniform);
        assert_eq!(v.get(5).unwrap().df, 1);
    }

    #[test]
    fn uniform_weights_are_one() {
        let v = Vocabulary::build(&sample(), WeightScheme::Uniform);
        for t in [1, 2, 3] {
            assert_eq!(v.weight(t), Some(1.0));
        }
    }

    #[test]
    fn idf_weight_of_ubiquitous_token() {
        let v = Vocabulary::build(&sample(), WeightScheme::Idf);
        // ln(4/4) + 1
        assert_eq!(v.weight(2), Some(1.0));
        let expected = (4.0f64 / 2.0).ln() + 1.0;
        let got = v.weight(1).unwrap();
        assert!((got - expected).abs() <= 1.0 / IDF_UNIT as f64);
        assert!(got > 1.0);
    }

    #[test]
    fn unknown_token_rejected() {
        let v = Vocabulary::build(&sample(), WeightScheme::Uniform);
        assert!(matches!(
            v.ranks_of(&[1, 99]),
            Err(Error::VocabularyMismatch { token: 99 })
        ));
    }

    #[test]
    fn empty_dataset() {
        let v = Vocabulary::build(&[], WeightScheme::Idf);
        assert!(v.is_empty());
        assert_eq!(v.n_docs(), 0);
    }
}
