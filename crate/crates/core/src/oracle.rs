//! Nested-loop reference join. No index, no prefix shortcuts: every unordered
//! pair is tested with explicit set intersection and union.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::join::{JoinOutput, JoinStats};
use crate::model::{self, GeoImage, JoinConfig, PairSet, Vocabulary};

pub fn brute_force_join(records: &[GeoImage], vocab: &Vocabulary, config: &JoinConfig) -> Result<JoinOutput> {
    config.validate()?;
    let threshold = config.visual_threshold()?;
    if records.len() < 2 {
        return Ok(JoinOutput::default());
    }
    let max_dis = model::max_dis(records, config.max_dis_override)?;

    let mut ids = HashSet::new();
    let mut sets: Vec<HashSet<u32>> = Vec::with_capacity(records.len());
    for r in records {
        if !ids.insert(r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        sets.push(r.tokens.iter().copied().collect());
    }
    let weight: HashMap<u32, u64> = sets
        .iter()
        .flatten()
        .map(|&t| {
            let rank = vocab.rank(t).ok_or(Error::VocabularyMismatch { token: t })?;
            Ok((t, vocab.units_at(rank)))
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    let mut stats = JoinStats::default();
    for i in 0..records.len() {
        if i % 256 == 0 {
            config.check_deadline()?;
        }
        for j in i + 1..records.len() {
            stats.candidates += 1;
            let (a, b) = (&records[i], &records[j]);
            if !model::geo_within(a.point(), b.point(), max_dis, config.gamma_g) {
                continue;
            }
            stats.verified += 1;
            let inter: u64 = sets[i].intersection(&sets[j]).map(|t| weight[t]).sum();
            let union: u64 = sets[i].union(&sets[j]).map(|t| weight[t]).sum();
            if threshold.admits(inter, union) {
                pairs.push((a.id, b.id));
            }
        }
    }
    let pairs = PairSet::from_pairs(pairs);
    stats.results = pairs.len() as u64;
    Ok(JoinOutput { pairs, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_vocabulary, WeightScheme};

    #[test]
    fn empty_dataset() {
        let v = build_vocabulary(&[], WeightScheme::Uniform);
        assert!(brute_force_join(&[], &v, &JoinConfig::default()).unwrap().pairs.is_empty());
    }

    #[test]
    fn three_record_instance() {
        let data = vec![
            GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3]),
            GeoImage::new(1, 3.0, 4.0, vec![1, 2, 3, 4]),
            GeoImage::new(2, 100.0, 0.0, vec![1]),
        ];
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        let out = brute_force_join(&data, &v, &JoinConfig::new(0.06, 0.7)).unwrap();
        assert_eq!(out.pairs.as_slice(), &[(0, 1)]);
    }

    #[test]
    fn deterministic() {
        let data: Vec<GeoImage> = (0..40)
            .map(|i| GeoImage::new(i, (i % 7) as f64, (i % 5) as f64, vec![(i % 4) as u32, 9]))
            .collect();
        let v = build_vocabulary(&data, WeightScheme::Idf);
        let cfg = JoinConfig::new(0.5, 0.5);
        assert_eq!(
            brute_force_join(&data, &v, &cfg).unwrap(),
            brute_force_join(&data, &v, &cfg).unwrap()
        );
    }
}
