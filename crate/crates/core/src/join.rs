//! Prefix-filter join kernel, the textual PPJOIN join, and the flat
//! spatial-visual baseline that filters posting lists by distance inline.

use std::mem::size_of;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{self, GeoImage, JoinConfig, PairSet, Threshold, Vocabulary, WeightScheme};
use crate::prefixfilter::{
    prefix_bounds, suffix_admits, weighted_prefix_bounds, Accum, OverlapMap,
};

/// One indexed token occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PostingEntry {
    /// Slot of the record in the algorithm's working order.
    pub image: u32,
    /// Position of the token in that record's canonical list.
    pub prefix_pos: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JoinStats {
    /// Posting entries read.
    pub scanned: u64,
    /// Distinct (probe, candidate) pairs reached through the index.
    pub candidates: u64,
    /// Candidates that survived every filter and were verified exactly.
    pub verified: u64,
    pub results: u64,
    pub index_entries: u64,
    pub index_bytes: u64,
}

impl JoinStats {
    pub(crate) fn merge(&mut self, other: &JoinStats) {
        self.scanned += other.scanned;
        self.candidates += other.candidates;
        self.verified += other.verified;
        self.results += other.results;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JoinOutput {
    pub pairs: PairSet,
    pub stats: JoinStats,
}

/// A record in rank space with cumulative weights.
#[derive(Debug, Clone)]
pub(crate) struct Rec {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub ranks: Vec<u32>,
    /// `cum[k]` is the weight of the first `k` tokens.
    pub cum: Vec<u64>,
    pub probe_len: u32,
    pub index_len: u32,
    total: u64,
}

impl Rec {
    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Weight of the tokens after position `pos`.
    #[inline]
    pub fn rest_after(&self, pos: usize) -> u64 {
        self.total() - self.cum[pos + 1]
    }

    pub fn point(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

pub(crate) fn prepare(records: &[GeoImage], vocab: &Vocabulary, threshold: Threshold) -> Result<Vec<Rec>> {
    let mut ids: Vec<u64> = records.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateId(w[0]));
    }
    let units = vocab.units_by_rank();
    records
        .iter()
        .map(|img| {
            let ranks = vocab.ranks_of(&img.tokens)?;
            let mut cum = Vec::with_capacity(ranks.len() + 1);
            cum.push(0);
            let mut acc = 0;
            for &r in &ranks {
                acc += units[r as usize];
                cum.push(acc);
            }
            let bounds = match vocab.scheme() {
                WeightScheme::Uniform => prefix_bounds(ranks.len(), threshold),
                WeightScheme::Idf => {
                    let w: Vec<u64> = ranks.iter().map(|&r| units[r as usize]).collect();
                    weighted_prefix_bounds(&w, threshold)
                }
            };
            Ok(Rec {
                id: img.id,
                x: img.x,
                y: img.y,
                ranks,
                cum,
                probe_len: bounds.probe_len as u32,
                index_len: bounds.index_len as u32,
                total: acc,
            })
        })
        .collect()
}

/// Sorts ascending by total weight, then id.
pub(crate) fn sort_by_size(recs: &mut [Rec]) {
    recs.sort_unstable_by_key(|r| (r.total(), r.id));
}

/// Per-record fields the scan loop reads, packed away from the token lists.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hot {
    pub x: f64,
    pub y: f64,
    pub total: u64,
    pub index_len: u32,
}

/// Read-only parameters shared by every probe of one join.
pub(crate) struct Ctx<'a> {
    pub recs: &'a [Rec],
    pub hot: Vec<Hot>,
    pub units: &'a [u64],
    pub threshold: Threshold,
    /// `(gamma_g, max_dis)`; `None` joins on tokens only.
    pub geo: Option<(f64, f64)>,
    /// Squared radius with a relative margin, used for the inline prefilter.
    pub radius2: f64,
    pub positional: bool,
    pub suffix_depth: usize,
}

/// Relative margin on spatial prefilters so that rounding never prunes a
/// pair that the exact predicate accepts.
pub(crate) const GEO_SLACK: f64 = 1e-9;

impl<'a> Ctx<'a> {
    pub fn new(recs: &'a [Rec], vocab: &'a Vocabulary, config: &JoinConfig, geo: Option<f64>) -> Result<Self> {
        let threshold = config.visual_threshold()?;
        let geo = geo.map(|max_dis| (config.gamma_g, max_dis));
        let radius2 = geo
            .map(|(g, d)| {
                let r = g * d * (1.0 + GEO_SLACK);
                r * r
            })
            .unwrap_or(f64::INFINITY);
        let hot = recs
            .iter()
            .map(|r| Hot {
                x: r.x,
                y: r.y,
                total: r.total,
                index_len: r.index_len,
            })
            .collect();
        Ok(Ctx {
            recs,
            hot,
            units: vocab.units_by_rank(),
            threshold,
            geo,
            radius2,
            positional: config.positional_filter,
            suffix_depth: if config.suffix_filter { config.suffix_depth } else { 0 },
        })
    }
}

/// Per-worker probe state.
pub(crate) struct Prober {
    map: OverlapMap,
    pub stats: JoinStats,
    pub pairs: Vec<(u64, u64)>,
}

impl Prober {
    pub fn new(n: usize) -> Self {
        Prober {
            map: OverlapMap::new(n),
            stats: JoinStats::default(),
            pairs: Vec::new(),
        }
    }

    /// Scans the postings of the probe's token at position `i`.
    ///
    /// New candidates are only admitted while `admit_new` holds; candidates
    /// already accumulating are always updated.
    #[inline]
    pub fn scan(&mut self, ctx: &Ctx<'_>, probe: u32, i: usize, entries: &[PostingEntry], admit_new: bool) {
        self.scan_within(ctx, probe, i, entries, admit_new, u64::MAX);
    }

    /// As [`Prober::scan`], where `reach` bounds what the probe's tokens from
    /// position `i` on can still share with any record in `entries`.
    #[inline]
    pub fn scan_within(
        &mut self,
        ctx: &Ctx<'_>,
        probe: u32,
        i: usize,
        entries: &[PostingEntry],
        admit_new: bool,
        reach: u64,
    ) {
        let o = &ctx.recs[probe as usize];
        let shared = ctx.units[o.ranks[i] as usize];
        let total_o = o.total();
        let rest_o = o.rest_after(i);
        self.stats.scanned += entries.len() as u64;
        for e in entries {
            let c = e.image;
            let state = self.map.get(c);
            let current = match state {
                Accum::Disqualified => continue,
                Accum::Untouched if !admit_new => continue,
                Accum::Untouched => 0,
                Accum::Live(ov) => ov.weight,
            };
            let h = &ctx.hot[c as usize];
            if ctx.geo.is_some() {
                let dx = h.x - o.x;
                let dy = h.y - o.y;
                if dx * dx + dy * dy > ctx.radius2 {
                    continue;
                }
            }
            let total_c = h.total;
            if !ctx.threshold.length_compatible(total_o, total_c) {
                continue;
            }
            let j = e.prefix_pos as usize;
            // The first shared token lies in the index prefix of the lighter side.
            let past = if total_c <= total_o {
                j >= h.index_len as usize
            } else {
                i >= o.index_len as usize
            };
            if past {
                continue;
            }
            let sum = total_o + total_c;
            let mut ok = ctx.threshold.overlap_reaches(current.saturating_add(reach), sum)
                && (!ctx.positional || {
                    let rest_c = ctx.recs[c as usize].rest_after(j);
                    ctx.threshold.overlap_reaches(current + shared + rest_o.min(rest_c), sum)
                });
            if ok && state == Accum::Untouched && ctx.suffix_depth > 0 {
                let cand = &ctx.recs[c as usize];
                let alpha = ctx.threshold.overlap_needed(total_o, total_c);
                ok = suffix_admits(
                    &o.ranks[i + 1..],
                    &cand.ranks[j + 1..],
                    alpha.saturating_sub(shared),
                    ctx.suffix_depth,
                    ctx.units,
                );
            }
            if ok {
                self.map.add(c, shared, i as u32, j as u32);
            } else {
                self.map.disqualify(c);
            }
        }
    }

    /// Verifies every live candidate of `probe` and resets the accumulator.
    pub fn finish(&mut self, ctx: &Ctx<'_>, probe: u32) {
        let o = &ctx.recs[probe as usize];
        self.stats.candidates += self.map.touched().len() as u64;
        for (c, ov) in self.map.live() {
            self.stats.verified += 1;
            let cand = &ctx.recs[c as usize];
            if let Some((gamma_g, max_dis)) = ctx.geo {
                if !model::geo_within(o.point(), cand.point(), max_dis, gamma_g) {
                    continue;
                }
            }
            let alpha = ctx.threshold.overlap_needed(o.total(), cand.total());
            let reached = overlap_reaching(
                o,
                ov.probe_pos as usize + 1,
                cand,
                ov.cand_pos as usize + 1,
                ov.weight,
                alpha,
                ctx.units,
            );
            if let Some(inter) = reached {
                let union = o.total() + cand.total() - inter;
                if ctx.threshold.admits(inter, union) {
                    self.stats.results += 1;
                    self.pairs.push((o.id, cand.id));
                }
            }
        }
        self.map.clear();
    }
}

/// Completes the overlap of `a[pa..]` and `b[pb..]` on top of `base`, giving
/// up as soon as the unmatched remainder can no longer lift it to `alpha`.
fn overlap_reaching(a: &Rec, pa: usize, b: &Rec, pb: usize, base: u64, alpha: u64, units: &[u64]) -> Option<u64> {
    let (ra, rb) = (&a.ranks, &b.ranks);
    let (mut i, mut j, mut inter) = (pa, pb, base);
    if inter + (a.total() - a.cum[i]).min(b.total() - b.cum[j]) < alpha {
        return None;
    }
    while i < ra.len() && j < rb.len() {
        match ra[i].cmp(&rb[j]) {
            std::cmp::Ordering::Equal => {
                inter += units[ra[i] as usize];
                i += 1;
                j += 1;
                continue;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
        if inter + (a.total() - a.cum[i]).min(b.total() - b.cum[j]) < alpha {
            return None;
        }
    }
    (inter >= alpha).then_some(inter)
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Flat prefix-filter join over records already in working order.
///
/// Sequentially each record probes the index and then inserts its index
/// prefix, so every unordered pair is considered once. With more than one
/// thread the full index is built first and each probe only reads entries
/// that precede it.
fn flat_join(ctx: &Ctx<'_>, n_tokens: usize, config: &JoinConfig) -> Result<(Vec<(u64, u64)>, JoinStats)> {
    let recs = ctx.recs;
    let mut index: Vec<Vec<PostingEntry>> = vec![Vec::new(); n_tokens];
    let mut stats = JoinStats::default();

    let pairs = if config.threads <= 1 {
        let mut prober = Prober::new(recs.len());
        for (k, o) in recs.iter().enumerate() {
            if k % 1024 == 0 {
                config.check_deadline()?;
            }
            let slot = k as u32;
            for i in 0..o.probe_len as usize {
                let r = o.ranks[i] as usize;
                prober.scan(ctx, slot, i, &index[r], true);
                if i < o.index_len as usize {
                    index[r].push(PostingEntry {
                        image: slot,
                        prefix_pos: i as u32,
                    });
                }
            }
            prober.finish(ctx, slot);
        }
        stats.merge(&prober.stats);
        prober.pairs
    } else {
        for (k, o) in recs.iter().enumerate() {
            for i in 0..o.index_len as usize {
                index[o.ranks[i] as usize].push(PostingEntry {
                    image: k as u32,
                    prefix_pos: i as u32,
                });
            }
        }
        let index = &index;
        let pool = thread_pool(config.threads)?;
        let parts: Vec<Result<Prober>> = pool.install(|| {
            (0..recs.len())
                .into_par_iter()
                .chunks(256)
                .map(|chunk| {
                    config.check_deadline()?;
                    let mut prober = Prober::new(recs.len());
                    for k in chunk {
                        let slot = k as u32;
                        let o = &recs[k];
                        for i in 0..o.probe_len as usize {
                            let list = &index[o.ranks[i] as usize];
                            let end = list.partition_point(|e| e.image < slot);
                            prober.scan(ctx, slot, i, &list[..end], true);
                        }
                        prober.finish(ctx, slot);
                    }
                    Ok(prober)
                })
                .collect()
        });
        let mut pairs = Vec::new();
        for part in parts {
            let part = part?;
            stats.merge(&part.stats);
            pairs.extend(part.pairs);
        }
        pairs
    };

    stats.index_entries = index.iter().map(|l| l.len() as u64).sum();
    stats.index_bytes = stats.index_entries * size_of::<PostingEntry>() as u64
        + index.len() as u64 * size_of::<Vec<PostingEntry>>() as u64;
    Ok((pairs, stats))
}

fn finish_output(pairs: Vec<(u64, u64)>, mut stats: JoinStats) -> JoinOutput {
    let pairs = PairSet::from_pairs(pairs);
    stats.results = pairs.len() as u64;
    JoinOutput { pairs, stats }
}

/// Token-only similarity self-join (no distance predicate).
///
/// `records` must be canonical and sorted ascending by total token weight
/// (the token count under uniform weights), ties broken by id.
pub fn ppjoin(records: &[GeoImage], vocab: &Vocabulary, config: &JoinConfig) -> Result<JoinOutput> {
    config.validate()?;
    let threshold = config.visual_threshold()?;
    for img in records {
        let canonical = img
            .tokens
            .windows(2)
            .all(|w| matches!((vocab.rank(w[0]), vocab.rank(w[1])), (Some(a), Some(b)) if a < b));
        if !canonical {
            return Err(Error::NotCanonical { id: img.id });
        }
    }
    let recs = prepare(records, vocab, threshold)?;
    if let Some(position) = recs
        .windows(2)
        .position(|w| (w[0].total(), w[0].id) > (w[1].total(), w[1].id))
    {
        return Err(Error::Unsorted { position: position + 1 });
    }
    let ctx = Ctx::new(&recs, vocab, config, None)?;
    let (pairs, stats) = flat_join(&ctx, vocab.len(), config)?;
    Ok(finish_output(pairs, stats))
}

/// Flat spatial-visual join: one global index, posting lists filtered by
/// distance during the scan, exact verification of survivors.
pub fn svs_join_b(records: &[GeoImage], vocab: &Vocabulary, config: &JoinConfig) -> Result<JoinOutput> {
    config.validate()?;
    let max_dis = model::max_dis(records, config.max_dis_override)?;
    let mut recs = prepare(records, vocab, config.visual_threshold()?)?;
    sort_by_size(&mut recs);
    let ctx = Ctx::new(&recs, vocab, config, Some(max_dis))?;
    let (pairs, stats) = flat_join(&ctx, vocab.len(), config)?;
    Ok(finish_output(pairs, stats))
}

pub(crate) fn finish(pairs: Vec<(u64, u64)>, stats: JoinStats) -> JoinOutput {
    finish_output(pairs, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_vocabulary, canonicalize_all};

    fn three() -> Vec<GeoImage> {
        vec![
            GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3]),
            GeoImage::new(1, 3.0, 4.0, vec![1, 2, 3, 4]),
            GeoImage::new(2, 100.0, 0.0, vec![1]),
        ]
    }

    fn sorted_canonical(data: &[GeoImage], vocab: &Vocabulary) -> Vec<GeoImage> {
        let mut c = canonicalize_all(data, vocab).unwrap();
        c.sort_by_key(|r| (r.tokens.len(), r.id));
        c
    }

    #[test]
    fn baseline_three_record_instance() {
        let data = three();
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        let out = svs_join_b(&data, &v, &JoinConfig::new(0.06, 0.7)).unwrap();
        assert_eq!(out.pairs.as_slice(), &[(0, 1)]);
    }

    #[test]
    fn zero_radius_keeps_only_colocated() {
        let mut data = three();
        data.push(GeoImage::new(3, 0.0, 0.0, vec![1, 2, 3, 4]));
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        let out = svs_join_b(&data, &v, &JoinConfig::new(0.0, 0.7)).unwrap();
        assert_eq!(out.pairs.as_slice(), &[(0, 3)]);
    }

    #[test]
    fn unit_threshold_needs_identical_sets() {
        let data = three();
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        let out = svs_join_b(&data, &v, &JoinConfig::new(1.0, 1.0)).unwrap();
        assert!(out.pairs.is_empty());
    }

    #[test]
    fn ppjoin_identical_and_disjoint() {
        let data = vec![
            GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3]),
            GeoImage::new(1, 0.0, 0.0, vec![1, 2, 3]),
            GeoImage::new(2, 0.0, 0.0, vec![7, 8, 9]),
        ];
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        let out = ppjoin(&sorted_canonical(&data, &v), &v, &JoinConfig::new(1.0, 0.9)).unwrap();
        assert_eq!(out.pairs.as_slice(), &[(0, 1)]);
    }

    #[test]
    fn ppjoin_rejects_unsorted_and_non_canonical() {
        let data = vec![
            GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3]),
            GeoImage::new(1, 0.0, 0.0, vec![1]),
        ];
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        let canon = canonicalize_all(&data, &v).unwrap();
        assert!(matches!(
            ppjoin(&canon, &v, &JoinConfig::default()),
            Err(Error::Unsorted { position: 1 })
        ));
        let raw = vec![GeoImage::new(0, 0.0, 0.0, vec![1, 1])];
        assert!(matches!(
            ppjoin(&raw, &v, &JoinConfig::default()),
            Err(Error::NotCanonical { id: 0 })
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let data = vec![
            GeoImage::new(0, 0.0, 0.0, vec![1]),
            GeoImage::new(0, 1.0, 0.0, vec![1]),
        ];
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        assert!(matches!(
            svs_join_b(&data, &v, &JoinConfig::default()),
            Err(Error::DuplicateId(0))
        ));
    }

    #[test]
    fn degenerate_diameter_propagates() {
        let data = vec![
            GeoImage::new(0, 1.0, 1.0, vec![1]),
            GeoImage::new(1, 1.0, 1.0, vec![1]),
        ];
        let v = build_vocabulary(&data, WeightScheme::Uniform);
        assert!(matches!(
            svs_join_b(&data, &v, &JoinConfig::default()),
            Err(Error::DegenerateDiameter)
        ));
    }
}
