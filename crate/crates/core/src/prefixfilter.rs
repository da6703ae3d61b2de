//! Prefix filtering for weighted Jaccard joins.
//!
//! All bounds are computed on integer token weights (`1` per token under the
//! uniform scheme) against an exact [`Threshold`], so the filters never
//! disagree with the final similarity decision.

use crate::error::Result;
use crate::model::{self, GeoImage, Threshold, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixBounds {
    /// Tokens scanned against the index when a record probes.
    pub probe_len: usize,
    /// Tokens a record contributes to the index (valid for later, no smaller partners).
    pub index_len: usize,
}

/// Closed-form bounds for an unweighted list of `n` tokens:
/// `n - ceil(t n) + 1` and `n - ceil(2t/(1+t) n) + 1`.
pub fn prefix_bounds(n: usize, threshold: Threshold) -> PrefixBounds {
    if n == 0 {
        return PrefixBounds {
            probe_len: 0,
            index_len: 0,
        };
    }
    let n64 = n as u64;
    let probe = n64 - threshold.ceil_scaled(n64) + 1;
    let index = n64 - threshold.ceil_scaled_index(n64) + 1;
    PrefixBounds {
        probe_len: probe.min(n64) as usize,
        index_len: index.min(n64) as usize,
    }
}

/// Weighted bounds for a record whose token weights are given in rank order:
/// the shortest prefix whose remaining suffix weighs less than `t * W`
/// (probe) or `2t/(1+t) * W` (index).
pub fn weighted_prefix_bounds(weights: &[u64], threshold: Threshold) -> PrefixBounds {
    let total: u64 = weights.iter().sum();
    let mut probe_len = None;
    let mut index_len = None;
    let mut rest = total;
    for (k, &w) in weights.iter().enumerate() {
        // `rest` is the weight of weights[k..]; a prefix of length k leaves it.
        if index_len.is_none() && threshold.below_index_bound(rest, total) {
            index_len = Some(k);
        }
        if threshold.below_probe_bound(rest, total) {
            probe_len = Some(k);
            break;
        }
        rest -= w;
    }
    let n = weights.len();
    let probe_len = probe_len.unwrap_or(n);
    PrefixBounds {
        probe_len,
        index_len: index_len.unwrap_or(n).min(probe_len),
    }
}

/// Minimum overlap for Jaccard `>= t` between sets of the given sizes (or
/// total weights): `ceil(t / (1 + t) * (a + b))`.
pub fn overlap_threshold(len_a: u64, len_b: u64, threshold: Threshold) -> u64 {
    threshold.overlap_needed(len_a, len_b)
}

/// Positional filter for unweighted lists: true when the overlap found so far,
/// the shared token at `(pos_a, pos_b)` and the shorter remaining suffix could
/// still reach `alpha`.
pub fn positional_filter(
    len_a: usize,
    pos_a: usize,
    len_b: usize,
    pos_b: usize,
    current_overlap: u64,
    alpha: u64,
) -> bool {
    let rest = (len_a - pos_a - 1).min(len_b - pos_b - 1) as u64;
    current_overlap + 1 + rest >= alpha
}

/// Weighted positional bound: `current + shared + min(rest_a, rest_b) >= alpha`.
#[inline]
pub fn positional_bound(current: u64, shared: u64, rest_a: u64, rest_b: u64, alpha: u64) -> bool {
    current + shared + rest_a.min(rest_b) >= alpha
}

/// Suffix filter at a shared token `a[pos_a] == b[pos_b]`.
///
/// The tokens before the match can contribute at most the lighter of the two
/// prefixes, so the suffixes must overlap by the remainder. A depth-bounded
/// divide-and-conquer lower bound on the suffixes' symmetric-difference weight
/// decides whether that is still possible. `max_depth == 0` disables the test.
pub fn suffix_filter(
    a: &[u32],
    b: &[u32],
    pos_a: usize,
    pos_b: usize,
    alpha: u64,
    max_depth: usize,
    units: &[u64],
) -> bool {
    if max_depth == 0 {
        return true;
    }
    let weigh = |s: &[u32]| s.iter().map(|&r| units[r as usize]).sum::<u64>();
    let shared = units[a[pos_a] as usize];
    let before = weigh(&a[..pos_a]).min(weigh(&b[..pos_b]));
    let need = alpha.saturating_sub(shared + before);
    suffix_admits(&a[pos_a + 1..], &b[pos_b + 1..], need, max_depth, units)
}

/// True unless the suffixes provably overlap by less than `need`.
pub(crate) fn suffix_admits(sa: &[u32], sb: &[u32], need: u64, max_depth: usize, units: &[u64]) -> bool {
    if need == 0 || max_depth == 0 {
        return true;
    }
    let weigh = |s: &[u32]| s.iter().map(|&r| units[r as usize]).sum::<u64>();
    let total = weigh(sa) + weigh(sb);
    if 2 * need > total {
        return false;
    }
    let h_max = total - 2 * need;
    hamming_lower_bound(sa, sb, units, max_depth, h_max) <= h_max
}

/// Lower bound on the weight of `x` xor `y`; may stop early once it exceeds `h_max`.
fn hamming_lower_bound(x: &[u32], y: &[u32], units: &[u64], depth: usize, h_max: u64) -> u64 {
    let weigh = |s: &[u32]| s.iter().map(|&r| units[r as usize]).sum::<u64>();
    if x.is_empty() || y.is_empty() {
        return weigh(x) + weigh(y);
    }
    if depth == 0 {
        return weigh(x).abs_diff(weigh(y));
    }
    let (x, y) = if x.len() > y.len() { (y, x) } else { (x, y) };
    let mid = y.len() / 2;
    let pivot = y[mid];
    let k = x.partition_point(|&r| r < pivot);
    let found = x.get(k) == Some(&pivot);
    let (xl, xr) = (&x[..k], &x[k + found as usize..]);
    let (yl, yr) = (&y[..mid], &y[mid + 1..]);
    let pivot_cost = if found { 0 } else { units[pivot as usize] };

    let right_cheap = weigh(xr).abs_diff(weigh(yr));
    let cheap = pivot_cost + weigh(xl).abs_diff(weigh(yl)) + right_cheap;
    if cheap > h_max {
        return cheap;
    }
    let left = hamming_lower_bound(xl, yl, units, depth - 1, h_max);
    if pivot_cost + left + right_cheap > h_max {
        return pivot_cost + left + right_cheap;
    }
    let right = hamming_lower_bound(xr, yr, units, depth - 1, h_max);
    pivot_cost + left + right
}

/// Accumulated overlap of one candidate with the current probe record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overlap {
    pub weight: u64,
    /// Position in the probe of the last shared token found.
    pub probe_pos: u32,
    /// Position in the candidate of the last shared token found.
    pub cand_pos: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Accum {
    #[default]
    Untouched,
    Live(Overlap),
    /// Pruned for this probe; never revived.
    Disqualified,
}

/// Dense per-probe candidate accumulator keyed by record slot.
#[derive(Debug, Clone, Default)]
pub struct OverlapMap {
    slots: Vec<Accum>,
    touched: Vec<u32>,
}

impl OverlapMap {
    pub fn new(capacity: usize) -> Self {
        OverlapMap {
            slots: vec![Accum::Untouched; capacity],
            touched: Vec::new(),
        }
    }

    #[inline]
    pub fn get(&self, slot: u32) -> Accum {
        self.slots[slot as usize]
    }

    /// Records a shared token; ignored once the candidate is disqualified.
    #[inline]
    pub fn add(&mut self, slot: u32, weight: u64, probe_pos: u32, cand_pos: u32) {
        let s = &mut self.slots[slot as usize];
        match *s {
            Accum::Disqualified => {}
            Accum::Untouched => {
                self.touched.push(slot);
                *s = Accum::Live(Overlap {
                    weight,
                    probe_pos,
                    cand_pos,
                });
            }
            Accum::Live(o) => {
                *s = Accum::Live(Overlap {
                    weight: o.weight + weight,
                    probe_pos,
                    cand_pos,
                });
            }
        }
    }

    #[inline]
    pub fn disqualify(&mut self, slot: u32) {
        let s = &mut self.slots[slot as usize];
        if *s == Accum::Untouched {
            self.touched.push(slot);
        }
        *s = Accum::Disqualified;
    }

    pub fn touched(&self) -> &[u32] {
        &self.touched
    }

    /// Live candidates in first-touch order.
    pub fn live(&self) -> impl Iterator<Item = (u32, Overlap)> + '_ {
        self.touched.iter().filter_map(|&s| match self.slots[s as usize] {
            Accum::Live(o) => Some((s, o)),
            _ => None,
        })
    }

    pub fn clear(&mut self) {
        for &s in &self.touched {
            self.slots[s as usize] = Accum::Untouched;
        }
        self.touched.clear();
    }
}

/// Exact join predicate on two records, recomputed from scratch.
pub fn verify(
    a: &GeoImage,
    b: &GeoImage,
    vocab: &Vocabulary,
    threshold: Threshold,
    gamma_g: f64,
    max_dis: f64,
) -> Result<bool> {
    Ok(model::geo_within(a.point(), b.point(), max_dis, gamma_g)
        && model::vis_qualifies(a, b, vocab, threshold)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_vocabulary, JoinConfig, WeightScheme};

    fn t(x: f64) -> Threshold {
        Threshold::visual(x).unwrap()
    }

    #[test]
    fn published_prefix_lengths() {
        let b = prefix_bounds(5, t(0.7));
        assert_eq!(b.probe_len, 2);
        assert_eq!(b.index_len, 1);
        assert_eq!(prefix_bounds(0, t(0.7)), PrefixBounds { probe_len: 0, index_len: 0 });
    }

    #[test]
    fn prefix_bounds_at_unit_threshold() {
        for n in 1..20 {
            let b = prefix_bounds(n, t(1.0));
            assert_eq!((b.probe_len, b.index_len), (1, 1));
        }
    }

    #[test]
    fn weighted_bounds_reduce_to_closed_form() {
        for n in 0..40 {
            for g in [0.3, 0.5, 0.65, 0.7, 0.8, 0.9, 0.95, 1.0] {
                let ones = vec![1u64; n];
                assert_eq!(weighted_prefix_bounds(&ones, t(g)), prefix_bounds(n, t(g)), "n={n} g={g}");
            }
        }
    }

    #[test]
    fn probe_len_monotone_in_threshold() {
        for n in 1..50 {
            let mut last = usize::MAX;
            for k in 1..=20 {
                let b = prefix_bounds(n, t(k as f64 / 20.0));
                assert!(b.probe_len <= last);
                assert!(1 <= b.index_len && b.index_len <= b.probe_len && b.probe_len <= n);
                last = b.probe_len;
            }
        }
    }

    #[test]
    fn overlap_threshold_matches_enumeration() {
        // Two 5-sets: overlap o gives J = o / (10 - o).
        let alpha = overlap_threshold(5, 5, t(0.7));
        assert_eq!(alpha, 5);
        for o in 0..=5u64 {
            let qualifies = t(0.7).admits(o, 10 - o);
            assert_eq!(qualifies, o >= alpha);
        }
        assert_eq!(overlap_threshold(4, 4, t(1.0)), 4);
        assert!(overlap_threshold(0, 3, t(0.5)) >= 1);
    }

    #[test]
    fn positional_filter_cases() {
        assert!(positional_filter(5, 0, 5, 0, 0, 5));
        assert!(!positional_filter(5, 4, 5, 4, 0, 5));
        for pa in 0..5 {
            for pb in 0..7 {
                assert!(positional_filter(5, pa, 7, pb, 0, 1));
            }
        }
    }

    #[test]
    fn suffix_filter_cases() {
        let units = vec![1u64; 32];
        let a: Vec<u32> = (0..10).collect();
        assert!(suffix_filter(&a, &a, 0, 0, 10, 2, &units));
        let b: Vec<u32> = std::iter::once(0).chain(20..29).collect();
        // only token 0 is shared; alpha 8 needs 7 more from disjoint suffixes
        assert!(!suffix_filter(&a, &b, 0, 0, 8, 2, &units));
        assert!(suffix_filter(&a, &b, 0, 0, 8, 0, &units));
        // alpha 5: depth 2 bounds the suffix distance by 10, exactly the slack
        assert!(suffix_filter(&a, &b, 0, 0, 5, 2, &units));
        assert!(!suffix_filter(&a, &b, 0, 0, 5, 8, &units));
    }

    /// Exhaustive soundness of both filters over a 7-token universe.
    #[test]
    fn filters_never_reject_a_qualifying_overlap() {
        let universe = 7u32;
        let sets: Vec<Vec<u32>> = (0u32..1 << universe)
            .map(|m| (0..universe).filter(|b| m >> b & 1 == 1).collect())
            .collect();
        let weightings: Vec<Vec<u64>> = vec![vec![1; 7], vec![5, 1, 3, 2, 7, 1, 4]];
        for units in &weightings {
            for a in &sets {
                for b in &sets {
                    let wa: u64 = a.iter().map(|&r| units[r as usize]).sum();
                    let wb: u64 = b.iter().map(|&r| units[r as usize]).sum();
                    let (inter, _) = crate::model::overlap_union(a, b, units);
                    for g in [0.5, 0.7, 0.9] {
                        let alpha = overlap_threshold(wa, wb, t(g));
                        if inter < alpha || inter == 0 {
                            continue;
                        }
                        let mut current = 0;
                        for (pa, ra) in a.iter().enumerate() {
                            let Some(pb) = b.iter().position(|rb| rb == ra) else { continue };
                            let shared = units[*ra as usize];
                            let rest_a: u64 = a[pa + 1..].iter().map(|&r| units[r as usize]).sum();
                            let rest_b: u64 = b[pb + 1..].iter().map(|&r| units[r as usize]).sum();
                            assert!(positional_bound(current, shared, rest_a, rest_b, alpha));
                            if units.iter().all(|&u| u == 1) {
                                assert!(positional_filter(a.len(), pa, b.len(), pb, current, alpha));
                            }
                            for depth in 0..4 {
                                assert!(suffix_filter(a, b, pa, pb, alpha, depth, units));
                                assert!(suffix_admits(
                                    &a[pa + 1..],
                                    &b[pb + 1..],
                                    alpha.saturating_sub(current + shared),
                                    depth,
                                    units
                                ));
                            }
                            current += shared;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_map_disqualification_is_sticky() {
        let mut m = OverlapMap::new(4);
        m.add(1, 2, 0, 0);
        m.disqualify(1);
        m.add(1, 5, 1, 1);
        assert_eq!(m.get(1), Accum::Disqualified);
        m.add(2, 1, 0, 0);
        assert_eq!(m.live().count(), 1);
        assert_eq!(m.touched(), &[1, 2]);
        m.clear();
        assert_eq!(m.get(1), Accum::Untouched);
        assert!(m.touched().is_empty());
    }

    #[test]
    fn verify_cases() {
        let a = GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let b = GeoImage::new(1, 0.0, 0.0, vec![1, 2, 3, 4, 5, 6, 7, 11, 12, 13]);
        let v = build_vocabulary(&[a.clone(), b.clone()], WeightScheme::Uniform);
        assert!(verify(&a, &a, &v, t(1.0), 0.0, 1.0).unwrap());
        // J = 7 / 13
        assert!(verify(&a, &b, &v, Threshold::from_ratio(7, 13), 0.0, 1.0).unwrap());
        assert!(!verify(&a, &b, &v, t(0.54), 0.0, 1.0).unwrap());
        let far = GeoImage { x: 5.0, ..b.clone() };
        let cfg = JoinConfig::new(0.5, 0.5);
        assert!(!verify(&a, &far, &v, cfg.visual_threshold().unwrap(), cfg.gamma_g, 1.0).unwrap());
    }
}
