//! Records, the global token ordering, and the geographic and visual
//! similarity functions shared by every join algorithm and by the oracle.

mod diameter;
mod threshold;
mod vocabulary;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use diameter::{convex_hull, diameter};
pub use threshold::Threshold;
pub use vocabulary::{idf_weight, TokenStats, Vocabulary, IDF_UNIT};

use crate::error::{Error, Result};

/// A geo-tagged image reduced to a point and a set of visual-word ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoImage {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub tokens: Vec<u32>,
}

impl GeoImage {
    pub fn new(id: u64, x: f64, y: f64, tokens: Vec<u32>) -> Self {
        GeoImage { id, x, y, tokens }
    }

    pub fn point(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScheme {
    #[default]
    Uniform,
    Idf,
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(WeightScheme::Uniform),
            "idf" => Ok(WeightScheme::Idf),
            other => Err(Error::InvalidConfig(format!("unknown weight scheme '{other}'"))),
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Uniform => "uniform",
            WeightScheme::Idf => "idf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    /// Nested-loop reference join.
    Oracle,
    /// Prefix filtering over one global index with an inline distance check.
    Baseline,
    /// Uniform grid with per-cell inverted indexes.
    Grid,
    /// Quadtree leaves in Z-order with one global inverted index.
    #[default]
    Quadtree,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Oracle, Algorithm::Baseline, Algorithm::Grid, Algorithm::Quadtree];
    pub const INDEXED: [Algorithm; 3] = [Algorithm::Baseline, Algorithm::Grid, Algorithm::Quadtree];

    pub fn short_name(&self) -> &'static str {
        match self {
            Algorithm::Oracle => "oracle",
            Algorithm::Baseline => "b",
            Algorithm::Grid => "g",
            Algorithm::Quadtree => "q",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oracle" | "brute" => Ok(Algorithm::Oracle),
            "b" | "baseline" => Ok(Algorithm::Baseline),
            "g" | "grid" => Ok(Algorithm::Grid),
            "q" | "quadtree" => Ok(Algorithm::Quadtree),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Thresholds, algorithm choice and filter switches for one join.
#[derive(Debug, Clone)]
pub struct JoinConfig {
    /// Maximum normalized distance, in `[0, 1]`.
    pub gamma_g: f64,
    /// Minimum weighted Jaccard similarity, in `(0, 1]`.
    pub gamma_v: f64,
    pub weight_scheme: WeightScheme,
    pub algorithm: Algorithm,
    pub positional_filter: bool,
    pub suffix_filter: bool,
    pub suffix_depth: usize,
    /// Per-leaf remaining-weight cutoff in the quadtree search.
    pub maxweight_bound: bool,
    pub max_dis_override: Option<f64>,
    pub leaf_capacity: usize,
    pub max_cells: u64,
    /// 1 runs the sequential reference path.
    pub threads: usize,
    pub deadline: Option<Instant>,
}

impl Default for JoinConfig {
    fn default() -> Self {
        JoinConfig {
            gamma_g: 0.06,
            gamma_v: 0.7,
            weight_scheme: WeightScheme::Uniform,
            algorithm: Algorithm::Quadtree,
            positional_filter: true,
            suffix_filter: false,
            suffix_depth: 2,
            maxweight_bound: true,
            max_dis_override: None,
            leaf_capacity: 64,
            max_cells: 1 << 26,
            threads: 1,
            deadline: None,
        }
    }
}

impl JoinConfig {
    pub fn new(gamma_g: f64, gamma_v: f64) -> Self {
        JoinConfig {
            gamma_g,
            gamma_v,
            ..Default::default()
        }
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_weights(mut self, scheme: WeightScheme) -> Self {
        self.weight_scheme = scheme;
        self
    }

    pub fn visual_threshold(&self) -> Result<Threshold> {
        Threshold::visual(self.gamma_v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma_g) {
            return Err(Error::InvalidThreshold {
                name: "geographic",
                value: self.gamma_g,
                reason: "must lie in [0, 1]",
            });
        }
        self.visual_threshold()?;
        if let Some(d) = self.max_dis_override {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidConfig(format!("max-dis override {d} must be positive")));
            }
        }
        if self.leaf_capacity == 0 {
            return Err(Error::InvalidConfig("leaf capacity must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

/// Canonical join output: `(id_a, id_b)` with `id_a < id_b`, sorted, no duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PairSet {
    pairs: Vec<(u64, u64)>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Orients, sorts and deduplicates; drops self-pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut pairs: Vec<(u64, u64)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        PairSet { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn as_slice(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u64, u64)> {
        self.pairs.iter()
    }

    pub fn contains(&self, a: u64, b: u64) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.pairs.binary_search(&key).is_ok()
    }

    pub fn into_vec(self) -> Vec<(u64, u64)> {
        self.pairs
    }
}

impl FromIterator<(u64, u64)> for PairSet {
    fn from_iter<I: IntoIterator<Item = (u64, u64)>>(iter: I) -> Self {
        PairSet::from_pairs(iter)
    }
}

pub(crate) fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

pub fn euc_dis(a: &GeoImage, b: &GeoImage) -> f64 {
    euclid(a.point(), b.point())
}

/// Normalization extent: the override when given, otherwise the exact
/// diameter of the point set.
pub fn max_dis(dataset: &[GeoImage], override_value: Option<f64>) -> Result<f64> {
    if let Some(d) = override_value {
        if d.is_finite() && d > 0.0 {
            return Ok(d);
        }
        return Err(Error::InvalidConfig(format!("max-dis override {d} must be positive")));
    }
    let points: Vec<(f64, f64)> = dataset.iter().map(GeoImage::point).collect();
    let d = diameter(&points);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::DegenerateDiameter)
    }
}

/// Normalized distance `euc_dis / max_dis`.
pub fn geo_dist(a: &GeoImage, b: &GeoImage, max_dis: f64) -> f64 {
    euc_dis(a, b) / max_dis
}

pub fn geo_sim(a: &GeoImage, b: &GeoImage, max_dis: f64) -> f64 {
    1.0 - geo_dist(a, b, max_dis)
}

/// The geographic half of the join predicate (inclusive).
pub fn geo_within(a: (f64, f64), b: (f64, f64), max_dis: f64, gamma_g: f64) -> bool {
    euclid(a, b) / max_dis <= gamma_g
}

/// Integer intersection and union weight of two rank-sorted lists.
pub(crate) fn overlap_union(a: &[u32], b: &[u32], units: &[u64]) -> (u64, u64) {
    let (mut i, mut j) = (0, 0);
    let (mut inter, mut union) = (0u64, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                union += units[a[i] as usize];
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                union += units[b[j] as usize];
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let w = units[a[i] as usize];
                inter += w;
                union += w;
                i += 1;
                j += 1;
            }
        }
    }
    union += a[i..].iter().chain(&b[j..]).map(|&r| units[r as usize]).sum::<u64>();
    (inter, union)
}

/// Weighted Jaccard similarity; `0.0` when both token lists are empty.
pub fn vis_sim(a: &GeoImage, b: &GeoImage, vocab: &Vocabulary) -> Result<f64> {
    let ra = vocab.ranks_of(&a.tokens)?;
    let rb = vocab.ranks_of(&b.tokens)?;
    let (inter, union) = overlap_union(&ra, &rb, vocab.units_by_rank());
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

/// The visual half of the join predicate (inclusive), decided exactly.
pub fn vis_qualifies(a: &GeoImage, b: &GeoImage, vocab: &Vocabulary, threshold: Threshold) -> Result<bool> {
    let ra = vocab.ranks_of(&a.tokens)?;
    let rb = vocab.ranks_of(&b.tokens)?;
    let (inter, union) = overlap_union(&ra, &rb, vocab.units_by_rank());
    Ok(threshold.admits(inter, union))
}

/// Deduplicates the tokens and orders them rarest first.
pub fn canonicalize(img: &GeoImage, vocab: &Vocabulary) -> Result<GeoImage> {
    let ranks = vocab.ranks_of(&img.tokens)?;
    Ok(GeoImage {
        tokens: ranks.into_iter().map(|r| vocab.token_at(r)).collect(),
        ..img.clone()
    })
}

pub fn canonicalize_all(dataset: &[GeoImage], vocab: &Vocabulary) -> Result<Vec<GeoImage>> {
    dataset.iter().map(|img| canonicalize(img, vocab)).collect()
}

pub fn build_vocabulary(dataset: &[GeoImage], scheme: WeightScheme) -> Vocabulary {
    Vocabulary::build(dataset, scheme)
}
