//! Similarity self-joins over geo-tagged token sets: find every pair of
//! records that lie close together and share most of their tokens.
//!
//! Three indexed algorithms share one prefix-filter kernel:
//!
//! - [`join::svs_join_b`] probes one flat inverted index and drops distant
//!   postings during the scan.
//! - [`grid::svs_join_g`] buckets records into a uniform grid and joins each
//!   cell with its neighbors.
//! - [`quadtree::svs_join_q`] partitions space with a quadtree, keeps one
//!   global index with per-leaf ranges, and prunes leaves by token weight.
//!
//! [`oracle::brute_force_join`] evaluates every pair directly and is the
//! reference the others are tested against.
//!
//! ```
//! use svsjoin::{join, Algorithm, GeoImage, JoinConfig};
//!
//! let data = vec![
//!     GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3]),
//!     GeoImage::new(1, 3.0, 4.0, vec![1, 2, 3, 4]),
//!     GeoImage::new(2, 100.0, 0.0, vec![1]),
//! ];
//! let config = JoinConfig::new(0.06, 0.7).with_algorithm(Algorithm::Quadtree);
//! let out = join(&data, &config).unwrap();
//! assert_eq!(out.pairs.as_slice(), &[(0, 1)]);
//! ```

mod error;

pub mod cli;
pub mod datagen;
pub mod grid;
pub mod join;
pub mod model;
pub mod oracle;
pub mod prefixfilter;
pub mod quadtree;

pub use error::{Error, Result};
pub use join::{JoinOutput, JoinStats, PostingEntry};
pub use model::{Algorithm, GeoImage, JoinConfig, PairSet, Threshold, Vocabulary, WeightScheme};

/// Runs `algorithm` with the given vocabulary.
pub fn join_with(records: &[GeoImage], vocab: &Vocabulary, config: &JoinConfig) -> Result<JoinOutput> {
    match config.algorithm {
        Algorithm::Oracle => oracle::brute_force_join(records, vocab, config),
        Algorithm::Baseline => join::svs_join_b(records, vocab, config),
        Algorithm::Grid => grid::svs_join_g(records, vocab, config),
        Algorithm::Quadtree => quadtree::svs_join_q(records, vocab, config),
    }
}

/// Builds the vocabulary for `config.weight_scheme` and runs the configured algorithm.
pub fn join(records: &[GeoImage], config: &JoinConfig) -> Result<JoinOutput> {
    let vocab = model::build_vocabulary(records, config.weight_scheme);
    join_with(records, &vocab, config)
}
