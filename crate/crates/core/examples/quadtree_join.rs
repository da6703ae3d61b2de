//! Quadtree partitioning: tree shape, per-leaf posting ranges, and the join.
//!
//! cargo run --release --example quadtree_join

use svsjoin::datagen::{generate, GenSpec};
use svsjoin::model::build_vocabulary;
use svsjoin::quadtree::{morton_decode, QuadIndex};
use svsjoin::{JoinConfig, WeightScheme};

fn main() -> svsjoin::Result<()> {
    let data = generate(&GenSpec {
        n_records: 20_000,
        vocab_size: 300,
        tokens_per_record: 8.0,
        ..GenSpec::default()
    })?;
    let vocab = build_vocabulary(&data, WeightScheme::Idf);
    let config = JoinConfig::new(0.02, 0.5).with_weights(WeightScheme::Idf);
    let index = QuadIndex::build(&data, &vocab, &config)?;
    let tree = index.tree();
    println!(
        "{} nodes, {} leaves, max depth {}, radius {:.2}",
        tree.nodes().len(),
        tree.leaf_count(),
        tree.max_depth(),
        tree.radius()
    );
    let sizes: Vec<usize> = tree.leaves().map(|l| l.records.len()).collect();
    println!("leaf sizes: max {}, empty {}", sizes.iter().max().unwrap_or(&0), sizes.iter().filter(|&&s| s == 0).count());

    let leaf = tree.leaf(sizes.iter().enumerate().max_by_key(|p| p.1).map_or(0, |p| p.0));
    println!("fullest leaf: depth {}, cell {:?}, region {:?}", leaf.depth, morton_decode(leaf.morton, leaf.depth)?, leaf.region);

    let postings = index.postings();
    let busiest = (0..postings.token_count() as u32).max_by_key(|&t| postings.list(t).len()).unwrap_or(0);
    println!(
        "rank {busiest}: {} postings in {} leaf ranges",
        postings.list(busiest).len(),
        postings.node_ranges(busiest).len()
    );

    let out = index.join()?;
    println!("{} pairs, {:?}", out.pairs.len(), out.stats);
    Ok(())
}
