//! Joins three hand-written records with every algorithm.
//!
//! cargo run --example quickstart

use svsjoin::{join, Algorithm, GeoImage, JoinConfig};

fn main() -> svsjoin::Result<()> {
    let data = vec![
        GeoImage::new(0, 0.0, 0.0, vec![1, 2, 3]),
        GeoImage::new(1, 3.0, 4.0, vec![1, 2, 3, 4]),
        GeoImage::new(2, 100.0, 0.0, vec![1]),
    ];
    // within 6% of the dataset diameter, Jaccard at least 0.7
    for algo in Algorithm::ALL {
        let out = join(&data, &JoinConfig::new(0.06, 0.7).with_algorithm(algo))?;
        println!("{:<9} {:?}", algo.to_string(), out.pairs.as_slice());
    }
    Ok(())
}
