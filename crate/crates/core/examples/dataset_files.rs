//! Round-trips a dataset through the text format and joins it from disk.
//!
//! cargo run --example dataset_files

use svsjoin::cli::{cmd_join, read_dataset_file, read_pairs, write_dataset_file};
use svsjoin::datagen::{generate, GenSpec};
use svsjoin::{Algorithm, JoinConfig};

fn main() -> svsjoin::Result<()> {
    let dir = std::env::temp_dir().join(format!("svsjoin-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("data.txt");
    let output = dir.join("pairs.txt");

    let data = generate(&GenSpec {
        n_records: 2000,
        vocab_size: 200,
        tokens_per_record: 8.0,
        ..GenSpec::default()
    })?;
    write_dataset_file(&input, &data)?;
    assert_eq!(read_dataset_file(&input)?, data);
    println!("wrote and re-read {} records at {}", data.len(), input.display());

    let config = JoinConfig::new(0.05, 0.5).with_algorithm(Algorithm::Grid);
    let (out, secs) = cmd_join(&input, Some(&output), &config)?;
    let pairs = read_pairs(std::fs::File::open(&output)?)?;
    assert_eq!(pairs, out.pairs);
    println!("{} pairs in {secs:.3}s, first {:?}", pairs.len(), pairs.as_slice().first());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
