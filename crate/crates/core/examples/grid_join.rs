//! Uniform-grid partitioning: cell geometry, join cells, and the grid join.
//!
//! cargo run --release --example grid_join

use svsjoin::datagen::{generate, GenSpec};
use svsjoin::grid::{build_grid, get_join_cells, svs_join_g};
use svsjoin::model::{build_vocabulary, max_dis};
use svsjoin::{JoinConfig, WeightScheme};

fn main() -> svsjoin::Result<()> {
    let data = generate(&GenSpec {
        n_records: 4000,
        vocab_size: 300,
        tokens_per_record: 10.0,
        ..GenSpec::default()
    })?;
    let config = JoinConfig::new(0.05, 0.5);
    let d = max_dis(&data, None)?;
    let grid = build_grid(&data, config.gamma_g, d, config.max_cells)?;
    let g = &grid.geometry;
    println!("diameter {d:.1}, cell side {:.2}, {} x {} cells", g.cell_side(), g.cols(), g.rows());

    let (busiest, ids) = grid.occupied().max_by_key(|(_, ids)| ids.len()).expect("non-empty");
    println!("busiest cell {busiest} at {:?} holds {} records", g.coords(busiest), ids.len());
    println!("joined against cells {:?}", get_join_cells(g, busiest).cells);

    let vocab = build_vocabulary(&data, WeightScheme::Uniform);
    let out = svs_join_g(&data, &vocab, &config)?;
    println!("{} pairs, {:?}", out.pairs.len(), out.stats);
    Ok(())
}
