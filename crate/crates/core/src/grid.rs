//! Uniform spatial grid with cells of side `gamma_g * max_dis`.
//!
//! Any two records within the distance threshold fall in the same or in
//! 8-adjacent cells. Each cell is joined with itself and with its adjacent
//! cells of smaller id, so every pair of cells is visited once.

use std::collections::BTreeMap;
use std::mem::size_of;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::join::{self, Ctx, JoinOutput, JoinStats, PostingEntry, Prober, Rec, GEO_SLACK};
use crate::model::{self, GeoImage, JoinConfig, Vocabulary};

/// Placement of the cells: row-major ids anchored at the lower-left corner
/// of the data's bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    origin: (f64, f64),
    cell_side: f64,
    cols: u64,
    rows: u64,
}

impl GridGeometry {
    pub fn covering(
        points: impl IntoIterator<Item = (f64, f64)>,
        gamma_g: f64,
        max_dis: f64,
        max_cells: u64,
    ) -> Result<Self> {
        if gamma_g <= 0.0 {
            return Err(Error::ZeroGeoThreshold);
        }
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        if min_x > max_x {
            (min_x, min_y, max_x, max_y) = (0.0, 0.0, 0.0, 0.0);
        }
        // The margin keeps rounding in the floor rule from separating two
        // in-range points by more than one cell.
        let cell_side = gamma_g * max_dis * (1.0 + GEO_SLACK);
        let span = |extent: f64| ((extent / cell_side).ceil() as u128).max(1);
        let (cols, rows) = (span(max_x - min_x), span(max_y - min_y));
        let cells = cols.saturating_mul(rows);
        if cells > max_cells as u128 {
            return Err(Error::GridTooLarge { cells, cap: max_cells });
        }
        Ok(GridGeometry {
            origin: (min_x, min_y),
            cell_side,
            cols: cols as u64,
            rows: rows as u64,
        })
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn cell_count(&self) -> u64 {
        self.cols * self.rows
    }

    /// `(col, row)` by the floor rule, clamped into the grid.
    pub fn coords_of(&self, x: f64, y: f64) -> (u64, u64) {
        let clamp = |v: f64, n: u64| (v.floor().max(0.0) as u64).min(n - 1);
        (
            clamp((x - self.origin.0) / self.cell_side, self.cols),
            clamp((y - self.origin.1) / self.cell_side, self.rows),
        )
    }

    pub fn cell_of(&self, x: f64, y: f64) -> u64 {
        let (col, row) = self.coords_of(x, y);
        row * self.cols + col
    }

    pub fn coords(&self, cell: u64) -> (u64, u64) {
        (cell % self.cols, cell / self.cols)
    }

    /// The cell and all of its in-bounds 8-neighbors, ascending.
    pub fn neighborhood(&self, cell: u64) -> Vec<u64> {
        let (col, row) = self.coords(cell);
        let mut out = Vec::with_capacity(9);
        for r in row.saturating_sub(1)..=(row + 1).min(self.rows - 1) {
            for c in col.saturating_sub(1)..=(col + 1).min(self.cols - 1) {
                out.push(r * self.cols + c);
            }
        }
        out
    }

    /// True when the two cells coincide or touch (including diagonally).
    pub fn adjacent_or_same(&self, a: u64, b: u64) -> bool {
        let (ca, ra) = self.coords(a);
        let (cb, rb) = self.coords(b);
        ca.abs_diff(cb) <= 1 && ra.abs_diff(rb) <= 1
    }
}

/// Cells a given cell is joined against: itself plus adjacent cells of
/// smaller id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinCellSet {
    pub cells: Vec<u64>,
}

pub fn get_join_cells(geometry: &GridGeometry, cell: u64) -> JoinCellSet {
    JoinCellSet {
        cells: geometry.neighborhood(cell).into_iter().filter(|&c| c <= cell).collect(),
    }
}

/// Record ids bucketed by cell; inside a cell ordered by token count then id.
#[derive(Debug, Clone)]
pub struct GridIndex {
    pub geometry: GridGeometry,
    cells: BTreeMap<u64, Vec<u64>>,
}

impl GridIndex {
    pub fn cell(&self, cell: u64) -> &[u64] {
        self.cells.get(&cell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn occupied(&self) -> impl Iterator<Item = (u64, &[u64])> {
        self.cells.iter().map(|(&c, v)| (c, v.as_slice()))
    }
}

pub fn build_grid(dataset: &[GeoImage], gamma_g: f64, max_dis: f64, max_cells: u64) -> Result<GridIndex> {
    let geometry = GridGeometry::covering(dataset.iter().map(GeoImage::point), gamma_g, max_dis, max_cells)?;
    let mut order: Vec<&GeoImage> = dataset.iter().collect();
    order.sort_by_key(|r| (geometry.cell_of(r.x, r.y), r.tokens.len(), r.id));
    let mut cells: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for r in order {
        cells.entry(geometry.cell_of(r.x, r.y)).or_default().push(r.id);
    }
    Ok(GridIndex { geometry, cells })
}

/// One occupied cell with its records `[start, end)` and per-token postings.
pub(crate) struct CellBlock {
    pub id: u64,
    pub start: u32,
    pub end: u32,
    /// `(rank, from, to)` into the shared postings array, sorted by rank.
    pub tokens: Vec<(u32, u32, u32)>,
}

impl CellBlock {
    pub fn postings<'p>(&self, rank: u32, postings: &'p [PostingEntry]) -> &'p [PostingEntry] {
        match self.tokens.binary_search_by_key(&rank, |t| t.0) {
            Ok(k) => {
                let (_, from, to) = self.tokens[k];
                &postings[from as usize..to as usize]
            }
            Err(_) => &[],
        }
    }
}

pub(crate) struct CellLayout {
    pub blocks: Vec<CellBlock>,
    pub postings: Vec<PostingEntry>,
}

/// Buckets `recs` (already sorted by cell, size, id) into blocks with
/// probe-prefix postings ordered by slot.
pub(crate) fn layout(recs: &[Rec], cell_ids: &[u64]) -> CellLayout {
    let mut blocks = Vec::new();
    let mut postings = Vec::new();
    let mut scratch: Vec<(u32, u32, u32)> = Vec::new();
    let mut start = 0;
    while start < recs.len() {
        let id = cell_ids[start];
        let mut end = start;
        while end < recs.len() && cell_ids[end] == id {
            end += 1;
        }
        scratch.clear();
        for (slot, r) in recs.iter().enumerate().take(end).skip(start) {
            for i in 0..r.probe_len as usize {
                scratch.push((r.ranks[i], slot as u32, i as u32));
            }
        }
        scratch.sort_unstable();
        let mut tokens = Vec::new();
        let mut k = 0;
        while k < scratch.len() {
            let rank = scratch[k].0;
            let from = postings.len() as u32;
            while k < scratch.len() && scratch[k].0 == rank {
                postings.push(PostingEntry {
                    image: scratch[k].1,
                    prefix_pos: scratch[k].2,
                });
                k += 1;
            }
            tokens.push((rank, from, postings.len() as u32));
        }
        blocks.push(CellBlock {
            id,
            start: start as u32,
            end: end as u32,
            tokens,
        });
        start = end;
    }
    CellLayout { blocks, postings }
}

/// Grid-partitioned spatial-visual join.
pub fn svs_join_g(records: &[GeoImage], vocab: &Vocabulary, config: &JoinConfig) -> Result<JoinOutput> {
    config.validate()?;
    let max_dis = model::max_dis(records, config.max_dis_override)?;
    let mut recs = join::prepare(records, vocab, config.visual_threshold()?)?;
    let geometry = GridGeometry::covering(recs.iter().map(Rec::point), config.gamma_g, max_dis, config.max_cells)?;
    recs.sort_unstable_by_key(|r| (geometry.cell_of(r.x, r.y), r.total(), r.id));
    let cell_ids: Vec<u64> = recs.iter().map(|r| geometry.cell_of(r.x, r.y)).collect();
    let CellLayout { blocks, postings } = layout(&recs, &cell_ids);

    let ctx = Ctx::new(&recs, vocab, config, Some(max_dis))?;
    let find = |cell: u64| blocks.binary_search_by_key(&cell, |b| b.id).ok().map(|k| &blocks[k]);

    let join_block = |prober: &mut Prober, block: &CellBlock| {
        let others: Vec<&CellBlock> = get_join_cells(&geometry, block.id)
            .cells
            .into_iter()
            .filter(|&c| c != block.id)
            .filter_map(find)
            .collect();
        for slot in block.start..block.end {
            let o = &recs[slot as usize];
            for i in 0..o.probe_len as usize {
                let rank = o.ranks[i];
                let own = block.postings(rank, &postings);
                let end = own.partition_point(|e| e.image < slot);
                prober.scan(&ctx, slot, i, &own[..end], true);
                for other in &others {
                    prober.scan(&ctx, slot, i, other.postings(rank, &postings), true);
                }
            }
            prober.finish(&ctx, slot);
        }
    };

    let mut stats = JoinStats::default();
    let mut pairs = Vec::new();
    if config.threads <= 1 {
        let mut prober = Prober::new(recs.len());
        for (k, block) in blocks.iter().enumerate() {
            if k % 64 == 0 {
                config.check_deadline()?;
            }
            join_block(&mut prober, block);
        }
        stats.merge(&prober.stats);
        pairs = prober.pairs;
    } else {
        let pool = join::thread_pool(config.threads)?;
        let parts: Vec<Result<Prober>> = pool.install(|| {
            blocks
                .par_chunks(16)
                .map(|chunk| {
                    config.check_deadline()?;
                    let mut prober = Prober::new(recs.len());
                    for block in chunk {
                        join_block(&mut prober, block);
                    }
                    Ok(prober)
                })
                .collect()
        });
        for part in parts {
            let part = part?;
            stats.merge(&part.stats);
            pairs.extend(part.pairs);
        }
    }

    stats.index_entries = postings.len() as u64;
    stats.index_bytes = postings.len() as u64 * size_of::<PostingEntry>() as u64
        + blocks
            .iter()
            .map(|b| (size_of::<CellBlock>() + b.tokens.len() * size_of::<(u32, u32, u32)>()) as u64)
            .sum::<u64>();
    Ok(join::finish(pairs, stats))
}
