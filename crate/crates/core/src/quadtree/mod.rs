//! Quadtree-partitioned spatial-visual join. Leaves adapt to density; one
//! global inverted index keeps each leaf's postings in a contiguous range,
//! and per-leaf token weights bound the overlap a leaf can still offer.

pub mod index;
pub mod morton;
pub mod tree;

use std::mem::size_of;

use rayon::prelude::*;

pub use index::{GlobalPostings, LeafTokens, NodeDirectory, NodeRange, TokenMaxWeights};
pub use morton::{morton_decode, morton_encode, MAX_MORTON_DEPTH};
pub use tree::{build_quadtree, max_depth_for, QuadNode, QuadTree, Square};

use crate::error::Result;
use crate::join::{self, Ctx, JoinOutput, JoinStats, Prober, Rec};
use crate::model::{self, GeoImage, JoinConfig, Threshold, Vocabulary};

/// Whether a leaf with remaining score `score` can still hold a partner for
/// a probe of weight `total`: any partner needs overlap `>= t * total`.
#[inline]
fn leaf_may_admit(threshold: Threshold, score: u64, total: u64) -> bool {
    score as u128 * threshold.den() as u128 >= threshold.num() as u128 * total as u128
}

/// Per-worker probe scratch: which leaves the current leaf joins with, and
/// remaining-score tables computed on demand for the current probe.
struct Scratch {
    /// Smaller in-reach neighbors of the current leaf and the leaf itself, ascending.
    near: Vec<u32>,
    /// The part of `near` within reach of the current probe's point.
    near_point: Vec<u32>,
    /// `(probe stamp, buffer index)` per leaf.
    cached: Vec<(u32, u32)>,
    stamp: u32,
    bufs: Vec<Vec<u64>>,
    used: usize,
}

impl Scratch {
    fn new(n_leaves: usize) -> Self {
        Scratch {
            near: Vec::new(),
            near_point: Vec::new(),
            cached: vec![(0, 0); n_leaves],
            stamp: 0,
            bufs: Vec::new(),
            used: 0,
        }
    }

    fn enter_leaf(&mut self, tree: &QuadTree, leaf: usize) {
        self.near.clear();
        self.near.extend(tree.leaf_neighbors(leaf).into_iter().map(|l| l as u32));
        self.near.sort_unstable();
        self.near.push(leaf as u32);
    }

    fn next_probe(&mut self) {
        self.stamp += 1;
        self.used = 0;
    }

    fn scores(&mut self, weights: &TokenMaxWeights, o: &Rec, leaf: u32) -> &[u64] {
        let (stamp, idx) = self.cached[leaf as usize];
        if stamp == self.stamp {
            return &self.bufs[idx as usize];
        }
        if self.used == self.bufs.len() {
            self.bufs.push(Vec::new());
        }
        let idx = self.used;
        self.used += 1;
        let head = o.probe_len as usize;
        weights.suffix_scores(&o.ranks[..head], o.total() - o.cum[head], Some(leaf), &mut self.bufs[idx]);
        self.cached[leaf as usize] = (self.stamp, idx as u32);
        &self.bufs[idx]
    }
}

/// Quadtree, global postings and maxweights over one dataset, with records
/// held in (leaf, id) order. A record's position in that order is its slot.
pub struct QuadIndex<'a> {
    vocab: &'a Vocabulary,
    config: JoinConfig,
    max_dis: f64,
    tree: QuadTree,
    recs: Vec<Rec>,
    leaf_of: Vec<u32>,
    /// Closed `[x0, x1, y0, y1]` extent of each leaf in max-depth cells.
    leaf_cells: Vec<[f64; 4]>,
    postings: GlobalPostings,
    maxweights: TokenMaxWeights,
    directory: NodeDirectory,
}

impl<'a> QuadIndex<'a> {
    pub fn build(records: &[GeoImage], vocab: &'a Vocabulary, config: &JoinConfig) -> Result<Self> {
        config.validate()?;
        let max_dis = model::max_dis(records, config.max_dis_override)?;
        let recs = join::prepare(records, vocab, config.visual_threshold()?)?;
        let points: Vec<(u64, f64, f64)> = recs.iter().map(|r| (r.id, r.x, r.y)).collect();
        let (tree, order, leaf_of) = QuadTree::build_ordered(&points, config.gamma_g, max_dis, config.leaf_capacity)?;
        // Copies are allocated in slot order while the originals are still
        // live, so records of one leaf sit close together in memory.
        let recs: Vec<Rec> = order.iter().map(|&k| recs[k].clone()).collect();
        let postings = GlobalPostings::build(&recs, &leaf_of, vocab.len());
        let maxweights = TokenMaxWeights::build(&recs, &leaf_of, tree.leaf_count(), vocab.units_by_rank());
        let directory = NodeDirectory::build(&postings, maxweights.leaves());
        let leaf_cells = (0..tree.leaf_count())
            .map(|k| {
                let ((c0, c1), (r0, r1)) = tree.leaf_span(k);
                [c0 as f64, c1 as f64, r0 as f64, r1 as f64]
            })
            .collect();
        Ok(QuadIndex {
            vocab,
            config: config.clone(),
            max_dis,
            tree,
            recs,
            leaf_of,
            leaf_cells,
            postings,
            maxweights,
            directory,
        })
    }

    pub fn tree(&self) -> &QuadTree {
        &self.tree
    }

    pub fn postings(&self) -> &GlobalPostings {
        &self.postings
    }

    pub fn maxweights(&self) -> &TokenMaxWeights {
        &self.maxweights
    }

    pub fn max_dis(&self) -> f64 {
        self.max_dis
    }

    pub fn len(&self) -> usize {
        self.recs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recs.is_empty()
    }

    /// Record id at each slot.
    pub fn slot_ids(&self) -> Vec<u64> {
        self.recs.iter().map(|r| r.id).collect()
    }

    /// Leaf (Z-order index) of each slot.
    pub fn slot_leaves(&self) -> &[u32] {
        &self.leaf_of
    }

    /// Canonical rank list of the record at `slot`.
    pub fn slot_ranks(&self, slot: usize) -> &[u32] {
        &self.recs[slot].ranks
    }

    /// Probe-prefix length of the record at `slot`.
    pub fn slot_probe_len(&self, slot: usize) -> usize {
        self.recs[slot].probe_len as usize
    }

    fn ctx(&self) -> Result<Ctx<'_>> {
        Ctx::new(&self.recs, self.vocab, &self.config, Some(self.max_dis))
    }

    /// Pairs between the record at `slot` and records at earlier slots.
    pub fn join_search(&self, slot: usize) -> Result<Vec<(u64, u64)>> {
        let ctx = self.ctx()?;
        let mut prober = Prober::new(self.recs.len());
        let mut scratch = Scratch::new(self.tree.leaf_count());
        scratch.enter_leaf(&self.tree, self.leaf_of[slot] as usize);
        self.probe(&ctx, &mut prober, slot as u32, &mut scratch);
        Ok(prober.pairs)
    }

    /// Probes one record against the leaves listed in `scratch`.
    fn probe(&self, ctx: &Ctx<'_>, prober: &mut Prober, slot: u32, scratch: &mut Scratch) {
        let o = &self.recs[slot as usize];
        let own = self.leaf_of[slot as usize];
        let total = o.total();
        let bound = self.config.maxweight_bound;
        scratch.next_probe();
        let near = self.near_point(o, scratch);
        let leaves = self.maxweights.leaves();
        for i in 0..o.probe_len as usize {
            let rank = o.ranks[i];
            for &leaf in &near {
                let mut entries = self.directory.get(leaves, rank, leaf);
                if entries.is_empty() {
                    continue;
                }
                if leaf == own {
                    entries = &entries[..entries.partition_point(|e| e.image < slot)];
                }
                let reach = if bound {
                    scratch.scores(&self.maxweights, o, leaf)[i]
                } else {
                    u64::MAX
                };
                let admit = !bound || leaf_may_admit(ctx.threshold, reach, total);
                prober.scan_within(ctx, slot, i, entries, admit, reach);
            }
        }
        scratch.near_point = near;
        prober.finish(ctx, slot);
    }

    /// Leaves of `scratch.near` whose extent lies within reach of the probe's
    /// own point. Gaps shrink by a millionth of a cell to absorb rounding.
    fn near_point(&self, o: &Rec, scratch: &mut Scratch) -> Vec<u32> {
        let (u, v) = self.tree.cell_position(o.x, o.y);
        let reach = self.tree.radius_cells();
        let reach2 = reach * reach;
        let gap = |p: f64, lo: f64, hi: f64| ((lo - p).max(p - hi) - 1e-6).max(0.0);
        let mut out = std::mem::take(&mut scratch.near_point);
        out.clear();
        out.extend(scratch.near.iter().copied().filter(|&l| {
            let [x0, x1, y0, y1] = self.leaf_cells[l as usize];
            let (gx, gy) = (gap(u, x0, x1), gap(v, y0, y1));
            gx * gx + gy * gy <= reach2
        }));
        out
    }

    /// Probes every record of one leaf.
    fn join_leaf(&self, ctx: &Ctx<'_>, prober: &mut Prober, leaf: usize, scratch: &mut Scratch) {
        let first = self.leaf_of.partition_point(|&l| (l as usize) < leaf);
        let last = self.leaf_of.partition_point(|&l| (l as usize) <= leaf);
        if first == last {
            return;
        }
        scratch.enter_leaf(&self.tree, leaf);
        for slot in first..last {
            self.probe(ctx, prober, slot as u32, scratch);
        }
    }

    /// Joins every record in slot order.
    pub fn join(&self) -> Result<JoinOutput> {
        let ctx = self.ctx()?;
        let config = &self.config;
        let n_leaves = self.tree.leaf_count();
        let mut stats = JoinStats::default();
        let mut pairs = Vec::new();
        if config.threads <= 1 {
            let mut prober = Prober::new(self.recs.len());
            let mut scratch = Scratch::new(n_leaves);
            for leaf in 0..n_leaves {
                if leaf % 64 == 0 {
                    config.check_deadline()?;
                }
                self.join_leaf(&ctx, &mut prober, leaf, &mut scratch);
            }
            stats.merge(&prober.stats);
            pairs = prober.pairs;
        } else {
            let pool = join::thread_pool(config.threads)?;
            let leaves: Vec<usize> = (0..n_leaves).collect();
            let parts: Vec<Result<Prober>> = pool.install(|| {
                leaves
                    .par_chunks(16)
                    .map(|chunk| {
                        config.check_deadline()?;
                        let mut prober = Prober::new(self.recs.len());
                        let mut scratch = Scratch::new(n_leaves);
                        for &leaf in chunk {
                            self.join_leaf(&ctx, &mut prober, leaf, &mut scratch);
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
        stats.index_entries = self.postings.len() as u64;
        stats.index_bytes = (self.postings.bytes()
            + self.maxweights.bytes()
            + self.directory.bytes()
            + self.tree.nodes().len() * size_of::<QuadNode>()) as u64;
        Ok(join::finish(pairs, stats))
    }
}

/// Quadtree-partitioned spatial-visual join.
pub fn svs_join_q(records: &[GeoImage], vocab: &Vocabulary, config: &JoinConfig) -> Result<JoinOutput> {
    QuadIndex::build(records, vocab, config)?.join()
}
