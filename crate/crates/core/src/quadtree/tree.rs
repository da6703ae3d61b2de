use super::morton::morton_encode;
use crate::error::{Error, Result};
use crate::join::GEO_SLACK;
use crate::model::GeoImage;

/// Depth cap for any threshold, so codes and cell indices stay in range.
pub const DEPTH_LIMIT: u32 = 30;

/// Axis-aligned square `[x, x + side) x [y, y + side)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub x: f64,
    pub y: f64,
    pub side: f64,
}

impl Square {
    pub fn area(&self) -> f64 {
        self.side * self.side
    }
}

#[derive(Debug, Clone)]
pub struct QuadNode {
    pub depth: u32,
    /// Path code at `depth`: `2 * depth` bits.
    pub morton: u64,
    pub region: Square,
    pub children: Option<[usize; 4]>,
    /// Record ids, sorted; leaves only.
    pub records: Vec<u64>,
}

impl QuadNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Largest depth whose cells are at least `gamma_g` of the root side:
/// `floor(log2(1 / gamma_g))`, capped at [`DEPTH_LIMIT`].
pub fn max_depth_for(gamma_g: f64) -> Result<u32> {
    if gamma_g <= 0.0 || gamma_g.is_nan() {
        return Err(Error::ZeroGeoThreshold);
    }
    let mut d = 0;
    while d < DEPTH_LIMIT && (1u64 << (d + 1)) as f64 * gamma_g <= 1.0 {
        d += 1;
    }
    Ok(d)
}

/// Region quadtree over the bounding square of a point set.
#[derive(Debug, Clone)]
pub struct QuadTree {
    nodes: Vec<QuadNode>,
    /// Node indices of the leaves in Z-order.
    leaves: Vec<usize>,
    origin: (f64, f64),
    side: f64,
    max_depth: u32,
    leaf_capacity: usize,
    radius: f64,
}

impl QuadTree {
    /// Builds the tree; also returns the input indices in (leaf, id) order
    /// and the leaf of each of those positions.
    pub(crate) fn build_ordered(
        points: &[(u64, f64, f64)],
        gamma_g: f64,
        max_dis: f64,
        leaf_capacity: usize,
    ) -> Result<(Self, Vec<usize>, Vec<u32>)> {
        let max_depth = max_depth_for(gamma_g)?;
        if leaf_capacity == 0 {
            return Err(Error::InvalidConfig("leaf capacity must be positive".into()));
        }
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(_, x, y) in points {
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        if points.is_empty() {
            (min_x, min_y, max_x, max_y) = (0.0, 0.0, 0.0, 0.0);
        }
        let mut side = (max_x - min_x).max(max_y - min_y);
        if side <= 0.0 {
            side = 1.0;
        }

        let mut tree = QuadTree {
            nodes: Vec::new(),
            leaves: Vec::new(),
            origin: (min_x, min_y),
            side,
            max_depth,
            leaf_capacity,
            radius: gamma_g * max_dis,
        };

        let mut keyed: Vec<(u64, u64, usize)> = points
            .iter()
            .enumerate()
            .map(|(k, &(id, x, y))| {
                let (c, r) = tree.cell_coords(x, y);
                (morton_encode(c, r, max_depth).expect("cell in range"), id, k)
            })
            .collect();
        keyed.sort_unstable();

        let mut order = Vec::with_capacity(points.len());
        let mut leaf_of = Vec::with_capacity(points.len());
        tree.split(0, 0, &mut keyed[..], &mut order, &mut leaf_of);
        Ok((tree, order, leaf_of))
    }

    /// Recursively creates the node for `code` at `depth` over `items`
    /// (sorted by full-depth code) and returns its index.
    fn split(
        &mut self,
        depth: u32,
        code: u64,
        items: &mut [(u64, u64, usize)],
        order: &mut Vec<usize>,
        leaf_of: &mut Vec<u32>,
    ) -> usize {
        let idx = self.nodes.len();
        let cell_side = self.side / (1u64 << depth) as f64;
        let (col, row) = super::morton::morton_decode(code, depth).expect("code in range");
        self.nodes.push(QuadNode {
            depth,
            morton: code,
            region: Square {
                x: self.origin.0 + col as f64 * cell_side,
                y: self.origin.1 + row as f64 * cell_side,
                side: cell_side,
            },
            children: None,
            records: Vec::new(),
        });

        if items.len() <= self.leaf_capacity || depth >= self.max_depth {
            items.sort_unstable_by_key(|&(_, id, _)| id);
            let leaf_idx = self.leaves.len() as u32;
            self.leaves.push(idx);
            self.nodes[idx].records = items.iter().map(|&(_, id, _)| id).collect();
            for &(_, _, k) in items.iter() {
                order.push(k);
                leaf_of.push(leaf_idx);
            }
            return idx;
        }

        let shift = 2 * (self.max_depth - depth - 1);
        let mut children = [0usize; 4];
        let mut rest = items;
        for (q, child) in children.iter_mut().enumerate() {
            let cut = rest.partition_point(|&(c, _, _)| ((c >> shift) & 3) as usize <= q);
            let (mine, tail) = rest.split_at_mut(cut);
            *child = self.split(depth + 1, (code << 2) | q as u64, mine, order, leaf_of);
            rest = tail;
        }
        self.nodes[idx].children = Some(children);
        idx
    }

    /// Cell of a point at `max_depth` by the floor rule, clamped.
    pub fn cell_coords(&self, x: f64, y: f64) -> (u32, u32) {
        let n = 1u64 << self.max_depth;
        let scale = n as f64 / self.side;
        let clamp = |v: f64| (v.floor().max(0.0) as u64).min(n - 1) as u32;
        (clamp((x - self.origin.0) * scale), clamp((y - self.origin.1) * scale))
    }

    /// Position in max-depth cell units, unclamped.
    pub fn cell_position(&self, x: f64, y: f64) -> (f64, f64) {
        let scale = (1u64 << self.max_depth) as f64 / self.side;
        ((x - self.origin.0) * scale, (y - self.origin.1) * scale)
    }

    /// Half-open column and row span of leaf `k` in max-depth cells.
    pub fn leaf_span(&self, k: usize) -> ((u64, u64), (u64, u64)) {
        self.span(self.leaf(k))
    }

    /// Search radius in max-depth cell units, with the spatial margin.
    pub fn radius_cells(&self) -> f64 {
        self.radius * (1.0 + GEO_SLACK) * (1u64 << self.max_depth) as f64 / self.side
    }

    pub fn root(&self) -> &QuadNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &QuadNode {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Leaf `k` in Z-order.
    pub fn leaf(&self, k: usize) -> &QuadNode {
        &self.nodes[self.leaves[k]]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &QuadNode> {
        self.leaves.iter().map(|&i| &self.nodes[i])
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// Distance threshold in raw coordinate units.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Leaf code left-aligned to `max_depth`; orders leaves of any depth.
    pub fn leaf_key(&self, k: usize) -> u64 {
        let n = self.leaf(k);
        n.morton << (2 * (self.max_depth - n.depth))
    }

    /// Z-order index of the leaf containing a point.
    pub fn locate(&self, x: f64, y: f64) -> usize {
        let (c, r) = self.cell_coords(x, y);
        let code = morton_encode(c, r, self.max_depth).expect("cell in range");
        let mut idx = 0;
        while let Some(children) = self.nodes[idx].children {
            let depth = self.nodes[idx].depth;
            let q = (code >> (2 * (self.max_depth - depth - 1))) & 3;
            idx = children[q as usize];
        }
        self.leaves.iter().position(|&l| l == idx).expect("leaf registered")
    }

    /// Half-open column and row span of a node in max-depth cells.
    fn span(&self, node: &QuadNode) -> ((u64, u64), (u64, u64)) {
        let (c, r) = super::morton::morton_decode(node.morton, node.depth).expect("code in range");
        let shift = self.max_depth - node.depth;
        let size = 1u64 << shift;
        let (c0, r0) = ((c as u64) << shift, (r as u64) << shift);
        ((c0, c0 + size), (r0, r0 + size))
    }

    /// Whether points in the two nodes could lie within the radius. Gaps are
    /// counted in whole max-depth cells, a lower bound on point separation.
    fn within_reach(&self, a: &QuadNode, b: &QuadNode) -> bool {
        let ((ac0, ac1), (ar0, ar1)) = self.span(a);
        let ((bc0, bc1), (br0, br1)) = self.span(b);
        let gap = |lo_a: u64, hi_a: u64, lo_b: u64, hi_b: u64| lo_a.saturating_sub(hi_b).max(lo_b.saturating_sub(hi_a));
        let gx = gap(ac0, ac1, bc0, bc1) as f64;
        let gy = gap(ar0, ar1, br0, br1) as f64;
        let cell = self.side / (1u64 << self.max_depth) as f64;
        let reach = self.radius * (1.0 + GEO_SLACK);
        cell * cell * (gx * gx + gy * gy) <= reach * reach
    }

    /// Every other leaf within reach of leaf `k`, in Z-order.
    pub fn leaf_neighbors_all(&self, k: usize) -> Vec<usize> {
        let target = self.leaf(k);
        let mut found = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !self.within_reach(node, target) {
                continue;
            }
            match node.children {
                Some(ch) => stack.extend(ch.iter().rev()),
                None if i != self.leaves[k] => found.push(i),
                None => {}
            }
        }
        let mut out: Vec<usize> = found
            .into_iter()
            .map(|i| self.leaves.binary_search_by_key(&self.key_of(i), |&l| self.key_of(l)).expect("leaf"))
            .collect();
        out.sort_unstable();
        out
    }

    /// Neighbors of leaf `k` that precede it in Z-order.
    pub fn leaf_neighbors(&self, k: usize) -> Vec<usize> {
        self.leaf_neighbors_all(k).into_iter().filter(|&j| j < k).collect()
    }

    fn key_of(&self, node_idx: usize) -> u64 {
        let n = &self.nodes[node_idx];
        n.morton << (2 * (self.max_depth - n.depth))
    }

    /// Brute-force neighbor scan over all leaves, for cross-checking.
    pub fn leaf_neighbors_scan(&self, k: usize) -> Vec<usize> {
        let target = self.leaf(k);
        (0..self.leaf_count())
            .filter(|&j| j != k && self.within_reach(self.leaf(j), target))
            .collect()
    }
}

pub fn build_quadtree(dataset: &[GeoImage], gamma_g: f64, max_dis: f64, leaf_capacity: usize) -> Result<QuadTree> {
    let points: Vec<(u64, f64, f64)> = dataset.iter().map(|r| (r.id, r.x, r.y)).collect();
    QuadTree::build_ordered(&points, gamma_g, max_dis, leaf_capacity).map(|(t, _, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(n: usize, seed: u64) -> Vec<GeoImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| GeoImage::new(i as u64, rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), vec![]))
            .collect()
    }

    #[test]
    fn depth_rule() {
        assert_eq!(max_depth_for(0.06).unwrap(), 4);
        assert_eq!(max_depth_for(1.0).unwrap(), 0);
        assert_eq!(max_depth_for(0.5).unwrap(), 1);
        assert_eq!(max_depth_for(0.25).unwrap(), 2);
        assert_eq!(max_depth_for(0.3).unwrap(), 1);
        assert!(max_depth_for(0.0).is_err());
        assert_eq!(max_depth_for(1e-30).unwrap(), DEPTH_LIMIT);
    }

    #[test]
    fn small_input_is_one_leaf() {
        let data = pts(3, 1);
        let t = build_quadtree(&data, 0.06, 100.0, 64).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert!(t.root().is_leaf());
        assert_eq!(t.root().records, vec![0, 1, 2]);
        assert!(t.leaf_neighbors(0).is_empty());
    }

    #[test]
    fn structure_on_ten_thousand_points() {
        let data = pts(10_000, 2);
        let t = build_quadtree(&data, 0.02, 141.0, 64).unwrap();
        let mut area = 0.0;
        let mut count = 0;
        for leaf in t.leaves() {
            assert!(leaf.records.len() <= 64 || leaf.depth == t.max_depth());
            area += leaf.region.area();
            for &id in &leaf.records {
                let r = &data[id as usize];
                let s = leaf.region;
                assert!(r.x >= s.x - 1e-9 && r.x <= s.x + s.side + 1e-9);
                assert!(r.y >= s.y - 1e-9 && r.y <= s.y + s.side + 1e-9);
            }
            count += leaf.records.len();
        }
        assert_eq!(count, data.len());
        assert!((area - t.root().region.area()).abs() < 1e-6 * t.root().region.area());
    }

    #[test]
    fn children_are_quadrants_of_parent() {
        let data = pts(2000, 3);
        let t = build_quadtree(&data, 0.01, 141.0, 16).unwrap();
        for node in t.nodes() {
            if let Some(ch) = node.children {
                for (q, &c) in ch.iter().enumerate() {
                    let child = t.node(c);
                    assert_eq!(child.depth, node.depth + 1);
                    assert_eq!(child.morton >> 2, node.morton);
                    assert_eq!(child.morton & 3, q as u64);
                    assert!((child.region.side * 2.0 - node.region.side).abs() < 1e-9);
                    let dx = if q & 1 == 1 { child.region.side } else { 0.0 };
                    let dy = if q & 2 == 2 { child.region.side } else { 0.0 };
                    assert!((child.region.x - node.region.x - dx).abs() < 1e-9);
                    assert!((child.region.y - node.region.y - dy).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn neighbor_descent_matches_scan() {
        let data = pts(3000, 4);
        for (g, cap) in [(0.05, 8), (0.12, 32), (0.3, 4)] {
            let t = build_quadtree(&data, g, 141.0, cap).unwrap();
            for k in 0..t.leaf_count() {
                assert_eq!(t.leaf_neighbors_all(k), t.leaf_neighbors_scan(k));
                for j in t.leaf_neighbors_all(k) {
                    assert!(t.leaf_neighbors_all(j).contains(&k), "asymmetric {k} {j}");
                }
                assert!(t.leaf_neighbors(k).iter().all(|&j| j < k));
            }
        }
    }

    #[test]
    fn uniform_depth_two_interior_neighbors() {
        // 16 points, one per depth-2 cell; capacity 1 forces a full depth-2 tree.
        let data: Vec<GeoImage> = (0..16)
            .map(|i| GeoImage::new(i, (i % 4) as f64 * 25.0 + 12.5, (i / 4) as f64 * 25.0 + 12.5, vec![]))
            .collect();
        // radius 20 < leaf side 25
        let t = build_quadtree(&data, 0.25, 80.0, 1).unwrap();
        assert_eq!(t.leaf_count(), 16);
        // interior cell (col 1, row 1)
        let k = t.locate(37.5, 37.5);
        let got: Vec<(u32, u32)> = t
            .leaf_neighbors(k)
            .into_iter()
            .map(|j| super::super::morton::morton_decode(t.leaf(j).morton, 2).unwrap())
            .collect();
        let mut expected: Vec<(u32, u32)> = Vec::new();
        for r in 0..3u32 {
            for c in 0..3u32 {
                if (c, r) != (1, 1) && morton_encode(c, r, 2).unwrap() < morton_encode(1, 1, 2).unwrap() {
                    expected.push((c, r));
                }
            }
        }
        let mut got_sorted = got.clone();
        got_sorted.sort();
        expected.sort();
        assert_eq!(got_sorted, expected);
    }

    #[test]
    fn unequal_depth_leaves_see_each_other() {
        let mut data: Vec<GeoImage> = (0..40)
            .map(|i| GeoImage::new(i, 10.0 + (i % 7) as f64, 10.0 + (i / 7) as f64, vec![]))
            .collect();
        data.push(GeoImage::new(100, 90.0, 90.0, vec![]));
        data.push(GeoImage::new(101, 0.0, 0.0, vec![]));
        let t = build_quadtree(&data, 0.1, 127.0, 8).unwrap();
        let depths: Vec<u32> = t.leaves().map(|l| l.depth).collect();
        assert!(depths.iter().min() != depths.iter().max());
        let mut found = false;
        for k in 0..t.leaf_count() {
            for j in t.leaf_neighbors_all(k) {
                if t.leaf(j).depth != t.leaf(k).depth {
                    found = true;
                    assert!(t.leaf_neighbors_all(j).contains(&k));
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn leaves_are_in_z_order() {
        let data = pts(5000, 9);
        let t = build_quadtree(&data, 0.01, 141.0, 20).unwrap();
        for k in 1..t.leaf_count() {
            assert!(t.leaf_key(k - 1) < t.leaf_key(k));
        }
        for r in data.iter().take(500) {
            let k = t.locate(r.x, r.y);
            assert!(t.leaf(k).records.contains(&r.id));
        }
    }
}
