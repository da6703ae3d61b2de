use std::mem::size_of;

use crate::join::{PostingEntry, Rec};

/// One leaf's slice of a token's posting list, `[start, end)` within the list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRange {
    pub leaf: u32,
    pub start: u32,
    pub end: u32,
}

/// One inverted index over all records, each posting list ordered by
/// (leaf, id), i.e. by slot.
#[derive(Debug, Clone, Default)]
pub struct GlobalPostings {
    offsets: Vec<u32>,
    entries: Vec<PostingEntry>,
    range_offsets: Vec<u32>,
    ranges: Vec<NodeRange>,
}

impl GlobalPostings {
    /// Indexes the probe prefix of every record. `leaf_of[slot]` must be
    /// non-decreasing.
    pub(crate) fn build(recs: &[Rec], leaf_of: &[u32], n_tokens: usize) -> Self {
        let mut offsets = vec![0u32; n_tokens + 1];
        for r in recs {
            for &t in &r.ranks[..r.probe_len as usize] {
                offsets[t as usize + 1] += 1;
            }
        }
        for k in 0..n_tokens {
            offsets[k + 1] += offsets[k];
        }
        let mut fill = offsets.clone();
        let mut entries = vec![PostingEntry { image: 0, prefix_pos: 0 }; offsets[n_tokens] as usize];
        for (slot, r) in recs.iter().enumerate() {
            for (i, &t) in r.ranks[..r.probe_len as usize].iter().enumerate() {
                let at = &mut fill[t as usize];
                entries[*at as usize] = PostingEntry {
                    image: slot as u32,
                    prefix_pos: i as u32,
                };
                *at += 1;
            }
        }

        let mut range_offsets = Vec::with_capacity(n_tokens + 1);
        let mut ranges = Vec::new();
        range_offsets.push(0);
        for t in 0..n_tokens {
            let list = &entries[offsets[t] as usize..offsets[t + 1] as usize];
            let mut k = 0;
            while k < list.len() {
                let leaf = leaf_of[list[k].image as usize];
                let start = k;
                while k < list.len() && leaf_of[list[k].image as usize] == leaf {
                    k += 1;
                }
                ranges.push(NodeRange {
                    leaf,
                    start: start as u32,
                    end: k as u32,
                });
            }
            range_offsets.push(ranges.len() as u32);
        }
        GlobalPostings {
            offsets,
            entries,
            range_offsets,
            ranges,
        }
    }

    pub fn token_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Full posting list of token rank `t`.
    pub fn list(&self, t: u32) -> &[PostingEntry] {
        &self.entries[self.offsets[t as usize] as usize..self.offsets[t as usize + 1] as usize]
    }

    pub fn node_ranges(&self, t: u32) -> &[NodeRange] {
        &self.ranges[self.range_offsets[t as usize] as usize..self.range_offsets[t as usize + 1] as usize]
    }

    /// Range of token `t` for `leaf`, if the leaf holds any of its postings.
    pub fn range_in(&self, t: u32, leaf: u32) -> Option<NodeRange> {
        let ranges = self.node_ranges(t);
        ranges.binary_search_by_key(&leaf, |r| r.leaf).ok().map(|k| ranges[k])
    }

    /// Entries `[start, end)` of the whole entry array, as given by a [`NodeDirectory`].
    #[inline]
    pub fn span(&self, s: [u32; 2]) -> &[PostingEntry] {
        &self.entries[s[0] as usize..s[1] as usize]
    }

    /// Postings of token `t` held by records of `leaf`.
    #[inline]
    pub fn leaf_postings(&self, t: u32, leaf: u32) -> &[PostingEntry] {
        match self.range_in(t, leaf) {
            Some(r) => &self.list(t)[r.start as usize..r.end as usize],
            None => &[],
        }
    }

    /// Position of `slot` in the posting list of `t`, if it is there.
    pub fn image_pos(&self, t: u32, slot: u32) -> Option<usize> {
        self.list(t).binary_search_by_key(&slot, |e| e.image).ok()
    }

    pub fn bytes(&self) -> usize {
        self.entries.len() * size_of::<PostingEntry>()
            + self.ranges.len() * size_of::<NodeRange>()
            + (self.offsets.len() + self.range_offsets.len()) * size_of::<u32>()
    }
}

/// The global postings regrouped by leaf: for every (leaf, token) pair of
/// [`LeafTokens`], the span of that leaf's postings of the token. A probe
/// reads a few nearby leaves over and over, so their postings stay in cache
/// where the token-major lists would not.
#[derive(Debug, Clone, Default)]
pub struct NodeDirectory {
    spans: Vec<[u32; 2]>,
    entries: Vec<PostingEntry>,
}

impl NodeDirectory {
    pub(crate) fn build(postings: &GlobalPostings, leaves: &LeafTokens) -> Self {
        let mut spans = vec![[0u32; 2]; leaves.len()];
        for t in 0..postings.token_count() as u32 {
            for r in postings.node_ranges(t) {
                let k = leaves.index(r.leaf, t).expect("indexed tokens occur in their leaf");
                spans[k][1] = r.end - r.start;
            }
        }
        // lay the spans out in (leaf, token) order, the dense index order
        let mut at = 0u32;
        for s in spans.iter_mut() {
            *s = [at, at + s[1]];
            at = s[1];
        }
        let mut entries = vec![PostingEntry { image: 0, prefix_pos: 0 }; at as usize];
        for t in 0..postings.token_count() as u32 {
            let list = postings.list(t);
            for r in postings.node_ranges(t) {
                let [a, b] = spans[leaves.index(r.leaf, t).expect("indexed tokens occur in their leaf")];
                entries[a as usize..b as usize].copy_from_slice(&list[r.start as usize..r.end as usize]);
            }
        }
        NodeDirectory { spans, entries }
    }

    /// Token `t`'s postings held by `leaf`, ordered by slot.
    #[inline]
    pub fn get(&self, leaves: &LeafTokens, t: u32, leaf: u32) -> &[PostingEntry] {
        match leaves.index(leaf, t) {
            Some(k) => {
                let [a, b] = self.spans[k];
                &self.entries[a as usize..b as usize]
            }
            None => &[],
        }
    }

    pub fn bytes(&self) -> usize {
        self.spans.len() * size_of::<[u32; 2]>() + self.entries.len() * size_of::<PostingEntry>()
    }
}

/// Which tokens occur in each leaf. Every (leaf, token) pair present gets a
/// dense index, leaf-major with tokens ascending.
#[derive(Debug, Clone)]
pub enum LeafTokens {
    /// One bit per (leaf, rank), `words` u64s per leaf, with the number of
    /// pairs before each word.
    Bits { words: usize, bits: Vec<u64>, before: Vec<u32> },
    /// Sorted ranks per leaf, for very large leaf x token products.
    Lists { offsets: Vec<u32>, ranks: Vec<u32> },
}

impl Default for LeafTokens {
    fn default() -> Self {
        LeafTokens::Lists {
            offsets: vec![0],
            ranks: Vec::new(),
        }
    }
}

/// Bitmaps are used up to this many bits (32 MiB).
const BITMAP_LIMIT: usize = 1 << 28;

impl LeafTokens {
    pub(crate) fn build(recs: &[Rec], leaf_of: &[u32], n_leaves: usize, n_tokens: usize) -> Self {
        let words = n_tokens.div_ceil(64);
        if n_leaves.saturating_mul(words * 64) <= BITMAP_LIMIT {
            let mut bits = vec![0u64; n_leaves * words];
            for (r, &leaf) in recs.iter().zip(leaf_of) {
                let row = leaf as usize * words;
                for &t in &r.ranks {
                    bits[row + t as usize / 64] |= 1 << (t % 64);
                }
            }
            let mut before = Vec::with_capacity(bits.len());
            let mut acc = 0u32;
            for w in &bits {
                before.push(acc);
                acc += w.count_ones();
            }
            LeafTokens::Bits { words, bits, before }
        } else {
            let mut lists = vec![Vec::new(); n_leaves];
            for (r, &leaf) in recs.iter().zip(leaf_of) {
                lists[leaf as usize].extend_from_slice(&r.ranks);
            }
            let mut offsets = vec![0u32];
            let mut ranks = Vec::new();
            for mut p in lists {
                p.sort_unstable();
                p.dedup();
                ranks.extend_from_slice(&p);
                offsets.push(ranks.len() as u32);
            }
            LeafTokens::Lists { offsets, ranks }
        }
    }

    /// Number of (leaf, token) pairs.
    pub fn len(&self) -> usize {
        match self {
            LeafTokens::Bits { bits, before, .. } => {
                before.last().map_or(0, |&b| b as usize + bits.last().map_or(0, |w| w.count_ones() as usize))
            }
            LeafTokens::Lists { ranks, .. } => ranks.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn contains(&self, leaf: u32, t: u32) -> bool {
        match self {
            LeafTokens::Bits { words, bits, .. } => bits[leaf as usize * words + t as usize / 64] >> (t % 64) & 1 == 1,
            LeafTokens::Lists { .. } => self.index(leaf, t).is_some(),
        }
    }

    /// Dense index of the pair, if `t` occurs in `leaf`.
    #[inline]
    pub fn index(&self, leaf: u32, t: u32) -> Option<usize> {
        match self {
            LeafTokens::Bits { words, bits, before } => {
                let at = leaf as usize * words + t as usize / 64;
                let word = bits[at];
                let bit = 1u64 << (t % 64);
                (word & bit != 0).then(|| (before[at] + (word & (bit - 1)).count_ones()) as usize)
            }
            LeafTokens::Lists { offsets, ranks } => {
                let lo = offsets[leaf as usize] as usize;
                let row = &ranks[lo..offsets[leaf as usize + 1] as usize];
                row.binary_search(&t).ok().map(|k| lo + k)
            }
        }
    }

    pub fn bytes(&self) -> usize {
        match self {
            LeafTokens::Bits { bits, before, .. } => bits.len() * size_of::<u64>() + before.len() * size_of::<u32>(),
            LeafTokens::Lists { offsets, ranks } => (offsets.len() + ranks.len()) * size_of::<u32>(),
        }
    }
}

/// Largest weight each token can contribute to any overlap, globally and
/// restricted to the records of one leaf.
#[derive(Debug, Clone, Default)]
pub struct TokenMaxWeights {
    global: Vec<u64>,
    leaves: LeafTokens,
}

impl TokenMaxWeights {
    pub(crate) fn build(recs: &[Rec], leaf_of: &[u32], n_leaves: usize, units: &[u64]) -> Self {
        let mut global = vec![0u64; units.len()];
        for r in recs {
            for &t in &r.ranks {
                global[t as usize] = units[t as usize];
            }
        }
        TokenMaxWeights {
            global,
            leaves: LeafTokens::build(recs, leaf_of, n_leaves, units.len()),
        }
    }

    /// Tokens present per leaf.
    pub fn leaves(&self) -> &LeafTokens {
        &self.leaves
    }

    pub fn global(&self, t: u32) -> u64 {
        self.global[t as usize]
    }

    #[inline]
    pub fn in_leaf(&self, leaf: u32, t: u32) -> u64 {
        if self.leaves.contains(leaf, t) {
            self.global[t as usize]
        } else {
            0
        }
    }

    /// Remaining-score table for one probe against one leaf (or globally):
    /// `out[i]` bounds what the probe's tokens from position `i` on can share
    /// with any record there. Only the tokens of `head` are checked; `tail` is
    /// the weight of the probe's tokens after them, counted in full.
    pub(crate) fn suffix_scores(&self, head: &[u32], tail: u64, leaf: Option<u32>, out: &mut Vec<u64>) {
        match (leaf, &self.leaves) {
            (None, _) => suffix_sums(head, tail, out, |t| self.global[t]),
            (Some(l), LeafTokens::Bits { words, bits, .. }) => {
                let row = &bits[l as usize * words..(l as usize + 1) * words];
                suffix_sums(head, tail, out, |t| (row[t / 64] >> (t % 64) & 1) * self.global[t])
            }
            (Some(l), LeafTokens::Lists { .. }) => suffix_sums(head, tail, out, |t| self.in_leaf(l, t as u32)),
        }
    }

    pub fn bytes(&self) -> usize {
        self.global.len() * size_of::<u64>() + self.leaves.bytes()
    }
}

/// `out[k]` = `tail` plus the sum of `w` over `ranks[k..]`.
#[inline]
fn suffix_sums(ranks: &[u32], tail: u64, out: &mut Vec<u64>, w: impl Fn(usize) -> u64) {
    out.clear();
    out.resize(ranks.len() + 1, tail);
    let mut acc = tail;
    for (slot, &t) in out.iter_mut().zip(ranks).rev() {
        acc += w(t as usize);
        *slot = acc;
    }
}
