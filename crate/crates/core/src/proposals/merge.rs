use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::data::RegionMask;
use crate::error::{contract, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::contour::ContourMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Merge<T> {
    pub a: usize,
    pub b: usize,
    pub threshold: T,
}

/// Binary merge hierarchy over superpixel leaves.
///
/// Leaves are nodes `0..n_leaves`; the `i`-th merge creates node
/// `n_leaves + i`. Thresholds are non-decreasing, which makes the hierarchy
/// an ultrametric: a node appears at its merge threshold and disappears at
/// its parent's.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeTree<T> {
    labels: Grid<u32>,
    n_leaves: usize,
    merges: Vec<Merge<T>>,
    parent: Vec<Option<usize>>,
}

#[derive(PartialEq)]
struct Candidate {
    strength: f64,
    seeds: (u32, u32),
    nodes: (usize, usize),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Reversed so the max-heap pops the weakest boundary, then the lowest seeds.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .strength
            .total_cmp(&self.strength)
            .then_with(|| other.seeds.cmp(&self.seeds))
            .then_with(|| other.nodes.cmp(&self.nodes))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> MergeTree<T> {
    /// Greedily merges adjacent regions by ascending mean boundary strength.
    ///
    /// A boundary's strength is the mean, over the crack edges separating
    /// the two regions, of the larger contour value of the two pixels. Ties
    /// go to the pair whose seeds (first pixel in raster order) come first.
    pub fn build(labels: Grid<u32>, contour: &ContourMap<T>) -> Result<Self> {
        if labels.dims() != contour.strength.dims() {
            return contract("labels and contour map differ in size");
        }
        let (w, h) = labels.dims();
        let n_leaves = labels.data().iter().max().map_or(0, |m| *m as usize + 1);
        if n_leaves == 0 {
            return contract("empty label raster");
        }
        let mut seeds = vec![u32::MAX; n_leaves];
        for (p, &l) in labels.data().iter().enumerate() {
            let s = &mut seeds[l as usize];
            *s = (*s).min(p as u32);
        }
        let mut adjacency: Vec<BTreeMap<usize, (T, usize)>> = vec![BTreeMap::new(); n_leaves];
        let s = &contour.strength;
        let mut add = |p: usize, q: usize| {
            let (a, b) = (labels.data()[p] as usize, labels.data()[q] as usize);
            if a != b {
                let v = s.data()[p].max(s.data()[q]);
                for (x, y) in [(a, b), (b, a)] {
                    let e = adjacency[x].entry(y).or_insert((T::zero(), 0));
                    e.0 += v;
                    e.1 += 1;
                }
            }
        };
        for r in 0..h {
            for c in 0..w {
                let p = r * w + c;
                if c + 1 < w {
                    add(p, p + 1);
                }
                if r + 1 < h {
                    add(p, p + w);
                }
            }
        }

        let mut heap = BinaryHeap::new();
        let push = |heap: &mut BinaryHeap<Candidate>, seeds: &[u32], a: usize, b: usize, e: (T, usize)| {
            let (sa, sb) = (seeds[a], seeds[b]);
            heap.push(Candidate {
                strength: (e.0 / T::from_usize_lossy(e.1)).as_f64(),
                seeds: (sa.min(sb), sa.max(sb)),
                nodes: (a.min(b), a.max(b)),
            });
        };
        for a in 0..n_leaves {
            for (&b, &e) in &adjacency[a] {
                if a < b {
                    push(&mut heap, &seeds, a, b, e);
                }
            }
        }

        let mut alive = vec![true; n_leaves];
        let mut merges: Vec<Merge<T>> = Vec::with_capacity(n_leaves.saturating_sub(1));
        let mut level = T::zero();
        let mut remaining = n_leaves;
        while remaining > 1 {
            let (a, b, strength) = match heap.pop() {
                Some(c) if alive[c.nodes.0] && alive[c.nodes.1] => (c.nodes.0, c.nodes.1, c.strength),
                Some(_) => continue,
                None => {
                    // Disconnected remainder: join in seed order at the top level.
                    let mut live: Vec<usize> = (0..alive.len()).filter(|&i| alive[i]).collect();
                    live.sort_by_key(|&i| seeds[i]);
                    (live[0], live[1], 1.0)
                }
            };
            level = level.max(T::lit(strength)).min(T::one());
            let node = alive.len();
            alive[a] = false;
            alive[b] = false;
            alive.push(true);
            seeds.push(seeds[a].min(seeds[b]));
            let mut nbrs = std::mem::take(&mut adjacency[a]);
            for (k, e) in std::mem::take(&mut adjacency[b]) {
                let slot = nbrs.entry(k).or_insert((T::zero(), 0));
                slot.0 += e.0;
                slot.1 += e.1;
            }
            nbrs.remove(&a);
            nbrs.remove(&b);
            for (&k, &e) in &nbrs {
                adjacency[k].remove(&a);
                adjacency[k].remove(&b);
                adjacency[k].insert(node, e);
                push(&mut heap, &seeds, node, k, e);
            }
            adjacency.push(nbrs);
            merges.push(Merge { a, b, threshold: level });
            remaining -= 1;
        }
        Self::from_parts(labels, merges)
    }

    /// Assembles a tree from a leaf raster and an explicit merge sequence.
    pub fn from_parts(labels: Grid<u32>, merges: Vec<Merge<T>>) -> Result<Self> {
        let n_leaves = labels.data().iter().max().map_or(0, |m| *m as usize + 1);
        let n_nodes = n_leaves + merges.len();
        let mut parent = vec![None; n_nodes];
        let mut prev = T::zero();
        for (i, m) in merges.iter().enumerate() {
            let node = n_leaves + i;
            if m.a >= node || m.b >= node || m.a == m.b {
                return contract(format!("merge {} references invalid nodes", i));
            }
            if parent[m.a].is_some() || parent[m.b].is_some() {
                return contract(format!("merge {} reuses an absorbed node", i));
            }
            if m.threshold < prev || m.threshold > T::one() {
                return contract("merge thresholds must be non-decreasing within [0, 1]");
            }
            prev = m.threshold;
            parent[m.a] = Some(node);
            parent[m.b] = Some(node);
        }
        if n_leaves > 0 && merges.len() + 1 != n_leaves {
            return contract("merges must end in a single root");
        }
        Ok(Self {
            labels,
            n_leaves,
            merges,
            parent,
        })
    }

    pub fn labels(&self) -> &Grid<u32> {
        &self.labels
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_nodes(&self) -> usize {
        self.n_leaves + self.merges.len()
    }

    pub fn merges(&self) -> &[Merge<T>] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        self.n_nodes() - 1
    }

    /// Threshold at which `node` is formed; 0 for leaves.
    pub fn appear(&self, node: usize) -> T {
        if node < self.n_leaves {
            T::zero()
        } else {
            self.merges[node - self.n_leaves].threshold
        }
    }

    /// Threshold at which `node` is absorbed; 1 for the root.
    pub fn disappear(&self, node: usize) -> T {
        match self.parent[node] {
            Some(p) => self.merges[p - self.n_leaves].threshold,
            None => T::one(),
        }
    }

    fn children(&self, node: usize) -> Option<(usize, usize)> {
        (node >= self.n_leaves).then(|| {
            let m = &self.merges[node - self.n_leaves];
            (m.a, m.b)
        })
    }

    /// Visits nodes in creation order with their sorted pixel indices; stops
    /// early when `f` returns false.
    pub fn for_each_node_pixels(&self, mut f: impl FnMut(usize, &[u32]) -> bool) {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); self.n_nodes()];
        for (p, &l) in self.labels.data().iter().enumerate() {
            lists[l as usize].push(p as u32);
        }
        for node in 0..self.n_leaves {
            if !f(node, &lists[node]) {
                return;
            }
        }
        for node in self.n_leaves..self.n_nodes() {
            let (a, b) = self.children(node).unwrap();
            let (la, lb) = (std::mem::take(&mut lists[a]), std::mem::take(&mut lists[b]));
            let mut merged = Vec::with_capacity(la.len() + lb.len());
            let (mut i, mut j) = (0, 0);
            while i < la.len() && j < lb.len() {
                if la[i] < lb[j] {
                    merged.push(la[i]);
                    i += 1;
                } else {
                    merged.push(lb[j]);
                    j += 1;
                }
            }
            merged.extend_from_slice(&la[i..]);
            merged.extend_from_slice(&lb[j..]);
            if !f(node, &merged) {
                return;
            }
            lists[node] = merged;
        }
    }

    /// Node with the highest IOU against `region` (lowest id on ties).
    pub fn best_node(&self, region: &RegionMask) -> Result<(usize, f64)> {
        if self.n_leaves == 0 {
            return contract("merge tree is empty");
        }
        if region.dims() != self.labels.dims() {
            return contract("region dims differ from merge tree");
        }
        let n = self.n_nodes();
        let mut inter = vec![0usize; n];
        let mut area = vec![0usize; n];
        for &l in self.labels.data() {
            area[l as usize] += 1;
        }
        for &p in region.indices() {
            inter[self.labels.data()[p as usize] as usize] += 1;
        }
        for node in self.n_leaves..n {
            let (a, b) = self.children(node).unwrap();
            inter[node] = inter[a] + inter[b];
            area[node] = area[a] + area[b];
        }
        let mut best = (0, -1.0);
        for node in 0..n {
            let iou = inter[node] as f64 / (area[node] + region.area() - inter[node]) as f64;
            if iou > best.1 {
                best = (node, iou);
            }
        }
        Ok(best)
    }
}

/// `(appear, disappear)` thresholds of the tree node matching `region`, or
/// of its maximal-IOU node when no node matches exactly.
pub fn ucm_bounds<T: Real>(region: &RegionMask, tree: &MergeTree<T>) -> Result<(T, T)> {
    let (node, _) = tree.best_node(region)?;
    Ok((tree.appear(node), tree.disappear(node)))
}
