//! Static k-d tree over a subset of sample ids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::space::dist_sq;

const LEAF_SIZE: usize = 8;

enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Spatial index supporting exact k-nearest and radius queries.
///
/// Ties in distance are broken by lower id, so results match a brute-force
/// scan exactly.
pub struct NeighborIndex {
    dim: usize,
    /// Point coordinates, stored contiguously in `order`.
    coords: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(PartialEq)]
struct Candidate {
    d2: f64,
    id: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

impl NeighborIndex {
    /// Builds the index from `(id, coordinates)` pairs.
    pub fn build<'a, I>(dim: usize, points: I) -> Self
    where
        I: IntoIterator<Item = (usize, &'a [f64])>,
    {
        let mut ids = Vec::new();
        let mut raw = Vec::new();
        for (id, p) in points {
            debug_assert_eq!(p.len(), dim);
            ids.push(id);
            raw.extend_from_slice(p);
        }
        let mut perm: Vec<usize> = (0..ids.len()).collect();
        let mut nodes = Vec::new();
        if !perm.is_empty() {
            build_node(dim, &raw, &mut perm, 0, &mut nodes);
        }
        let mut coords = Vec::with_capacity(raw.len());
        for &p in &perm {
            coords.extend_from_slice(&raw[p * dim..(p + 1) * dim]);
        }
        let order = perm.iter().map(|&p| ids[p]).collect();
        Self {
            dim,
            coords,
            order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    /// The `k` nearest indexed ids to `query`, skipping `exclude`, ordered by
    /// (distance, id). Returns `(id, squared distance)` pairs.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, query, k, exclude, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.id, c.d2)).collect()
    }

    fn knn_rec(
        &self,
        node: usize,
        query: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let id = self.order[slot];
                    if Some(id) == exclude {
                        continue;
                    }
                    let cand = Candidate {
                        d2: dist_sq(query, self.point(slot)),
                        id,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near, query, k, exclude, heap);
                // ties must still be visited for exact id tie-breaking
                if heap.len() < k || diff * diff <= heap.peek().unwrap().d2 {
                    self.knn_rec(far, query, k, exclude, heap);
                }
            }
        }
    }

    /// All indexed ids within `radius` (inclusive) of `query`, skipping
    /// `exclude`, ordered by (distance, id).
    pub fn within(&self, query: &[f64], radius: f64, exclude: Option<usize>) -> Vec<(usize, f64)> {
        let mut out: Vec<Candidate> = Vec::new();
        if self.nodes.is_empty() || !(radius >= 0.0) {
            return Vec::new();
        }
        let r2 = radius * radius;
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            match self.nodes[node] {
                Node::Leaf { start, end } => {
                    for slot in start..end {
                        let id = self.order[slot];
                        if Some(id) == exclude {
                            continue;
                        }
                        let d2 = dist_sq(query, self.point(slot));
                        if d2 <= r2 {
                            out.push(Candidate { d2, id });
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = query[axis] - value;
                    if diff <= 0.0 || diff * diff <= r2 {
                        stack.push(left);
                    }
                    if diff >= 0.0 || diff * diff <= r2 {
                        stack.push(right);
                    }
                }
            }
        }
        out.sort();
        out.into_iter().map(|c| (c.id, c.d2)).collect()
    }
}

fn build_node(dim: usize, raw: &[f64], perm: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let me = nodes.len();
    if perm.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + perm.len(),
        });
        return me;
    }
    // split on the axis of widest spread
    let mut best_axis = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for axis in 0..dim {
        let (lo, hi) = perm.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            let v = raw[p * dim + axis];
            (lo.min(v), hi.max(v))
        });
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best_axis = axis;
        }
    }
    let mid = perm.len() / 2;
    perm.select_nth_unstable_by(mid, |&a, &b| {
        raw[a * dim + best_axis].total_cmp(&raw[b * dim + best_axis])
    });
    let value = raw[perm[mid] * dim + best_axis];
    // placeholder, patched once children exist
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lo, hi) = perm.split_at_mut(mid);
    let left = build_node(dim, raw, lo, offset, nodes);
    let right = build_node(dim, raw, hi, offset + mid, nodes);
    nodes[me] = Node::Split {
        axis: best_axis,
        value,
        left,
        right,
    };
    me
}
