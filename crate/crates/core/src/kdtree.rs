//! Exact nearest-neighbor search over 3D points.

use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        dim: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    /// Tight bounds of the points under each node.
    bounds: Vec<([f64; 3], [f64; 3])>,
    /// Points reordered so every leaf covers a contiguous range.
    points: Vec<[f64; 3]>,
    /// Original index of each reordered point.
    indices: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        assert!(points.len() < u32::MAX as usize);
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut tree = Self {
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
            bounds: Vec::new(),
            points: Vec::new(),
            indices: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(points, &mut order, 0);
        }
        tree.points = order
            .iter()
            .map(|&i| {
                let p = points[i as usize];
                [p.x, p.y, p.z]
            })
            .collect();
        tree.indices = order;
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nearest(&self, q: &Vec3) -> Option<Neighbor> {
        if self.nodes.is_empty() {
            return None;
        }
        let q = [q.x, q.y, q.z];
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: f64::INFINITY,
        };
        self.search(0, &q, &mut best);
        Some(best)
    }

    pub fn nearest_distance(&self, q: &Vec3) -> Option<f64> {
        self.nearest(q).map(|n| n.dist_sq.sqrt())
    }

    fn box_dist(&self, node: u32, q: &[f64; 3]) -> f64 {
        let (lo, hi) = &self.bounds[node as usize];
        let mut d = 0.0;
        for k in 0..3 {
            let e = if q[k] < lo[k] {
                lo[k] - q[k]
            } else if q[k] > hi[k] {
                q[k] - hi[k]
            } else {
                0.0
            };
            d += e * e;
        }
        d
    }

    fn search(&self, node: u32, q: &[f64; 3], best: &mut Neighbor) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for slot in start as usize..end as usize {
                    let p = &self.points[slot];
                    let d = sq(p[0] - q[0]) + sq(p[1] - q[1]) + sq(p[2] - q[2]);
                    if d < best.dist_sq {
                        *best = Neighbor {
                            index: self.indices[slot] as usize,
                            dist_sq: d,
                        };
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let (near, far) = if q[dim as usize] <= value {
                    (left, right)
                } else {
                    (right, left)
                };
                if self.box_dist(near, q) < best.dist_sq {
                    self.search(near, q, best);
                }
                if self.box_dist(far, q) < best.dist_sq {
                    self.search(far, q, best);
                }
            }
        }
    }

    fn build(&mut self, points: &[Vec3], order: &mut [u32], offset: usize) -> u32 {
        let idx = self.nodes.len() as u32;
        let mut lo = points[order[0] as usize];
        let mut hi = lo;
        for &i in order.iter() {
            lo = lo.inf(&points[i as usize]);
            hi = hi.sup(&points[i as usize]);
        }
        self.bounds.push(([lo.x, lo.y, lo.z], [hi.x, hi.y, hi.z]));
        let leaf = Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        };
        let spread = hi - lo;
        let dim = spread.imax();
        // small sets, or all points coincide
        if order.len() <= LEAF_SIZE || spread[dim] == 0.0 {
            self.nodes.push(leaf);
            return idx;
        }
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            points[a as usize][dim]
                .total_cmp(&points[b as usize][dim])
                .then(a.cmp(&b))
        });
        let value = points[order[mid] as usize][dim];
        self.nodes.push(leaf);
        let (left_half, right_half) = order.split_at_mut(mid);
        // left holds coordinates ≤ value, right ≥ value
        let left = self.build(points, left_half, offset);
        let right = self.build(points, right_half, offset + mid);
        self.nodes[idx as usize] = Node::Split {
            dim: dim as u8,
            value,
            left,
            right,
        };
        idx
    }
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}
