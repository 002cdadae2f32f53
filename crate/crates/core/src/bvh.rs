//! Bounding volume hierarchy over world-space triangles.
//!
//! Built by median split on the longest centroid axis with at most
//! [`LEAF_SIZE`] triangles per leaf. Queries return the nearest hit with ties
//! broken by the lowest triangle id, so results match [`brute_force_intersect`]
//! bit for bit.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::Scene;

pub const LEAF_SIZE: usize = 4;

/// Hits closer than this are ignored.
pub const T_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle: u32,
}

impl Hit {
    #[inline]
    fn closer_than(&self, other: &Option<Hit>) -> bool {
        match other {
            None => true,
            Some(o) => self.t < o.t || (self.t == o.t && self.triangle < o.triangle),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Triangle {
    v0: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl Triangle {
    fn new(t: &[Vec3; 3]) -> Self {
        Self {
            v0: t[0],
            e1: t[1] - t[0],
            e2: t[2] - t[0],
        }
    }

    /// Möller–Trumbore, two-sided.
    #[inline]
    fn intersect(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let p = dir.cross(&self.e2);
        let det = self.e1.dot(&p);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - self.v0;
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(&self.e1);
        let v = dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = self.e2.dot(&q) * inv;
        (t >= T_MIN).then_some(t)
    }
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    min: Vec3,
    max: Vec3,
}

impl Bounds {
    fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn padded(mut self) -> Self {
        let scale = self.min.abs().max().max(self.max.abs().max());
        let eps = 1e-9 * (1.0 + scale);
        self.min.add_scalar_mut(-eps);
        self.max.add_scalar_mut(eps);
        self
    }

    fn contains(&self, other: &Bounds) -> bool {
        (0..3).all(|a| self.min[a] <= other.min[a] && self.max[a] >= other.max[a])
    }

    /// Entry distance of the ray into the box, if it enters before `limit`.
    #[inline]
    fn entry(&self, origin: &Vec3, inv_dir: &Vec3, limit: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = limit;
        for a in 0..3 {
            let near = (self.min[a] - origin[a]) * inv_dir[a];
            let far = (self.max[a] - origin[a]) * inv_dir[a];
            // NaN (0 * inf) leaves the interval untouched
            t0 = t0.max(near.min(far));
            t1 = t1.min(near.max(far));
        }
        (t0 <= t1).then_some(t0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Bounds,
    /// First triangle slot for leaves, left child index for inner nodes.
    first: u32,
    /// Triangle count for leaves, 0 for inner nodes (right child = left + 1).
    count: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    triangles: Vec<Triangle>,
    /// Original triangle id for each slot in `triangles`.
    ids: Vec<u32>,
}

impl Bvh {
    pub fn build(scene: &Scene) -> Result<Self> {
        let tris = scene.world_triangles();
        if tris.is_empty() {
            return Err(Error::EmptyScene);
        }
        Ok(Self::from_triangles(&tris))
    }

    /// `tris` must be nonempty.
    pub fn from_triangles(tris: &[[Vec3; 3]]) -> Self {
        assert!(!tris.is_empty(), "BVH needs at least one triangle");
        assert!(tris.len() < u32::MAX as usize);
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        nodes.push(Node {
            bounds: Bounds::empty(),
            first: 0,
            count: 0,
        });
        let mut stack = vec![(0usize, 0usize, tris.len())];
        while let Some((node_idx, start, end)) = stack.pop() {
            let slice = &mut order[start..end];
            let mut bounds = Bounds::empty();
            let mut cbounds = Bounds::empty();
            for &id in slice.iter() {
                for v in &tris[id as usize] {
                    bounds.grow(v);
                }
                cbounds.grow(&centroids[id as usize]);
            }
            let bounds = bounds.padded();
            if slice.len() <= LEAF_SIZE {
                nodes[node_idx] = Node {
                    bounds,
                    first: start as u32,
                    count: slice.len() as u32,
                };
                continue;
            }
            let extent = cbounds.max - cbounds.min;
            let axis = if extent.x >= extent.y && extent.x >= extent.z {
                0
            } else if extent.y >= extent.z {
                1
            } else {
                2
            };
            let mid = slice.len() / 2;
            slice.select_nth_unstable_by(mid, |&a, &b| {
                centroids[a as usize][axis]
                    .total_cmp(&centroids[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            nodes.push(Node {
                bounds: Bounds::empty(),
                first: 0,
                count: 0,
            });
            nodes.push(Node {
                bounds: Bounds::empty(),
                first: 0,
                count: 0,
            });
            nodes[node_idx] = Node {
                bounds,
                first: left as u32,
                count: 0,
            };
            stack.push((left + 1, start + mid, end));
            stack.push((left, start, start + mid));
        }
        let triangles = order
            .iter()
            .map(|&id| Triangle::new(&tris[id as usize]))
            .collect();
        Self {
            nodes,
            triangles,
            ids: order,
        }
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of levels (a lone leaf has depth 1).
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 1usize)];
        while let Some((n, d)) = stack.pop() {
            deepest = deepest.max(d);
            let node = &self.nodes[n];
            if node.count == 0 {
                stack.push((node.first as usize, d + 1));
                stack.push((node.first as usize + 1, d + 1));
            }
        }
        deepest
    }

    /// Checks the structural invariants: every triangle sits in exactly one
    /// leaf, and child boxes lie inside their parent.
    pub fn validate(&self) -> bool {
        let mut seen = vec![0u32; self.triangles.len()];
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.count > 0 {
                for slot in node.first..node.first + node.count {
                    seen[self.ids[slot as usize] as usize] += 1;
                    let t = &self.triangles[slot as usize];
                    let mut b = Bounds::empty();
                    for v in [t.v0, t.v0 + t.e1, t.v0 + t.e2] {
                        b.grow(&v);
                    }
                    if !node.bounds.contains(&b) {
                        return false;
                    }
                }
            } else {
                for c in [node.first as usize, node.first as usize + 1] {
                    if !node.bounds.contains(&self.nodes[c].bounds) {
                        return false;
                    }
                    stack.push(c);
                }
            }
        }
        seen.iter().all(|&c| c == 1)
    }

    /// Nearest hit along a ray with unit `dir`.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3) -> Option<Hit> {
        let inv_dir = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = f64::INFINITY;
        let mut stack = [0u32; 128];
        let mut top = 0usize;
        if self.nodes[0]
            .bounds
            .entry(origin, &inv_dir, limit)
            .is_none()
        {
            return None;
        }
        stack[0] = 0;
        top += 1;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top] as usize];
            if node.bounds.entry(origin, &inv_dir, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for slot in node.first..node.first + node.count {
                    if let Some(t) = self.triangles[slot as usize].intersect(origin, dir) {
                        let hit = Hit {
                            t,
                            triangle: self.ids[slot as usize],
                        };
                        if hit.closer_than(&best) {
                            limit = t;
                            best = Some(hit);
                        }
                    }
                }
            } else {
                let (l, r) = (node.first, node.first + 1);
                let tl = self.nodes[l as usize].bounds.entry(origin, &inv_dir, limit);
                let tr = self.nodes[r as usize].bounds.entry(origin, &inv_dir, limit);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        // push the farther child first so the nearer one pops next
                        let (near, far) = if a <= b { (l, r) } else { (r, l) };
                        stack[top] = far;
                        stack[top + 1] = near;
                        top += 2;
                    }
                    (Some(_), None) => {
                        stack[top] = l;
                        top += 1;
                    }
                    (None, Some(_)) => {
                        stack[top] = r;
                        top += 1;
                    }
                    (None, None) => {}
                }
            }
        }
        best
    }
}

/// Nearest-hit reference that tests every triangle.
pub fn brute_force_intersect(tris: &[[Vec3; 3]], origin: &Vec3, dir: &Vec3) -> Option<Hit> {
    let mut best = None;
    for (id, t) in tris.iter().enumerate() {
        if let Some(t) = Triangle::new(t).intersect(origin, dir) {
            let hit = Hit {
                t,
                triangle: id as u32,
            };
            if hit.closer_than(&best) {
                best = Some(hit);
            }
        }
    }
    best
}
