//! Triangle meshes, scenes, procedural primitives and surface sampling.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some(t) = triangles
            .iter()
            .find(|t| t.iter().any(|&i| i as usize >= n))
        {
            return Err(Error::InvalidConfig(format!(
                "triangle {t:?} references a vertex outside 0..{n}"
            )));
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn triangle(&self, idx: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[idx];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| triangle_area(&self.triangle(i)))
            .sum()
    }

    /// Axis-aligned box centered at the origin.
    pub fn cuboid(half_extents: Vec3) -> Self {
        let h = half_extents;
        let vertices = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -h.x } else { h.x },
                    if i & 2 == 0 { -h.y } else { h.y },
                    if i & 4 == 0 { -h.z } else { h.z },
                )
            })
            .collect();
        let triangles = vec![
            [0, 2, 1],
            [1, 2, 3], // -z
            [4, 5, 6],
            [5, 7, 6], // +z
            [0, 1, 4],
            [1, 5, 4], // -y
            [2, 6, 3],
            [3, 6, 7], // +y
            [0, 4, 2],
            [2, 4, 6], // -x
            [1, 3, 5],
            [3, 7, 5], // +x
        ];
        Self {
            vertices,
            triangles,
        }
    }

    /// Latitude/longitude sphere centered at the origin.
    pub fn uv_sphere(radius: f64, stacks: usize, slices: usize) -> Self {
        let stacks = stacks.max(2);
        let slices = slices.max(3);
        let mut vertices = vec![Vec3::new(0.0, 0.0, radius)];
        for s in 1..stacks {
            let phi = PI * s as f64 / stacks as f64;
            for k in 0..slices {
                let theta = 2.0 * PI * k as f64 / slices as f64;
                vertices.push(
                    radius * Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()),
                );
            }
        }
        vertices.push(Vec3::new(0.0, 0.0, -radius));
        let bottom = (vertices.len() - 1) as u32;
        let ring = |s: usize, k: usize| (1 + (s - 1) * slices + k % slices) as u32;
        let mut triangles = Vec::new();
        for k in 0..slices {
            triangles.push([0, ring(1, k), ring(1, k + 1)]);
        }
        for s in 1..stacks - 1 {
            for k in 0..slices {
                let (a, b, c, d) = (
                    ring(s, k),
                    ring(s, k + 1),
                    ring(s + 1, k),
                    ring(s + 1, k + 1),
                );
                triangles.push([a, c, b]);
                triangles.push([b, c, d]);
            }
        }
        for k in 0..slices {
            triangles.push([bottom, ring(stacks - 1, k + 1), ring(stacks - 1, k)]);
        }
        Self {
            vertices,
            triangles,
        }
    }

    /// Closed cylinder along z, centered at the origin.
    pub fn cylinder(radius: f64, height: f64, segments: usize) -> Self {
        let segments = segments.max(3);
        let hz = height / 2.0;
        let mut vertices = vec![Vec3::new(0.0, 0.0, -hz), Vec3::new(0.0, 0.0, hz)];
        for k in 0..segments {
            let theta = 2.0 * PI * k as f64 / segments as f64;
            let (s, c) = theta.sin_cos();
            vertices.push(Vec3::new(radius * c, radius * s, -hz));
            vertices.push(Vec3::new(radius * c, radius * s, hz));
        }
        let lo = |k: usize| (2 + 2 * (k % segments)) as u32;
        let hi = |k: usize| (3 + 2 * (k % segments)) as u32;
        let mut triangles = Vec::new();
        for k in 0..segments {
            triangles.push([0, lo(k + 1), lo(k)]);
            triangles.push([1, hi(k), hi(k + 1)]);
            triangles.push([lo(k), lo(k + 1), hi(k)]);
            triangles.push([hi(k), lo(k + 1), hi(k + 1)]);
        }
        Self {
            vertices,
            triangles,
        }
    }

    /// Appends `other`, re-indexing its triangles.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }
}

pub fn triangle_area(t: &[Vec3; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm()
}

/// A mesh placed in the world frame by `placement` (local → world).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub mesh: TriangleMesh,
    pub placement: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mesh: TriangleMesh, placement: RigidTransform) {
        self.objects.push(SceneObject { mesh, placement });
    }

    pub fn with_object(mut self, mesh: TriangleMesh, placement: RigidTransform) -> Self {
        self.push(mesh, placement);
        self
    }

    pub fn triangle_count(&self) -> usize {
        self.objects.iter().map(|o| o.mesh.triangles.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.triangle_count() == 0
    }

    /// World-space triangles in object order; the position in this list is
    /// the triangle id reported by ray queries.
    pub fn world_triangles(&self) -> Vec<[Vec3; 3]> {
        let mut out = Vec::with_capacity(self.triangle_count());
        for obj in &self.objects {
            let world: Vec<Vec3> = obj
                .mesh
                .vertices
                .iter()
                .map(|v| obj.placement.apply(v))
                .collect();
            out.extend(
                obj.mesh
                    .triangles
                    .iter()
                    .map(|t| t.map(|i| world[i as usize])),
            );
        }
        out
    }

    pub fn surface_area(&self) -> f64 {
        self.world_triangles().iter().map(triangle_area).sum()
    }

    /// `count` points distributed uniformly by area over all surfaces.
    pub fn sample_surface<R: Rng>(&self, count: usize, rng: &mut R) -> Result<Vec<Vec3>> {
        sample_triangles(&self.world_triangles(), count, rng)
    }
}

pub fn sample_triangles<R: Rng>(
    tris: &[[Vec3; 3]],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec3>> {
    let mut cumulative = Vec::with_capacity(tris.len());
    let mut total = 0.0;
    for t in tris {
        total += triangle_area(t);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::EmptyScene);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let target = rng.random::<f64>() * total;
        let idx = cumulative
            .partition_point(|&c| c <= target)
            .min(tris.len() - 1);
        let t = &tris[idx];
        let r1 = rng.random::<f64>().sqrt();
        let r2 = rng.random::<f64>();
        out.push(t[0] * (1.0 - r1) + t[1] * (r1 * (1.0 - r2)) + t[2] * (r1 * r2));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg32;

    #[test]
    fn primitive_areas() {
        let cube = TriangleMesh::cuboid(Vec3::new(0.5, 0.5, 0.5));
        assert!((cube.surface_area() - 6.0).abs() < 1e-12);
        let cyl = TriangleMesh::cylinder(1.0, 2.0, 256);
        let exact = 2.0 * PI + 2.0 * PI * 2.0;
        assert!((cyl.surface_area() - exact).abs() / exact < 1e-3);
        let sphere = TriangleMesh::uv_sphere(1.0, 64, 128);
        assert!((sphere.surface_area() - 4.0 * PI).abs() / (4.0 * PI) < 2e-3);
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(TriangleMesh::new(vec![Vec3::zeros(); 2], vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn surface_samples_lie_on_cube_faces() {
        let scene = Scene::new().with_object(
            TriangleMesh::cuboid(Vec3::new(0.5, 0.5, 0.5)),
            RigidTransform::from_translation(Vec3::new(0.0, 0.0, 2.0)),
        );
        let mut rng = Pcg32::seed_from_u64(7);
        let pts = scene.sample_surface(2000, &mut rng).unwrap();
        let mut per_face = [0usize; 6];
        for p in &pts {
            let q = p - Vec3::new(0.0, 0.0, 2.0);
            let m = q.abs().max();
            assert!((m - 0.5).abs() < 1e-12);
            let axis = (0..3).find(|&a| (q[a].abs() - 0.5).abs() < 1e-12).unwrap();
            per_face[2 * axis + usize::from(q[axis] > 0.0)] += 1;
        }
        // each face holds 1/6 of the area
        for c in per_face {
            assert!((c as f64 - 2000.0 / 6.0).abs() < 60.0, "{per_face:?}");
        }
    }
}
