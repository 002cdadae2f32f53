//! Depth and mask rendering by ray casting, one ray per pixel center.

use rayon::prelude::*;

use crate::bvh::{brute_force_intersect, Bvh, Hit};
use crate::geometry::{BinaryMask, CameraIntrinsics, DepthMap, Raster, RigidTransform, Vec3};

/// Per-pixel world-space ray for a world-to-camera `pose`.
#[derive(Debug, Clone, Copy)]
struct PixelRays {
    origin: Vec3,
    cam_to_world: nalgebra::Matrix3<f64>,
}

impl PixelRays {
    fn new(pose: &RigidTransform) -> Self {
        Self {
            origin: pose.camera_center(),
            cam_to_world: pose.rotation().transpose(),
        }
    }

    /// World direction (unit) and the factor converting ray length to z-depth.
    #[inline]
    fn ray(&self, k: &CameraIntrinsics, i: usize, j: usize) -> (Vec3, f64) {
        let (x, y) = k.ray(i as f64, j as f64);
        let cam = Vec3::new(x, y, 1.0);
        let norm = cam.norm();
        (self.cam_to_world * (cam / norm), 1.0 / norm)
    }
}

/// Renders z-depth (0 where the ray misses) and the hit mask.
pub fn render_depth(
    bvh: &Bvh,
    pose: &RigidTransform,
    k: &CameraIntrinsics,
) -> (DepthMap, BinaryMask) {
    render_with(pose, k, |o, d| bvh.intersect(o, d))
}

/// Reference renderer testing every triangle per pixel.
pub fn render_depth_brute_force(
    tris: &[[Vec3; 3]],
    pose: &RigidTransform,
    k: &CameraIntrinsics,
) -> (DepthMap, BinaryMask) {
    render_with(pose, k, |o, d| brute_force_intersect(tris, o, d))
}

fn render_with<F>(pose: &RigidTransform, k: &CameraIntrinsics, cast: F) -> (DepthMap, BinaryMask)
where
    F: Fn(&Vec3, &Vec3) -> Option<Hit> + Sync,
{
    let rays = PixelRays::new(pose);
    let rows: Vec<Vec<f64>> = (0..k.height)
        .into_par_iter()
        .map(|j| {
            (0..k.width)
                .map(|i| {
                    let (dir, to_z) = rays.ray(k, i, j);
                    cast(&rays.origin, &dir).map_or(0.0, |h| h.t * to_z)
                })
                .collect()
        })
        .collect();
    let depth = Raster::from_vec(k.width, k.height, rows.concat()).expect("row sizes");
    let mask = depth.map(|&d| d > 0.0);
    (depth, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Scene, TriangleMesh};

    fn cube_scene() -> Scene {
        Scene::new().with_object(
            TriangleMesh::cuboid(Vec3::new(0.5, 0.5, 0.5)),
            RigidTransform::from_translation(Vec3::new(0.0, 0.0, 2.0)),
        )
    }

    #[test]
    fn cube_center_depth() {
        let scene = cube_scene();
        let bvh = Bvh::build(&scene).unwrap();
        let k = CameraIntrinsics::centered(100.0, 65, 65).unwrap();
        let (depth, mask) = render_depth(&bvh, &RigidTransform::identity(), &k);
        assert!((depth.get(32, 32) - 1.5).abs() < 1e-12);
        // front face at z=1.5 covers |x|,|y| ≤ 0.5 → within 33 px of center
        for j in 0..65 {
            for i in 0..65 {
                let d = *depth.get(i, j);
                assert_eq!(*mask.get(i, j), d > 0.0);
                if d > 0.0 {
                    assert!((d - 1.5).abs() < 1e-9, "pixel ({i},{j}) depth {d}");
                }
            }
        }
        assert!(*mask.get(0, 0));
    }

    #[test]
    fn misses_are_zero() {
        let bvh = Bvh::build(&cube_scene()).unwrap();
        let k = CameraIntrinsics::centered(100.0, 16, 16).unwrap();
        // camera center at z=10 looking along +z, away from the cube
        let away = RigidTransform::from_translation(Vec3::new(0.0, 0.0, -10.0));
        let (depth, mask) = render_depth(&bvh, &away, &k);
        assert!(depth.data().iter().all(|&d| d == 0.0));
        assert!(mask.data().iter().all(|&m| !m));
    }

    #[test]
    fn bvh_matches_brute_force_rendering() {
        let mut scene = cube_scene();
        scene.push(
            TriangleMesh::uv_sphere(0.3, 8, 16),
            RigidTransform::from_translation(Vec3::new(0.4, 0.2, 1.2)),
        );
        let bvh = Bvh::build(&scene).unwrap();
        let tris = scene.world_triangles();
        let k = CameraIntrinsics::centered(40.0, 48, 40).unwrap();
        let pose = RigidTransform::new(
            crate::geometry::euler_zyx(0.2, -0.1, 0.05),
            Vec3::new(0.1, -0.05, 0.3),
        )
        .unwrap();
        let (a, ma) = render_depth(&bvh, &pose, &k);
        let (b, mb) = render_depth_brute_force(&tris, &pose, &k);
        assert_eq!(ma, mb);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
