//! Procedural tabletop-sized scenes of boxes, spheres and cylinders with an
//! input camera looking at them.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg32;

use crate::error::Result;
use crate::geometry::{axis_angle, euler_zyx, CameraIntrinsics, RigidTransform, Vec3};
use crate::mesh::{Scene, TriangleMesh};
use crate::view_sampling::look_at_pose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneGenConfig {
    pub min_objects: usize,
    pub max_objects: usize,
    /// Range of the largest object dimension, meters.
    pub size_range: (f64, f64),
    /// Objects are centered inside a cube of this half-width around the origin.
    pub region_half_width: f64,
    /// Range of the input camera's distance to the origin, meters.
    pub camera_distance: (f64, f64),
    pub width: usize,
    pub height: usize,
    pub focal: f64,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        Self {
            min_objects: 2,
            max_objects: 6,
            size_range: (0.04, 0.15),
            region_half_width: 0.15,
            camera_distance: (0.6, 0.8),
            width: 256,
            height: 256,
            focal: 220.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub scene: Scene,
    pub intrinsics: CameraIntrinsics,
    /// World-to-camera pose of the input camera.
    pub pose: RigidTransform,
}

/// Scene number `seed`; the same seed always gives the same scene.
pub fn generate_scene(seed: u64, cfg: &SceneGenConfig) -> Result<SyntheticScene> {
    let mut rng = Pcg32::seed_from_u64(seed);
    let count = rng.random_range(cfg.min_objects..=cfg.max_objects);
    let mut scene = Scene::new();
    let mut placed: Vec<(Vec3, f64)> = Vec::new();
    let mut attempts = 0;
    while placed.len() < count && attempts < 1000 {
        attempts += 1;
        let size = rng.random_range(cfg.size_range.0..=cfg.size_range.1);
        let (mesh, bound) = random_primitive(&mut rng, size);
        let h = cfg.region_half_width;
        let center = Vec3::new(
            rng.random_range(-h..=h),
            rng.random_range(-h..=h),
            rng.random_range(-h..=h),
        );
        if placed
            .iter()
            .any(|(c, r)| (c - center).norm() < r + bound + 0.005)
        {
            continue;
        }
        let rotation = euler_zyx(
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(-1.5..1.5),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        scene.push(mesh, RigidTransform::new(rotation, center)?);
        placed.push((center, bound));
    }

    // camera above the horizontal plane, at a random azimuth
    let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
    let elevation: f64 = rng.random_range(0.2..1.0);
    let dist = rng.random_range(cfg.camera_distance.0..=cfg.camera_distance.1);
    let dir = axis_angle(&Vec3::y(), azimuth) * Vec3::new(elevation.cos(), 0.0, 0.0)
        + Vec3::new(0.0, -elevation.sin(), 0.0);
    let eye = dist * dir.normalize();
    let pose = look_at_pose(&eye, &Vec3::zeros(), &Vec3::new(0.0, -1.0, 0.0))?;
    let intrinsics = CameraIntrinsics::centered(cfg.focal, cfg.width, cfg.height)?;
    Ok(SyntheticScene {
        scene,
        intrinsics,
        pose,
    })
}

/// A box, sphere or cylinder with largest dimension `size`, and the radius of
/// a sphere around its origin that contains it.
fn random_primitive<R: Rng>(rng: &mut R, size: f64) -> (TriangleMesh, f64) {
    match rng.random_range(0..3) {
        0 => {
            let half = Vec3::new(
                size / 2.0,
                size / 2.0 * rng.random_range(0.4..1.0),
                size / 2.0 * rng.random_range(0.4..1.0),
            );
            (TriangleMesh::cuboid(half), half.norm())
        }
        1 => (TriangleMesh::uv_sphere(size / 2.0, 16, 32), size / 2.0),
        _ => {
            let radius = size / 2.0 * rng.random_range(0.4..1.0);
            let height = size * rng.random_range(0.5..1.0);
            (
                TriangleMesh::cylinder(radius, height, 32),
                (radius * radius + height * height / 4.0).sqrt(),
            )
        }
    }
}
