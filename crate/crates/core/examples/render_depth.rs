//! Ray casts a depth map and mask of a small scene, checks the BVH against
//! brute force on the same image and prints a coarse ASCII preview.
//!
//! ```text
//! cargo run --release --example render_depth
//! ```

use std::time::Instant;

use rayfuse::bvh::Bvh;
use rayfuse::geometry::{CameraIntrinsics, RigidTransform, Vec3};
use rayfuse::mesh::{Scene, TriangleMesh};
use rayfuse::render::{render_depth, render_depth_brute_force};
use rayfuse::view_sampling::look_at_pose;

fn main() -> rayfuse::Result<()> {
    let scene = Scene::new()
        .with_object(
            TriangleMesh::cuboid(Vec3::new(0.05, 0.05, 0.05)),
            RigidTransform::from_translation(Vec3::new(-0.06, 0.0, 0.0)),
        )
        .with_object(
            TriangleMesh::uv_sphere(0.05, 24, 48),
            RigidTransform::from_translation(Vec3::new(0.07, 0.0, 0.02)),
        )
        .with_object(
            TriangleMesh::cylinder(0.03, 0.12, 32),
            RigidTransform::from_translation(Vec3::new(0.0, 0.0, -0.08)),
        );
    let k = CameraIntrinsics::centered(120.0, 160, 120)?;
    let pose = look_at_pose(&Vec3::new(0.0, -0.3, 0.4), &Vec3::zeros(), &Vec3::z())?;

    let t = Instant::now();
    let bvh = Bvh::build(&scene)?;
    let (depth, mask) = render_depth(&bvh, &pose, &k);
    println!(
        "{} triangles, BVH depth {}, rendered in {:.1} ms",
        bvh.triangle_count(),
        bvh.depth(),
        t.elapsed().as_secs_f64() * 1e3
    );
    let (reference, _) = render_depth_brute_force(&scene.world_triangles(), &pose, &k);
    println!("identical to brute force: {}", reference == depth);

    let hits: Vec<f64> = depth.data().iter().copied().filter(|&d| d > 0.0).collect();
    let near = hits.iter().copied().fold(f64::INFINITY, f64::min);
    let far = hits.iter().copied().fold(0.0, f64::max);
    println!(
        "{} foreground pixels, depth {near:.3}..{far:.3} m",
        hits.len()
    );
    let shades = b" .:-=+*#%@";
    for j in (0..k.height).step_by(6) {
        let line: String = (0..k.width)
            .step_by(3)
            .map(|i| {
                if !mask.get(i, j) {
                    return ' ';
                }
                let t = (far - depth.get(i, j)) / (far - near).max(1e-9);
                shades[1 + (t * 8.0).round() as usize] as char
            })
            .collect();
        println!("{line}");
    }
    Ok(())
}
