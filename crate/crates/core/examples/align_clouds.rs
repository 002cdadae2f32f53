//! Registers a prediction given in an unknown similarity frame onto the
//! ground truth: box scale matching, rotation grid search, then ICP.
//!
//! ```text
//! cargo run --release --example align_clouds -- [STEPS]
//! ```

use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayfuse::alignment::{align_canonical, AlignmentConfig, ScaleFit};
use rayfuse::geometry::{euler_zyx, RigidTransform, Vec3};
use rayfuse::mesh::{Scene, TriangleMesh};
use rayfuse::metrics::{evaluate, PointCloud};

fn main() -> rayfuse::Result<()> {
    let steps: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20);
    // an L-shaped object has no rotational symmetry
    let scene = Scene::new()
        .with_object(
            TriangleMesh::cuboid(Vec3::new(0.08, 0.02, 0.03)),
            RigidTransform::identity(),
        )
        .with_object(
            TriangleMesh::cuboid(Vec3::new(0.02, 0.05, 0.03)),
            RigidTransform::from_translation(Vec3::new(0.06, 0.07, 0.0)),
        );
    let gt = PointCloud::new(scene.sample_surface(4000, &mut Pcg32::seed_from_u64(0))?);
    let other = PointCloud::new(scene.sample_surface(4000, &mut Pcg32::seed_from_u64(1))?);

    let r = euler_zyx(2.1, -0.7, 0.4);
    let pred = PointCloud::new(
        other
            .points
            .iter()
            .map(|p| 0.8 * (r * p) + Vec3::new(0.3, -0.1, 0.5))
            .collect(),
    );
    println!(
        "before: CD {:.2} mm",
        evaluate(&pred, &gt, 10.0)?.chamfer_mm
    );

    let cfg = AlignmentConfig {
        rotation_steps: steps,
        ..Default::default()
    };
    let res = align_canonical(&pred, &gt, &cfg)?;
    match res.scale {
        ScaleFit::PerAxis { factors, .. } => println!(
            "box scale factors {:.4} {:.4} {:.4} (true 1.25)",
            factors.x, factors.y, factors.z
        ),
        ScaleFit::Uniform(s) => println!("uniform scale {s:.4}"),
    }
    let [y, p, q] = res.grid.angles;
    println!(
        "grid ({steps} steps): yaw {:.1}°, pitch {:.1}°, roll {:.1}°, subsampled CD {:.2} mm",
        y.to_degrees(),
        p.to_degrees(),
        q.to_degrees(),
        res.grid.chamfer * 1000.0
    );
    println!(
        "ICP: {} iterations, converged {}",
        res.icp.iterations, res.icp.converged
    );
    println!(
        "after:  CD {:.3} mm, F1 {:.3}",
        res.report.chamfer_mm, res.report.f1
    );
    Ok(())
}
