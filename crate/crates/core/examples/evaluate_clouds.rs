//! Chamfer distance and F1 between two clouds, either from PLY files or,
//! with no arguments, between a sphere and a slightly larger sphere.
//!
//! ```text
//! cargo run --release --example evaluate_clouds -- [PRED.ply GT.ply [ETA_MM]]
//! ```

use std::path::Path;

use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayfuse::geometry::RigidTransform;
use rayfuse::io::load_cloud;
use rayfuse::mesh::{Scene, TriangleMesh};
use rayfuse::metrics::{evaluate, PointCloud};

fn main() -> rayfuse::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (pred, gt, eta) = if args.len() >= 2 {
        let eta = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10.0);
        (
            load_cloud(Path::new(&args[0]))?,
            load_cloud(Path::new(&args[1]))?,
            eta,
        )
    } else {
        let sphere = |r: f64, seed: u64| -> rayfuse::Result<PointCloud> {
            let scene = Scene::new().with_object(
                TriangleMesh::uv_sphere(r, 32, 64),
                RigidTransform::identity(),
            );
            Ok(PointCloud::new(
                scene.sample_surface(20_000, &mut Pcg32::seed_from_u64(seed))?,
            ))
        };
        // 4 mm shell offset: accuracy and completeness near 4 mm
        (sphere(0.104, 1)?, sphere(0.1, 2)?, 10.0)
    };
    for eta in [eta / 4.0, eta / 2.0, eta] {
        let r = evaluate(&pred, &gt, eta)?;
        println!(
            "η {eta:>5.2} mm: accuracy {:.3} mm, completeness {:.3} mm, CD {:.3} mm, precision {:.3}, recall {:.3}, F1 {:.3}",
            r.accuracy_mm, r.completeness_mm, r.chamfer_mm, r.precision, r.recall, r.f1
        );
    }
    Ok(())
}
