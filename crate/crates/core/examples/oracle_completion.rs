//! End-to-end completion with the ray-casting oracle in place of a learned
//! predictor, scored against dense surface samples.
//!
//! ```text
//! cargo run --release --example oracle_completion -- [SEED]
//! ```

use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayfuse::metrics::{evaluate, PointCloud};
use rayfuse::pipeline::{complete, PipelineConfig};
use rayfuse::predictor::{InputView, OraclePredictor, OraclePredictorConfig};
use rayfuse::synthetic::{generate_scene, SceneGenConfig};

fn main() -> rayfuse::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let s = generate_scene(seed, &SceneGenConfig::default())?;
    let gt = PointCloud::new(
        s.scene
            .sample_surface(50_000, &mut Pcg32::seed_from_u64(seed))?,
    );

    for (name, cfg) in [
        ("noiseless", OraclePredictorConfig::default()),
        (
            "corrupted",
            OraclePredictorConfig {
                corrupt_fraction: 0.1,
                depth_noise_sigma: 0.02,
                edge_bleed_px: 2,
                background_depth: 1.5,
                seed,
                ..Default::default()
            },
        ),
    ] {
        let oracle = OraclePredictor::new(&s.scene, cfg)?;
        let input = InputView::render(oracle.bvh(), s.intrinsics, s.pose)?;
        let out = complete(&input, &oracle, &PipelineConfig::default())?;
        let visible = evaluate(&PointCloud::new(input_points(&input)?), &gt, 10.0)?;
        let r = evaluate(&out.cloud, &gt, 10.0)?;
        println!("{name} oracle, {} objects:", s.scene.objects.len());
        println!(
            "  input view alone: {:>7} points, completeness {:.2} mm, F1 {:.3}",
            input_points(&input)?.len(),
            visible.completeness_mm,
            visible.f1
        );
        println!(
            "  completed:        {:>7} points, CD {:.2} mm, F1 {:.3}",
            out.cloud.len(),
            r.chamfer_mm,
            r.f1
        );
        let counts: Vec<String> = out.view_counts.iter().map(|c| c.to_string()).collect();
        println!("  points per view:  {}", counts.join(" "));
    }
    Ok(())
}

fn input_points(v: &InputView) -> rayfuse::Result<Vec<rayfuse::geometry::Vec3>> {
    let pm = rayfuse::geometry::unproject_depth(&v.depth, &v.intrinsics)?;
    let world = rayfuse::geometry::transform_point_map(&pm, &v.pose.inverse());
    Ok(world.valid_points().copied().collect())
}
