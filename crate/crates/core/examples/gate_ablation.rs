//! Turns the fusion gates off one at a time with a corrupted oracle and
//! reports the chamfer distance of each variant.
//!
//! ```text
//! cargo run --release --example gate_ablation -- [SCENES]
//! ```

use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayfuse::fusion::{fuse_views, FusionConfig};
use rayfuse::metrics::{evaluate, PointCloud};
use rayfuse::pipeline::predict_views;
use rayfuse::predictor::{InputView, OraclePredictor, OraclePredictorConfig};
use rayfuse::synthetic::{generate_scene, SceneGenConfig};
use rayfuse::view_sampling::{sample_query_views, ViewSamplingConfig};

fn main() -> rayfuse::Result<()> {
    let scenes: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let full = FusionConfig::default();
    let variants = [
        ("full", full),
        (
            "no occlusion",
            FusionConfig {
                enable_occlusion: false,
                ..full
            },
        ),
        (
            "no predicted mask",
            FusionConfig {
                enable_pred_mask: false,
                ..full
            },
        ),
        (
            "no confidence",
            FusionConfig {
                enable_confidence: false,
                ..full
            },
        ),
        (
            "no input query",
            FusionConfig {
                enable_input_query: false,
                ..full
            },
        ),
        (
            "no gates",
            FusionConfig {
                enable_occlusion: false,
                enable_pred_mask: false,
                enable_confidence: false,
                ..full
            },
        ),
    ];
    let gen = SceneGenConfig {
        width: 128,
        height: 128,
        focal: 110.0,
        ..Default::default()
    };
    let mut sums = vec![(0.0, 0.0); variants.len()];
    for seed in 0..scenes {
        let s = generate_scene(seed, &gen)?;
        let oracle = OraclePredictor::new(
            &s.scene,
            OraclePredictorConfig {
                corrupt_fraction: 0.1,
                depth_noise_sigma: 0.02,
                edge_bleed_px: 2,
                background_depth: 1.5,
                seed,
                ..Default::default()
            },
        )?;
        let input = InputView::render(oracle.bvh(), s.intrinsics, s.pose)?;
        let queries = sample_query_views(&input, &ViewSamplingConfig::default())?;
        let predictions = predict_views(&input, &queries, &oracle)?;
        let gt = PointCloud::new(
            s.scene
                .sample_surface(20_000, &mut Pcg32::seed_from_u64(seed))?,
        );
        for (k, (_, cfg)) in variants.iter().enumerate() {
            let cloud = fuse_views(&predictions, &input, cfg)?;
            let r = evaluate(&cloud, &gt, 10.0)?;
            sums[k].0 += r.chamfer_mm;
            sums[k].1 += r.f1;
        }
    }
    println!("{:<18} {:>10} {:>8}", "variant", "CD (mm)", "F1");
    for ((name, _), (cd, f1)) in variants.iter().zip(sums) {
        println!(
            "{name:<18} {:>10.2} {:>8.3}",
            cd / scenes as f64,
            f1 / scenes as f64
        );
    }
    Ok(())
}
