//! Flips input-mask pixels at increasing rates, false positives and false
//! negatives separately, and compares the completed clouds.
//!
//! ```text
//! cargo run --release --example mask_noise -- [SCENES]
//! ```

use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayfuse::augment::{corrupt_mask, AugmentConfig, AugmentKind};
use rayfuse::metrics::{evaluate, PointCloud};
use rayfuse::pipeline::{complete, PipelineConfig};
use rayfuse::predictor::{InputView, OraclePredictor, OraclePredictorConfig};
use rayfuse::synthetic::{generate_scene, SceneGenConfig};

fn main() -> rayfuse::Result<()> {
    let scenes: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let rates = [0.0, 0.1, 0.2, 0.3];
    let gen = SceneGenConfig {
        width: 128,
        height: 128,
        focal: 110.0,
        ..Default::default()
    };
    let mut fp = vec![0.0; rates.len()];
    let mut fneg = vec![0.0; rates.len()];
    for seed in 0..scenes {
        let s = generate_scene(seed, &gen)?;
        let oracle = OraclePredictor::new(
            &s.scene,
            OraclePredictorConfig {
                seed,
                ..Default::default()
            },
        )?;
        let input = InputView::render(oracle.bvh(), s.intrinsics, s.pose)?;
        let gt = PointCloud::new(
            s.scene
                .sample_surface(20_000, &mut Pcg32::seed_from_u64(seed))?,
        );
        let stream = AugmentConfig {
            seed,
            ..AugmentConfig::identity()
        }
        .stream(0, AugmentKind::Mask);
        for (k, &rate) in rates.iter().enumerate() {
            for (fp_rate, fn_rate, acc) in [(rate, 0.0, &mut fp), (0.0, rate, &mut fneg)] {
                let noisy = input.with_mask(corrupt_mask(
                    &input.mask,
                    fp_rate,
                    fn_rate,
                    &mut stream.clone(),
                ))?;
                let out = complete(&noisy, &oracle, &PipelineConfig::default())?;
                acc[k] += evaluate(&out.cloud, &gt, 10.0)?.chamfer_mm;
            }
        }
    }
    println!(
        "{:>6} {:>16} {:>16}",
        "rate", "false pos. CD", "false neg. CD"
    );
    for (k, rate) in rates.iter().enumerate() {
        println!(
            "{rate:>6.2} {:>13.2} mm {:>13.2} mm",
            fp[k] / scenes as f64,
            fneg[k] / scenes as f64
        );
    }
    Ok(())
}
