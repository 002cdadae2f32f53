//! Writes a procedural scene, its input view and a ground-truth cloud.
//!
//! ```text
//! cargo run --example synthetic_scene -- OUT_DIR [SEED]
//! ```
//!
//! Produces `OUT_DIR/scene/scene.txt`, `OUT_DIR/input/` and `OUT_DIR/gt.ply`,
//! which the `rayfuse` binary can consume directly.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayfuse::bvh::Bvh;
use rayfuse::io;
use rayfuse::metrics::PointCloud;
use rayfuse::predictor::InputView;
use rayfuse::synthetic::{generate_scene, SceneGenConfig};

fn main() -> rayfuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synthetic_scene".into()));
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let s = generate_scene(seed, &SceneGenConfig::default())?;
    let scene_file =
        io::save_scene_dir(&out.join("scene"), &s.scene, Some(&(s.intrinsics, s.pose)))?;
    let input = InputView::render(&Bvh::build(&s.scene)?, s.intrinsics, s.pose)?;
    io::save_input_view(&out.join("input"), &input, false)?;
    let gt = s
        .scene
        .sample_surface(50_000, &mut Pcg32::seed_from_u64(seed))?;
    io::save_cloud(&out.join("gt.ply"), &PointCloud::new(gt))?;

    let fg = input.mask.data().iter().filter(|&&m| m).count();
    println!(
        "{} objects, {} triangles, {fg} foreground pixels",
        s.scene.objects.len(),
        s.scene.triangle_count()
    );
    println!("scene: {}", scene_file.display());
    Ok(())
}
