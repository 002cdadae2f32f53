//! Seeded sensor-style corruption of an input view: depth noise and holes,
//! color jitter and mask flips. Same seed and image index, same output.
//!
//! ```text
//! cargo run --release --example augment_views
//! ```

use rayfuse::augment::{augment_view, AugmentConfig};
use rayfuse::bvh::Bvh;
use rayfuse::predictor::InputView;
use rayfuse::synthetic::{generate_scene, SceneGenConfig};

fn main() -> rayfuse::Result<()> {
    let s = generate_scene(2, &SceneGenConfig::default())?;
    let view = InputView::render(&Bvh::build(&s.scene)?, s.intrinsics, s.pose)?;
    let cfg = AugmentConfig {
        mask_fp_rate: 0.01,
        mask_fn_rate: 0.05,
        seed: 7,
        ..Default::default()
    };
    println!(
        "config as TOML:\n{}",
        toml::to_string(&cfg).expect("serializable")
    );

    let valid = |v: &InputView| v.depth.data().iter().filter(|&&d| d > 0.0).count();
    let fg = |v: &InputView| v.mask.data().iter().filter(|&&m| m).count();
    println!(
        "original: {} valid depths, {} mask pixels",
        valid(&view),
        fg(&view)
    );
    for image in 0..3 {
        let a = augment_view(&view, &cfg, image)?;
        let changed = a
            .depth
            .data()
            .iter()
            .zip(view.depth.data())
            .filter(|(x, y)| x != y)
            .count();
        println!(
            "image {image}: {} valid depths, {changed} depths changed, {} mask pixels",
            valid(&a),
            fg(&a)
        );
        let again = augment_view(&view, &cfg, image)?;
        assert!(again.depth == a.depth && again.mask == a.mask && again.rgb == a.rgb);
    }
    Ok(())
}
