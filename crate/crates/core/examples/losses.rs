//! The confidence-weighted depth loss and mask cross entropy on a toy
//! prediction, with a few plain gradient steps on the raw confidence.
//!
//! ```text
//! cargo run --release --example losses
//! ```

use rayfuse::geometry::Raster;
use rayfuse::losses::{loss_gradients, optimal_confidence, total_loss, LossConfig, LossInputs};
use rayfuse::predictor::activate_confidence;

fn main() -> rayfuse::Result<()> {
    let (w, h) = (4, 1);
    let gt_depth = Raster::filled(w, h, 1.0);
    // residuals 0.01, 0.05, 0.1, 0.4
    let depth = Raster::from_vec(w, h, vec![1.01, 1.05, 0.9, 1.4])?;
    let gt_mask = Raster::filled(w, h, true);
    let mask_prob = Raster::from_vec(w, h, vec![0.9, 0.7, 0.6, 0.2])?;
    let mut raw = Raster::filled(w, h, 0.0);
    let cfg = LossConfig::default();

    for step in 0..=400 {
        let inputs = LossInputs {
            depth: &depth,
            gt_depth: &gt_depth,
            raw_confidence: &raw,
            mask_prob: &mask_prob,
            gt_mask: &gt_mask,
        };
        if step % 100 == 0 {
            let l = total_loss(&inputs, &cfg)?;
            let c: Vec<String> = raw
                .data()
                .iter()
                .map(|&r| format!("{:.3}", activate_confidence(r)))
                .collect();
            println!(
                "step {step:>3}: depth {:.4}, mask {:.4}, total {:.4}, C = [{}]",
                l.depth,
                l.mask,
                l.total,
                c.join(", ")
            );
        }
        let g = loss_gradients(&inputs, &cfg)?;
        for (r, d) in raw.data_mut().iter_mut().zip(g.raw_confidence.data()) {
            *r -= 0.5 * d;
        }
    }
    let targets: Vec<String> = [0.01, 0.05, 0.1, 0.4]
        .iter()
        .map(|&r| format!("{:.3}", optimal_confidence(r, cfg.alpha)))
        .collect();
    println!(
        "closed-form optimum max(α/|r|, 1) = [{}]",
        targets.join(", ")
    );
    Ok(())
}
