//! Gated merging of per-view predictions into one world-frame cloud.
//!
//! A predicted pixel survives when it is occluded in the input view, predicted
//! as foreground and confident enough. Each gate can be switched off for
//! ablations. The prediction for the input camera itself skips the occlusion
//! gate: its depth coincides with the observed depth, so a strict "behind the
//! surface" test would reject all of it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{project_point, BinaryMask, Raster};
use crate::metrics::PointCloud;
use crate::predictor::{activate_confidence, InputView, ViewPrediction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Threshold τ on the activated confidence.
    pub confidence_threshold: f64,
    pub mask_threshold: f64,
    /// Margin in meters a point must lie behind the observed surface.
    pub occlusion_epsilon: f64,
    pub enable_occlusion: bool,
    pub enable_pred_mask: bool,
    pub enable_confidence: bool,
    pub enable_input_query: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: 5.0,
            mask_threshold: 0.5,
            occlusion_epsilon: 0.0,
            enable_occlusion: true,
            enable_pred_mask: true,
            enable_confidence: true,
            enable_input_query: true,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        // τ = +∞ is allowed and rejects everything
        if self.confidence_threshold.is_nan() {
            return Err(Error::InvalidConfig("confidence threshold is NaN".into()));
        }
        if !(self.mask_threshold > 0.0 && self.mask_threshold < 1.0) {
            return Err(Error::InvalidConfig(
                "mask threshold must lie in (0, 1)".into(),
            ));
        }
        if !(self.occlusion_epsilon >= 0.0 && self.occlusion_epsilon.is_finite()) {
            return Err(Error::InvalidConfig("occlusion epsilon must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// 1 where the predicted point lies strictly more than `eps` behind the
/// observed foreground surface of the input view.
pub fn occlusion_mask(pred: &ViewPrediction, input: &InputView, eps: f64) -> BinaryMask {
    let k = &pred.intrinsics;
    let to_world = pred.pose.inverse();
    let (w, h) = input.depth.dims();
    Raster::from_fn(k.width, k.height, |i, j| {
        let d = *pred.depth.get(i, j);
        if d <= 0.0 {
            return false;
        }
        let q = to_world.apply(&k.unproject(i as f64, j as f64, d));
        let Some(p) = project_point(&q, &input.intrinsics, &input.pose) else {
            return false;
        };
        if !p.is_in_front() {
            return false;
        }
        match p.nearest_pixel(w, h) {
            Some((u, v)) => {
                let observed = *input.depth.get(u, v);
                *input.mask.get(u, v) && observed > 0.0 && p.z > observed + eps
            }
            None => false,
        }
    })
}

/// Product of the enabled gates. `m_occ` is ignored when the occlusion gate
/// is disabled.
pub fn final_mask(m_occ: &BinaryMask, pred: &ViewPrediction, cfg: &FusionConfig) -> BinaryMask {
    Raster::from_fn(pred.depth.width(), pred.depth.height(), |i, j| {
        (!cfg.enable_occlusion || *m_occ.get(i, j))
            && (!cfg.enable_pred_mask || *pred.mask_prob.get(i, j) > cfg.mask_threshold)
            && (!cfg.enable_confidence
                || activate_confidence(*pred.raw_confidence.get(i, j)) > cfg.confidence_threshold)
    })
}

/// Surviving world-frame points of one view in row-major order, or `None`
/// when the view is excluded altogether.
pub fn fuse_view(
    pred: &ViewPrediction,
    input: &InputView,
    cfg: &FusionConfig,
) -> Result<Option<PointCloud>> {
    pred.validate()?;
    if pred.is_input_query && !cfg.enable_input_query {
        return Ok(None);
    }
    let k = &pred.intrinsics;
    let occlusion_applies = cfg.enable_occlusion && !pred.is_input_query;
    let m_occ = if occlusion_applies {
        occlusion_mask(pred, input, cfg.occlusion_epsilon)
    } else {
        Raster::filled(k.width, k.height, true)
    };
    let keep = final_mask(&m_occ, pred, cfg);
    let to_world = pred.pose.inverse();
    let mut points = Vec::new();
    let mut confidence = Vec::new();
    for j in 0..k.height {
        for i in 0..k.width {
            let d = *pred.depth.get(i, j);
            if *keep.get(i, j) && d > 0.0 {
                points.push(to_world.apply(&k.unproject(i as f64, j as f64, d)));
                confidence.push(activate_confidence(*pred.raw_confidence.get(i, j)));
            }
        }
    }
    Ok(Some(PointCloud::with_confidence(points, confidence)))
}

/// Union of [`fuse_view`] over all predictions, in prediction order.
pub fn fuse_views(
    predictions: &[ViewPrediction],
    input: &InputView,
    cfg: &FusionConfig,
) -> Result<PointCloud> {
    cfg.validate()?;
    if predictions.is_empty() {
        return Err(Error::InvalidConfig(
            "fusion needs at least one prediction".into(),
        ));
    }
    let per_view = predictions
        .par_iter()
        .map(|p| fuse_view(p, input, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut cloud = PointCloud::with_confidence(Vec::new(), Vec::new());
    for part in per_view.into_iter().flatten() {
        cloud.extend(part);
    }
    Ok(cloud)
}
