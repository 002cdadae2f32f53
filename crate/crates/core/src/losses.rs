//! Confidence-weighted depth loss, mask cross entropy and their gradients.
//!
//! Pure functions over rasters; there is no training loop here. The raw
//! confidence is activated as `C = 1 + exp(raw)`.

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, DepthMap, Raster};

/// Probabilities are clamped to `[EPS, 1 − EPS]` before taking logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Sum,
    /// Depth term averaged over masked pixels, mask term over all pixels.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub alpha: f64,
    pub lambda_mask: f64,
    pub reduction: Reduction,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            lambda_mask: 0.1,
            reduction: Reduction::Sum,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        if !(self.lambda_mask >= 0.0 && self.lambda_mask.is_finite()) {
            return Err(Error::InvalidConfig("lambda_mask must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// Everything one view contributes to the loss.
#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a> {
    pub depth: &'a DepthMap,
    pub gt_depth: &'a DepthMap,
    pub raw_confidence: &'a Raster<f64>,
    pub mask_prob: &'a Raster<f64>,
    pub gt_mask: &'a BinaryMask,
}

impl LossInputs<'_> {
    fn check(&self) -> Result<()> {
        self.depth.ensure_dims(self.gt_depth, "depth vs gt depth")?;
        self.depth
            .ensure_dims(self.raw_confidence, "depth vs confidence")?;
        self.depth.ensure_dims(self.mask_prob, "depth vs mask")?;
        self.depth.ensure_dims(self.gt_mask, "depth vs gt mask")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub depth: f64,
    pub mask: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGradients {
    pub depth: Raster<f64>,
    pub raw_confidence: Raster<f64>,
    pub mask_prob: Raster<f64>,
}

/// `log(1 + exp(raw))` without overflow.
fn log_confidence(raw: f64) -> f64 {
    if raw > 0.0 {
        raw + (-raw).exp().ln_1p()
    } else {
        raw.exp().ln_1p()
    }
}

/// Per-pixel depth term `C·|r| − α·log C`.
pub fn depth_term(residual: f64, raw: f64, alpha: f64) -> f64 {
    let weighted = if residual == 0.0 {
        0.0
    } else {
        (1.0 + raw.exp()) * residual.abs()
    };
    weighted - alpha * log_confidence(raw)
}

/// Minimizer of `C·r − α·log C` over `C ≥ 1` for residual `r > 0`.
pub fn optimal_confidence(residual: f64, alpha: f64) -> f64 {
    (alpha / residual.abs()).max(1.0)
}

pub fn depth_loss(
    d: &DepthMap,
    d_gt: &DepthMap,
    raw: &Raster<f64>,
    m_gt: &BinaryMask,
    alpha: f64,
) -> Result<f64> {
    d.ensure_dims(d_gt, "depth vs gt depth")?;
    d.ensure_dims(raw, "depth vs confidence")?;
    d.ensure_dims(m_gt, "depth vs gt mask")?;
    let mut sum = 0.0;
    for idx in 0..d.len() {
        if m_gt.data()[idx] {
            sum += depth_term(d.data()[idx] - d_gt.data()[idx], raw.data()[idx], alpha);
        }
    }
    Ok(sum)
}

fn clamp_prob(m: f64) -> f64 {
    m.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

pub fn mask_loss(m_pred: &Raster<f64>, m_gt: &BinaryMask) -> Result<f64> {
    m_pred.ensure_dims(m_gt, "mask vs gt mask")?;
    Ok(m_pred
        .data()
        .iter()
        .zip(m_gt.data())
        .map(|(&m, &g)| {
            let m = clamp_prob(m);
            if g {
                -m.ln()
            } else {
                -(1.0 - m).ln()
            }
        })
        .sum())
}

fn scales(inputs: &LossInputs, reduction: Reduction) -> (f64, f64) {
    match reduction {
        Reduction::Sum => (1.0, 1.0),
        Reduction::Mean => {
            let masked = inputs.gt_mask.data().iter().filter(|&&m| m).count();
            let depth_scale = if masked == 0 {
                0.0
            } else {
                1.0 / masked as f64
            };
            (depth_scale, 1.0 / inputs.gt_mask.len().max(1) as f64)
        }
    }
}

/// `L_depth + λ_mask·L_mask`.
pub fn total_loss(inputs: &LossInputs, cfg: &LossConfig) -> Result<LossBreakdown> {
    cfg.validate()?;
    inputs.check()?;
    let (sd, sm) = scales(inputs, cfg.reduction);
    let depth = sd
        * depth_loss(
            inputs.depth,
            inputs.gt_depth,
            inputs.raw_confidence,
            inputs.gt_mask,
            cfg.alpha,
        )?;
    let mask = sm * mask_loss(inputs.mask_prob, inputs.gt_mask)?;
    Ok(LossBreakdown {
        depth,
        mask,
        total: depth + cfg.lambda_mask * mask,
    })
}

/// Analytic partials of [`total_loss`]. The absolute value contributes
/// `sign(d − d_gt)` with 0 at equality; clamped probabilities have zero
/// gradient.
pub fn loss_gradients(inputs: &LossInputs, cfg: &LossConfig) -> Result<LossGradients> {
    cfg.validate()?;
    inputs.check()?;
    let (sd, sm) = scales(inputs, cfg.reduction);
    let (w, h) = inputs.depth.dims();
    let mut gd = Raster::filled(w, h, 0.0);
    let mut graw = Raster::filled(w, h, 0.0);
    for idx in 0..inputs.depth.len() {
        if !inputs.gt_mask.data()[idx] {
            continue;
        }
        let r = inputs.depth.data()[idx] - inputs.gt_depth.data()[idx];
        let e = inputs.raw_confidence.data()[idx].exp();
        let c = 1.0 + e;
        let sign = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        gd.data_mut()[idx] = sd * c * sign;
        graw.data_mut()[idx] = sd * e * (r.abs() - cfg.alpha / c);
    }
    let gm = Raster::from_fn(w, h, |i, j| {
        let m = *inputs.mask_prob.get(i, j);
        if m <= PROB_CLAMP || m >= 1.0 - PROB_CLAMP {
            return 0.0;
        }
        let g = if *inputs.gt_mask.get(i, j) {
            -1.0 / m
        } else {
            1.0 / (1.0 - m)
        };
        sm * cfg.lambda_mask * g
    });
    Ok(LossGradients {
        depth: gd,
        raw_confidence: graw,
        mask_prob: gm,
    })
}
