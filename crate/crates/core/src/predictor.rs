//! The prediction seam: anything mapping an input view and a query camera to
//! per-pixel depth, foreground probability and raw confidence.
//!
//! Two implementations ship with the crate. [`OraclePredictor`] ray casts the
//! ground-truth scene and can inject seeded corruption; [`FilePredictor`]
//! reads predictions computed elsewhere from a prediction directory.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg32;

use crate::bvh::Bvh;
use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, CameraIntrinsics, DepthMap, Raster, RigidTransform};
use crate::io::{self, RgbImage};
use crate::mesh::Scene;
use crate::render::render_depth;
use crate::view_sampling::QueryView;

/// Masked RGB-D observation.
#[derive(Debug, Clone, PartialEq)]
pub struct InputView {
    pub rgb: RgbImage,
    pub depth: DepthMap,
    pub mask: BinaryMask,
    pub intrinsics: CameraIntrinsics,
    /// World-to-camera.
    pub pose: RigidTransform,
}

impl InputView {
    /// A missing color image is replaced by black.
    pub fn new(
        rgb: Option<RgbImage>,
        depth: DepthMap,
        mask: BinaryMask,
        intrinsics: CameraIntrinsics,
        pose: RigidTransform,
    ) -> Result<Self> {
        intrinsics.validate()?;
        let rgb = rgb.unwrap_or_else(|| Raster::filled(depth.width(), depth.height(), [0; 3]));
        if depth.dims() != (intrinsics.width, intrinsics.height) {
            return Err(Error::DimensionMismatch("input depth vs intrinsics".into()));
        }
        depth.ensure_dims(&mask, "input depth vs mask")?;
        depth.ensure_dims(&rgb, "input depth vs rgb")?;
        if depth.data().iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidConfig(
                "input depth must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            rgb,
            depth,
            mask,
            intrinsics,
            pose,
        })
    }

    /// Renders depth and mask of `bvh` from the given camera.
    pub fn render(bvh: &Bvh, intrinsics: CameraIntrinsics, pose: RigidTransform) -> Result<Self> {
        let (depth, mask) = render_depth(bvh, &pose, &intrinsics);
        Self::new(None, depth, mask, intrinsics, pose)
    }

    pub fn with_mask(&self, mask: BinaryMask) -> Result<Self> {
        Self::new(
            Some(self.rgb.clone()),
            self.depth.clone(),
            mask,
            self.intrinsics,
            self.pose,
        )
    }
}

/// Predicted rasters for one query camera.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewPrediction {
    pub depth: DepthMap,
    /// Foreground probability in [0, 1].
    pub mask_prob: Raster<f64>,
    /// Pre-activation confidence; see [`activate_confidence`].
    pub raw_confidence: Raster<f64>,
    /// World-to-camera.
    pub pose: RigidTransform,
    pub intrinsics: CameraIntrinsics,
    pub is_input_query: bool,
}

impl ViewPrediction {
    pub fn validate(&self) -> Result<()> {
        if self.depth.dims() != (self.intrinsics.width, self.intrinsics.height) {
            return Err(Error::DimensionMismatch(
                "prediction depth vs intrinsics".into(),
            ));
        }
        self.depth
            .ensure_dims(&self.mask_prob, "prediction depth vs mask")?;
        self.depth
            .ensure_dims(&self.raw_confidence, "prediction depth vs confidence")?;
        if self
            .mask_prob
            .data()
            .iter()
            .any(|m| !(0.0..=1.0).contains(m))
        {
            return Err(Error::InvalidConfig(
                "mask probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// `C = 1 + exp(raw)`, always > 1.
#[inline]
pub fn activate_confidence(raw: f64) -> f64 {
    1.0 + raw.exp()
}

pub trait Predictor: Sync {
    fn predict(&self, input: &InputView, query: &QueryView) -> Result<ViewPrediction>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePredictorConfig {
    /// Standard deviation of the depth error on corrupted pixels, meters.
    pub depth_noise_sigma: f64,
    /// Probability that a foreground pixel is corrupted.
    pub corrupt_fraction: f64,
    pub high_confidence_raw: f64,
    pub low_confidence_raw: f64,
    pub seed: u64,
    /// Background pixels within this many pixels of the foreground are
    /// predicted as foreground with the depth of the nearest foreground pixel.
    pub edge_bleed_px: usize,
    /// Depth predicted on the remaining background pixels (with foreground
    /// probability 0); `0` leaves them invalid.
    pub background_depth: f64,
}

impl Default for OraclePredictorConfig {
    fn default() -> Self {
        Self {
            depth_noise_sigma: 0.0,
            corrupt_fraction: 0.0,
            high_confidence_raw: 3.0,
            low_confidence_raw: 0.0,
            seed: 0,
            edge_bleed_px: 0,
            background_depth: 0.0,
        }
    }
}

impl OraclePredictorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth_noise_sigma >= 0.0 && self.depth_noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("depth_noise_sigma must be ≥ 0".into()));
        }
        if !(0.0..=1.0).contains(&self.corrupt_fraction) {
            return Err(Error::InvalidConfig(
                "corrupt_fraction must lie in [0, 1]".into(),
            ));
        }
        if !self.high_confidence_raw.is_finite() || !self.low_confidence_raw.is_finite() {
            return Err(Error::InvalidConfig(
                "confidence values must be finite".into(),
            ));
        }
        if !(self.background_depth >= 0.0 && self.background_depth.is_finite()) {
            return Err(Error::InvalidConfig("background_depth must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// Ground-truth renderer standing in for a learned predictor.
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    bvh: Bvh,
    cfg: OraclePredictorConfig,
}

impl OraclePredictor {
    pub fn new(scene: &Scene, cfg: OraclePredictorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            bvh: Bvh::build(scene)?,
            cfg,
        })
    }

    pub fn from_bvh(bvh: Bvh, cfg: OraclePredictorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { bvh, cfg })
    }

    pub fn config(&self) -> &OraclePredictorConfig {
        &self.cfg
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn predict_view(
        &self,
        pose: &RigidTransform,
        k: &CameraIntrinsics,
        stream: u64,
    ) -> ViewPrediction {
        let cfg = &self.cfg;
        let (clean, mask) = render_depth(&self.bvh, pose, k);
        let mut depth = clean.clone();
        let mut raw = Raster::filled(k.width, k.height, cfg.high_confidence_raw);
        let mut mask_prob = mask.map(|&m| if m { 1.0 } else { 0.0 });

        let mut rng = Pcg32::new(cfg.seed, stream);
        let noise = Normal::new(0.0, cfg.depth_noise_sigma).expect("sigma validated");
        for idx in 0..depth.len() {
            if !mask.data()[idx] {
                continue;
            }
            if rng.random::<f64>() < cfg.corrupt_fraction {
                let d = &mut depth.data_mut()[idx];
                if cfg.depth_noise_sigma > 0.0 {
                    *d = (*d + noise.sample(&mut rng)).max(1e-6);
                }
                raw.data_mut()[idx] = cfg.low_confidence_raw;
            }
        }

        if cfg.edge_bleed_px > 0 || cfg.background_depth > 0.0 {
            let r = cfg.edge_bleed_px as isize;
            for j in 0..k.height {
                for i in 0..k.width {
                    if *mask.get(i, j) {
                        continue;
                    }
                    if let Some((ni, nj)) = nearest_foreground(&mask, i, j, r) {
                        depth.set(i, j, *clean.get(ni, nj));
                        mask_prob.set(i, j, 1.0);
                    } else if cfg.background_depth > 0.0 {
                        depth.set(i, j, cfg.background_depth);
                    }
                }
            }
        }

        ViewPrediction {
            depth,
            mask_prob,
            raw_confidence: raw,
            pose: *pose,
            intrinsics: *k,
            is_input_query: false,
        }
    }
}

/// Closest foreground pixel within a `(2r+1)²` window; ties go to the first
/// in row-major order.
fn nearest_foreground(mask: &BinaryMask, i: usize, j: usize, r: isize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), isize)> = None;
    for dj in -r..=r {
        for di in -r..=r {
            let (x, y) = (i as isize + di, j as isize + dj);
            if x < 0 || y < 0 || x >= mask.width() as isize || y >= mask.height() as isize {
                continue;
            }
            if !*mask.get(x as usize, y as usize) {
                continue;
            }
            let d2 = di * di + dj * dj;
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some(((x as usize, y as usize), d2));
            }
        }
    }
    best.map(|(p, _)| p)
}

impl Predictor for OraclePredictor {
    fn predict(&self, _input: &InputView, query: &QueryView) -> Result<ViewPrediction> {
        let mut p = self.predict_view(&query.pose, &query.intrinsics, query.index as u64);
        p.is_input_query = query.is_input;
        Ok(p)
    }
}

/// Reads `view_{k:04}.{depth,conf,mask.pgm,cam}` from a directory.
#[derive(Debug, Clone)]
pub struct FilePredictor {
    dir: PathBuf,
}

pub fn prediction_paths(dir: &Path, index: usize) -> [PathBuf; 4] {
    let stem = format!("view_{index:04}");
    [
        dir.join(format!("{stem}.depth")),
        dir.join(format!("{stem}.conf")),
        dir.join(format!("{stem}.mask.pgm")),
        dir.join(format!("{stem}.cam")),
    ]
}

impl FilePredictor {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn load(&self, index: usize, is_input_query: bool) -> Result<ViewPrediction> {
        load_prediction(&self.dir, index, is_input_query)
    }
}

impl Predictor for FilePredictor {
    fn predict(&self, _input: &InputView, query: &QueryView) -> Result<ViewPrediction> {
        self.load(query.index, query.is_input)
    }
}

pub fn load_prediction(dir: &Path, index: usize, is_input_query: bool) -> Result<ViewPrediction> {
    let [depth_p, conf_p, mask_p, cam_p] = prediction_paths(dir, index);
    let depth = io::load_raster(&depth_p)?;
    let raw_confidence = io::load_raster(&conf_p)?;
    let mask = io::load_mask(&mask_p)?;
    let (intrinsics, pose) = io::load_camera(&cam_p)?;
    let p = ViewPrediction {
        depth,
        mask_prob: mask.map(|&m| if m { 1.0 } else { 0.0 }),
        raw_confidence,
        pose,
        intrinsics,
        is_input_query,
    };
    p.validate()?;
    Ok(p)
}

/// Writes the four files of view `index`; the mask is thresholded at 0.5.
pub fn save_prediction(dir: &Path, index: usize, p: &ViewPrediction) -> Result<()> {
    let [depth_p, conf_p, mask_p, cam_p] = prediction_paths(dir, index);
    io::save_raster(&depth_p, &p.depth)?;
    io::save_raster(&conf_p, &p.raw_confidence)?;
    io::save_mask(&mask_p, &p.mask_prob.map(|&m| m > 0.5))?;
    io::save_camera(&cam_p, &p.intrinsics, &p.pose)
}
