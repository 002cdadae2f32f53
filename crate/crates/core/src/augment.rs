//! Seeded corruption of depth, color and masks to mimic real sensors.
//!
//! Every image gets one PRNG stream per corruption kind, derived from the
//! master seed, so switching one corruption on or off leaves the random draws
//! of the others untouched.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, DepthMap, Raster};
use crate::io::RgbImage;
use crate::predictor::InputView;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// Meters.
    pub depth_noise_sigma: f64,
    pub hole_count_range: [usize; 2],
    /// Pixels.
    pub hole_radius_range: [f64; 2],
    pub pixel_shift_max: usize,
    /// Additive, in 8-bit intensity units.
    pub brightness_range: [f64; 2],
    pub contrast_range: [f64; 2],
    pub salt_pepper_prob: f64,
    /// 8-bit intensity units.
    pub rgb_noise_sigma: f64,
    pub mask_fp_rate: f64,
    pub mask_fn_rate: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            depth_noise_sigma: 0.005,
            hole_count_range: [0, 8],
            hole_radius_range: [2.0, 12.0],
            pixel_shift_max: 2,
            brightness_range: [-20.0, 20.0],
            contrast_range: [0.8, 1.2],
            salt_pepper_prob: 0.005,
            rgb_noise_sigma: 5.0,
            mask_fp_rate: 0.0,
            mask_fn_rate: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentKind {
    Depth = 0,
    Rgb = 1,
    Mask = 2,
}

impl AugmentConfig {
    /// Leaves every input unchanged.
    pub fn identity() -> Self {
        Self {
            depth_noise_sigma: 0.0,
            hole_count_range: [0, 0],
            hole_radius_range: [0.0, 0.0],
            pixel_shift_max: 0,
            brightness_range: [0.0, 0.0],
            contrast_range: [1.0, 1.0],
            salt_pepper_prob: 0.0,
            rgb_noise_sigma: 0.0,
            mask_fp_rate: 0.0,
            mask_fn_rate: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("augmentation: {what}")));
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(self.depth_noise_sigma >= 0.0 && self.depth_noise_sigma.is_finite()) {
            return bad("depth_noise_sigma must be ≥ 0");
        }
        if self.hole_count_range[0] > self.hole_count_range[1] {
            return bad("hole_count_range is not ordered");
        }
        if !ordered(self.hole_radius_range) || self.hole_radius_range[0] < 0.0 {
            return bad("hole_radius_range must be ordered and ≥ 0");
        }
        if !ordered(self.brightness_range) {
            return bad("brightness_range is not ordered");
        }
        if !ordered(self.contrast_range) || self.contrast_range[0] < 0.0 {
            return bad("contrast_range must be ordered and ≥ 0");
        }
        if !(self.rgb_noise_sigma >= 0.0 && self.rgb_noise_sigma.is_finite()) {
            return bad("rgb_noise_sigma must be ≥ 0");
        }
        for (name, p) in [
            ("salt_pepper_prob", self.salt_pepper_prob),
            ("mask_fp_rate", self.mask_fp_rate),
            ("mask_fn_rate", self.mask_fn_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Generator for one (image, kind) pair.
    pub fn stream(&self, image: u64, kind: AugmentKind) -> Pcg32 {
        Pcg32::new(
            self.seed ^ image.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            kind as u64,
        )
    }
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    range[0] + (range[1] - range[0]) * rng.random::<f64>()
}

/// Gaussian noise on valid pixels, disk-shaped holes, then an integer shift
/// of the whole image. Noise pushing depth to ≤ 0 invalidates the pixel.
pub fn augment_depth<R: Rng>(d: &DepthMap, cfg: &AugmentConfig, rng: &mut R) -> DepthMap {
    let (w, h) = d.dims();
    let mut out = d.clone();
    if cfg.depth_noise_sigma > 0.0 {
        let noise = Normal::new(0.0, cfg.depth_noise_sigma).expect("validated sigma");
        for v in out.data_mut() {
            if *v > 0.0 {
                let n = *v + noise.sample(rng);
                *v = if n > 0.0 { n } else { 0.0 };
            }
        }
    }

    let holes = rng.random_range(cfg.hole_count_range[0]..=cfg.hole_count_range[1]);
    for _ in 0..holes {
        let ci = rng.random::<f64>() * w as f64;
        let cj = rng.random::<f64>() * h as f64;
        let r = uniform(rng, cfg.hole_radius_range);
        let (i0, i1) = (
            (ci - r).floor().max(0.0) as usize,
            ((ci + r).ceil() as usize).min(w),
        );
        let (j0, j1) = (
            (cj - r).floor().max(0.0) as usize,
            ((cj + r).ceil() as usize).min(h),
        );
        for j in j0..j1 {
            for i in i0..i1 {
                let (di, dj) = (i as f64 - ci, j as f64 - cj);
                if di * di + dj * dj <= r * r {
                    out.set(i, j, 0.0);
                }
            }
        }
    }

    let m = cfg.pixel_shift_max as i64;
    if m > 0 {
        let dx = rng.random_range(-m..=m) as isize;
        let dy = rng.random_range(-m..=m) as isize;
        let src = out;
        out = Raster::from_fn(w, h, |i, j| {
            let (si, sj) = (i as isize - dx, j as isize - dy);
            if si < 0 || sj < 0 || si >= w as isize || sj >= h as isize {
                0.0
            } else {
                *src.get(si as usize, sj as usize)
            }
        });
    }
    out
}

/// Contrast about mid-gray, brightness offset and Gaussian noise, clamped to
/// 8 bits; then each channel independently becomes 0 or 255 with
/// probability `salt_pepper_prob`.
pub fn augment_rgb<R: Rng>(img: &RgbImage, cfg: &AugmentConfig, rng: &mut R) -> RgbImage {
    let contrast = uniform(rng, cfg.contrast_range);
    let brightness = uniform(rng, cfg.brightness_range);
    let noise = Normal::new(0.0, cfg.rgb_noise_sigma).expect("validated sigma");
    let mut out = img.clone();
    for px in out.data_mut() {
        for c in px.iter_mut() {
            let mut v = contrast * (*c as f64 - 128.0) + 128.0 + brightness;
            if cfg.rgb_noise_sigma > 0.0 {
                v += noise.sample(rng);
            }
            *c = v.round().clamp(0.0, 255.0) as u8;
            if cfg.salt_pepper_prob > 0.0 && rng.random::<f64>() < cfg.salt_pepper_prob {
                *c = if rng.random::<bool>() { 255 } else { 0 };
            }
        }
    }
    out
}

/// Flips background pixels to foreground with probability `fp_rate` and
/// foreground to background with probability `fn_rate`.
pub fn corrupt_mask<R: Rng>(m: &BinaryMask, fp_rate: f64, fn_rate: f64, rng: &mut R) -> BinaryMask {
    m.map(|&fg| {
        let flip = rng.random::<f64>() < if fg { fn_rate } else { fp_rate };
        fg != flip
    })
}

/// Applies all three corruptions to image number `image` of a dataset.
pub fn augment_view(view: &InputView, cfg: &AugmentConfig, image: u64) -> Result<InputView> {
    cfg.validate()?;
    let depth = augment_depth(&view.depth, cfg, &mut cfg.stream(image, AugmentKind::Depth));
    let rgb = augment_rgb(&view.rgb, cfg, &mut cfg.stream(image, AugmentKind::Rgb));
    let mask = corrupt_mask(
        &view.mask,
        cfg.mask_fp_rate,
        cfg.mask_fn_rate,
        &mut cfg.stream(image, AugmentKind::Mask),
    );
    InputView::new(Some(rgb), depth, mask, view.intrinsics, view.pose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraIntrinsics, RigidTransform};
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize) -> DepthMap {
        Raster::from_fn(w, h, |i, j| {
            if (i + j) % 7 == 0 {
                0.0
            } else {
                0.5 + 0.01 * i as f64 + 0.002 * j as f64
            }
        })
    }

    #[test]
    fn identity_config_changes_nothing() {
        let cfg = AugmentConfig::identity();
        let d = ramp(40, 30);
        assert_eq!(
            augment_depth(&d, &cfg, &mut cfg.stream(0, AugmentKind::Depth)),
            d
        );
        let img = Raster::from_fn(40, 30, |i, j| [i as u8, j as u8, (i * j) as u8]);
        assert_eq!(
            augment_rgb(&img, &cfg, &mut cfg.stream(0, AugmentKind::Rgb)),
            img
        );
        let m = Raster::from_fn(40, 30, |i, _| i > 10);
        assert_eq!(
            corrupt_mask(&m, 0.0, 0.0, &mut cfg.stream(0, AugmentKind::Mask)),
            m
        );
        let all = corrupt_mask(&m, 1.0, 1.0, &mut cfg.stream(0, AugmentKind::Mask));
        assert_eq!(all, m.map(|&b| !b));
    }

    #[test]
    fn depth_noise_statistics() {
        let cfg = AugmentConfig {
            depth_noise_sigma: 0.01,
            ..AugmentConfig::identity()
        };
        let d = DepthMap::filled(400, 250, 1.0);
        let out = augment_depth(&d, &cfg, &mut cfg.stream(3, AugmentKind::Depth));
        let diffs: Vec<f64> = out.data().iter().map(|v| v - 1.0).collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((std - 0.01).abs() < 0.0002, "{std}");
    }

    #[test]
    fn salt_pepper_fraction() {
        let cfg = AugmentConfig {
            salt_pepper_prob: 0.01,
            ..AugmentConfig::identity()
        };
        // mid-gray values are never 0 or 255 on their own
        let img = RgbImage::filled(1000, 334, [100, 120, 140]);
        let out = augment_rgb(&img, &cfg, &mut cfg.stream(0, AugmentKind::Rgb));
        let hit = out
            .data()
            .iter()
            .flatten()
            .filter(|&&c| c == 0 || c == 255)
            .count();
        let frac = hit as f64 / (img.len() * 3) as f64;
        assert!((frac - 0.01).abs() < 0.002, "{frac}");
    }

    #[test]
    fn mask_flip_count() {
        let m = BinaryMask::filled(100, 100, false);
        let cfg = AugmentConfig::identity();
        let out = corrupt_mask(&m, 0.2, 0.0, &mut cfg.stream(0, AugmentKind::Mask));
        let flips = out.data().iter().filter(|&&b| b).count() as f64;
        // 4 standard deviations of binomial(10⁴, 0.2)
        assert!((flips - 2000.0).abs() < 4.0 * 40.0, "{flips}");
    }

    #[test]
    fn streams_are_independent_and_seeded() {
        let view = InputView::new(
            Some(RgbImage::filled(32, 24, [90, 90, 90])),
            ramp(32, 24),
            Raster::from_fn(32, 24, |i, _| i < 16),
            CameraIntrinsics::centered(30.0, 32, 24).unwrap(),
            RigidTransform::identity(),
        )
        .unwrap();
        let cfg = AugmentConfig {
            seed: 5,
            ..Default::default()
        };
        let a = augment_view(&view, &cfg, 2).unwrap();
        assert_eq!(a, augment_view(&view, &cfg, 2).unwrap());
        assert_ne!(a, augment_view(&view, &cfg, 3).unwrap());
        let noisy_mask = AugmentConfig {
            mask_fp_rate: 0.3,
            ..cfg
        };
        let b = augment_view(&view, &noisy_mask, 2).unwrap();
        assert_eq!(a.depth, b.depth);
        assert_eq!(a.rgb, b.rgb);
        assert_ne!(a.mask, b.mask);
    }

    #[test]
    fn config_from_toml_keeps_defaults() {
        let cfg: AugmentConfig = toml::from_str("depth_noise_sigma = 0.002\nseed = 9\n").unwrap();
        assert_eq!(cfg.depth_noise_sigma, 0.002);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.hole_count_range, [0, 8]);
        assert!(toml::from_str::<AugmentConfig>("bogus = 1\n").is_err());
        let bad = AugmentConfig {
            contrast_range: [1.2, 0.8],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn never_revalidates_pixels(seed in any::<u64>(), w in 4usize..40, h in 4usize..40) {
            let d = ramp(w, h);
            let cfg = AugmentConfig { seed, depth_noise_sigma: 0.3, ..Default::default() };
            let out = augment_depth(&d, &cfg, &mut cfg.stream(0, AugmentKind::Depth));
            prop_assert!(out.data().iter().all(|v| v.is_finite() && *v >= 0.0));
            let invalid_in = d.data().iter().filter(|&&v| v == 0.0).count();
            let invalid_out = out.data().iter().filter(|&&v| v == 0.0).count();
            // a shift can move invalid pixels out of frame, but never more than
            // the shifted-out border holds
            let border = 2 * (w + h) * cfg.pixel_shift_max;
            prop_assert!(invalid_out + border >= invalid_in);
            let cfg0 = AugmentConfig { pixel_shift_max: 0, ..cfg };
            let out0 = augment_depth(&d, &cfg0, &mut cfg0.stream(0, AugmentKind::Depth));
            for (a, b) in d.data().iter().zip(out0.data()) {
                if *a == 0.0 {
                    prop_assert_eq!(*b, 0.0);
                }
            }
        }
    }
}
