//! Query camera placement around the observed foreground.
//!
//! The visible foreground is boxed in the input camera frame, cameras are
//! spread over a sphere around the box center with a golden-angle spiral
//! (uniform in the cylindrical equal-area parameterization), and every camera
//! looks at the center. The input camera itself is appended as the last query.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, CameraIntrinsics, Mat3, PointMap, RigidTransform, Vec3};
use crate::predictor::InputView;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) / 2.0
    }

    /// Half the diagonal length.
    pub fn radius(&self) -> f64 {
        (self.max - self.min).norm() / 2.0
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            b.min = b.min.inf(p);
            b.max = b.max.sup(p);
        }
        Some(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSamplingConfig {
    pub lambda_bb: f64,
    pub lambda_cam: f64,
    /// Sampled views, not counting the appended input view.
    pub n_views: usize,
    /// Intrinsics for sampled views; `None` reuses the input camera's.
    pub query_intrinsics: Option<CameraIntrinsics>,
}

impl Default for ViewSamplingConfig {
    /// Real-world settings: λ_bb = 1.3, λ_cam = 0.7, 22 views.
    fn default() -> Self {
        Self {
            lambda_bb: 1.3,
            lambda_cam: 0.7,
            n_views: 22,
            query_intrinsics: None,
        }
    }
}

impl ViewSamplingConfig {
    /// Wider sphere for inputs captured close to heavily occluded objects.
    pub fn octmae() -> Self {
        Self {
            lambda_bb: 2.5,
            lambda_cam: 1.2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bb > 0.0 && self.lambda_bb.is_finite())
            || !(self.lambda_cam > 0.0 && self.lambda_cam.is_finite())
        {
            return Err(Error::InvalidConfig(
                "lambda_bb and lambda_cam must be positive".into(),
            ));
        }
        if self.n_views == 0 {
            return Err(Error::InvalidConfig("n_views must be at least 1".into()));
        }
        Ok(())
    }
}

/// A camera to query the predictor with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryView {
    pub index: usize,
    /// World-to-camera.
    pub pose: RigidTransform,
    pub intrinsics: CameraIntrinsics,
    /// Set on the appended input-view query.
    pub is_input: bool,
}

/// Tight box around valid points under `mask`.
pub fn fit_bbox(pm: &PointMap, mask: &BinaryMask) -> Result<Aabb> {
    if pm.points.dims() != mask.dims() {
        return Err(Error::DimensionMismatch("point map vs mask".into()));
    }
    let pts = pm
        .points
        .data()
        .iter()
        .zip(pm.valid.data())
        .zip(mask.data())
        .filter(|((_, &v), &m)| v && m)
        .map(|((p, _), _)| p);
    Aabb::from_points(pts).ok_or(Error::EmptyForeground)
}

/// `max(λ_bb·r_bb, λ_cam·r_cam)`.
pub fn sampling_radius(bbox: &Aabb, camera_position: &Vec3, cfg: &ViewSamplingConfig) -> f64 {
    let r_cam = (camera_position - bbox.center()).norm();
    (cfg.lambda_bb * bbox.radius()).max(cfg.lambda_cam * r_cam)
}

/// Golden-angle spiral: point `k` has height `z = -1 + 2(k + ½)/n` and
/// azimuth `2π·frac(k·(√5 − 1)/2)`.
pub fn sample_sphere_points(n: usize, radius: f64, center: &Vec3) -> Vec<Vec3> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..n)
        .map(|k| {
            let z = -1.0 + 2.0 * (k as f64 + 0.5) / n as f64;
            let theta = 2.0 * PI * (k as f64 * golden).fract();
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let unit = Vec3::new(rho * theta.cos(), rho * theta.sin(), z);
            center + radius * unit.normalize()
        })
        .collect()
}

/// World-to-camera pose at `eye` whose +z axis points at `target` and whose
/// image-up (−y) leans toward `up_hint`. A hint parallel to the view
/// direction is replaced by the world axis least aligned with it.
pub fn look_at_pose(eye: &Vec3, target: &Vec3, up_hint: &Vec3) -> Result<RigidTransform> {
    let forward = target - eye;
    let dist = forward.norm();
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::Degenerate("look_at with eye == target".into()));
    }
    let z = forward / dist;
    let mut up = *up_hint;
    let usable = up.norm() > 0.0 && z.cross(&up.normalize()).norm() > 1e-6;
    if !usable {
        let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
        up = *axes
            .iter()
            .min_by(|a, b| a.dot(&z).abs().total_cmp(&b.dot(&z).abs()))
            .expect("three axes");
    }
    let down = -up;
    let x = down.cross(&z).normalize();
    let y = z.cross(&x);
    let rotation = Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    Ok(RigidTransform::from_parts_unchecked(
        rotation,
        -(rotation * eye),
    ))
}

/// `cfg.n_views` sphere cameras followed by the input camera.
pub fn sample_query_views(input: &InputView, cfg: &ViewSamplingConfig) -> Result<Vec<QueryView>> {
    cfg.validate()?;
    let pm = crate::geometry::unproject_depth(&input.depth, &input.intrinsics)?;
    let bbox = fit_bbox(&pm, &input.mask)?;
    // the input camera sits at the origin of its own frame
    let radius = sampling_radius(&bbox, &Vec3::zeros(), cfg);
    let eyes_cam = sample_sphere_points(cfg.n_views, radius, &bbox.center());

    let cam_to_world = input.pose.inverse();
    let center = cam_to_world.apply(&bbox.center());
    let image_up = cam_to_world.apply_vector(&-Vec3::y());
    let image_right = cam_to_world.apply_vector(&Vec3::x());
    let query_k = cfg.query_intrinsics.unwrap_or(input.intrinsics);

    let mut views = Vec::with_capacity(cfg.n_views + 1);
    for (index, eye_cam) in eyes_cam.iter().enumerate() {
        let eye = cam_to_world.apply(eye_cam);
        let dir = (center - eye).normalize();
        let up = if image_up.dot(&dir).abs() > 0.99 {
            image_right
        } else {
            image_up
        };
        let pose = look_at_pose(&eye, &center, &up)?;
        views.push(QueryView {
            index,
            pose,
            intrinsics: query_k,
            is_input: false,
        });
    }
    views.push(QueryView {
        index: cfg.n_views,
        pose: input.pose,
        intrinsics: input.intrinsics,
        is_input: true,
    });
    Ok(views)
}
