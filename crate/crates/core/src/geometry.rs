//! Pinhole camera math shared by the rest of the crate.
//!
//! Pixel convention: `i` is the column (x), `j` the row (y), pixel centers sit
//! at integer coordinates. Depth is the camera-frame z coordinate, and `0.0`
//! marks an invalid pixel.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on `RᵀR = I` and `det R = 1` for a [`RigidTransform`].
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    /// Square-pixel camera with the principal point at the image center.
    pub fn centered(focal: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(
            focal,
            focal,
            (width as f64 - 1.0) / 2.0,
            (height as f64 - 1.0) / 2.0,
            width,
            height,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive and finite (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCamera("image size must be nonzero".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx)
            || !(0.0..self.height as f64).contains(&self.cy)
        {
            return Err(Error::InvalidCamera(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Normalized image coordinates of pixel `(i, j)`.
    #[inline]
    pub fn ray(&self, i: f64, j: f64) -> (f64, f64) {
        ((i - self.cx) / self.fx, (j - self.cy) / self.fy)
    }

    /// Camera-frame point at pixel `(i, j)` with z-depth `depth`.
    #[inline]
    pub fn unproject(&self, i: f64, j: f64, depth: f64) -> Vec3 {
        let (x, y) = self.ray(i, j);
        Vec3::new(x * depth, y * depth, depth)
    }
}

/// A rotation followed by a translation, `x ↦ R·x + t`.
///
/// Poses use the world-to-camera direction throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Validates `rotation` against [`ROTATION_TOLERANCE`].
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        check_rotation(&rotation, ROTATION_TOLERANCE)?;
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("translation is not finite".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Trusts the caller that `rotation` is a proper rotation.
    pub(crate) fn from_parts_unchecked(rotation: Mat3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    /// Accepts rotations within `tolerance` of orthonormal and projects them
    /// back onto SO(3). Exactly orthonormal input is returned untouched.
    pub fn new_orthonormalized(rotation: Mat3, translation: Vec3, tolerance: f64) -> Result<Self> {
        check_rotation(&rotation, tolerance)?;
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("translation is not finite".into()));
        }
        if check_rotation(&rotation, ROTATION_TOLERANCE).is_ok() {
            return Ok(Self {
                rotation,
                translation,
            });
        }
        Ok(Self {
            rotation: nearest_rotation(&rotation),
            translation,
        })
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    #[inline]
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rotation only, for directions.
    #[inline]
    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn compose(&self, first: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }

    /// Position of the camera center in the source frame, `-Rᵀt`.
    pub fn camera_center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// Row-major `[R | t]`.
    pub fn to_rows(&self) -> [[f64; 4]; 3] {
        let mut rows = [[0.0; 4]; 3];
        for (r, row) in rows.iter_mut().enumerate() {
            for c in 0..3 {
                row[c] = self.rotation[(r, c)];
            }
            row[3] = self.translation[r];
        }
        rows
    }
}

fn check_rotation(r: &Mat3, tolerance: f64) -> Result<()> {
    if !r.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidTransform("rotation is not finite".into()));
    }
    let ortho = (r.transpose() * r - Mat3::identity()).abs().max();
    let det = r.determinant();
    if ortho > tolerance || (det - 1.0).abs() > tolerance {
        return Err(Error::InvalidTransform(format!(
            "rotation not orthonormal (max |RᵀR - I| = {ortho:.3e}, det = {det})"
        )));
    }
    Ok(())
}

/// Closest rotation in the Frobenius sense.
pub(crate) fn nearest_rotation(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

/// Row-major image raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Raster<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                data.push(f(i, j));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[j * self.width + i]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[j * self.width + i] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Raster<U>) -> bool {
        self.dims() == other.dims()
    }

    pub(crate) fn ensure_dims<U>(&self, other: &Raster<U>, what: &str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }
}

/// Z-depth in meters; `0.0` is invalid.
pub type DepthMap = Raster<f64>;
pub type BinaryMask = Raster<bool>;

/// Per-pixel camera-frame points with a validity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    pub points: Raster<Vec3>,
    pub valid: Raster<bool>,
}

impl PointMap {
    pub fn width(&self) -> usize {
        self.points.width()
    }

    pub fn height(&self) -> usize {
        self.points.height()
    }

    /// Valid points in row-major order.
    pub fn valid_points(&self) -> impl Iterator<Item = &Vec3> + '_ {
        self.points
            .data()
            .iter()
            .zip(self.valid.data())
            .filter(|(_, &v)| v)
            .map(|(p, _)| p)
    }
}

/// Per-pixel normalized image coordinates.
pub type RayMap = Raster<(f64, f64)>;

pub fn unproject_depth(depth: &DepthMap, k: &CameraIntrinsics) -> Result<PointMap> {
    if depth.dims() != (k.width, k.height) {
        return Err(Error::DimensionMismatch(format!(
            "depth map {}x{} vs intrinsics {}x{}",
            depth.width(),
            depth.height(),
            k.width,
            k.height
        )));
    }
    let points = Raster::from_fn(k.width, k.height, |i, j| {
        let d = *depth.get(i, j);
        if d > 0.0 {
            k.unproject(i as f64, j as f64, d)
        } else {
            Vec3::zeros()
        }
    });
    let valid = depth.map(|&d| d > 0.0);
    Ok(PointMap { points, valid })
}

pub fn compute_ray_map(k: &CameraIntrinsics) -> RayMap {
    Raster::from_fn(k.width, k.height, |i, j| k.ray(i as f64, j as f64))
}

pub fn transform_point_map(pm: &PointMap, t: &RigidTransform) -> PointMap {
    let points = Raster::from_fn(pm.width(), pm.height(), |i, j| {
        if *pm.valid.get(i, j) {
            t.apply(pm.points.get(i, j))
        } else {
            *pm.points.get(i, j)
        }
    });
    PointMap {
        points,
        valid: pm.valid.clone(),
    }
}

/// Result of [`project_point`]; `z < 0` means the point is behind the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

impl Projection {
    pub fn is_in_front(&self) -> bool {
        self.z > 0.0
    }

    /// Nearest pixel, if it falls inside a `width`×`height` image.
    pub fn nearest_pixel(&self, width: usize, height: usize) -> Option<(usize, usize)> {
        let i = self.u.round();
        let j = self.v.round();
        if i >= 0.0 && j >= 0.0 && i < width as f64 && j < height as f64 {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }
}

/// Projects `q` through `t` then `k`. Returns `None` when the camera-frame
/// depth is exactly zero.
pub fn project_point(q: &Vec3, k: &CameraIntrinsics, t: &RigidTransform) -> Option<Projection> {
    project_camera_point(&t.apply(q), k)
}

#[inline]
pub(crate) fn project_camera_point(p: &Vec3, k: &CameraIntrinsics) -> Option<Projection> {
    if p.z == 0.0 {
        return None;
    }
    Some(Projection {
        u: k.fx * p.x / p.z + k.cx,
        v: k.fy * p.y / p.z + k.cy,
        z: p.z,
    })
}

/// Rotation about `axis` (unit) by `angle` radians.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle).matrix()
}

/// `Rz(yaw)·Ry(pitch)·Rx(roll)`.
pub fn euler_zyx(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let rz = Mat3::new(cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0);
    let ry = Mat3::new(cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp);
    let rx = Mat3::new(1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr);
    rz * ry * rx
}
