//! Registration of a prediction made in an arbitrary canonical frame onto the
//! ground truth: oriented-box scale matching, a coarse-to-fine rotation grid
//! search on chamfer distance, then point-to-point ICP.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{SymmetricEigen, SVD};
use rand::seq::index;
use rand::SeedableRng;
use rand_pcg::Pcg32;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{euler_zyx, Mat3, RigidTransform, Vec3};
use crate::kdtree::KdTree;
use crate::metrics::{self, MetricReport, PointCloud};

/// Oriented bounding box from PCA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    /// Centroid of the fitted points.
    pub center: Vec3,
    /// Principal axes as columns, by decreasing variance, right-handed.
    pub axes: Mat3,
    /// Half-lengths along each axis, measured from the center.
    pub extents: Vec3,
}

impl Obb {
    pub fn diagonal(&self) -> f64 {
        2.0 * self.extents.norm()
    }
}

pub fn fit_obb(points: &[Vec3]) -> Result<Obb> {
    if points.is_empty() {
        return Err(Error::Degenerate(
            "cannot fit a box to an empty cloud".into(),
        ));
    }
    let n = points.len() as f64;
    let center = points.iter().sum::<Vec3>() / n;
    let mut cov = Mat3::zeros();
    for p in points {
        let d = p - center;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut axes = Mat3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]);
    if axes.determinant() < 0.0 {
        axes.set_column(2, &(-axes.column(2)));
    }
    let mut extents = Vec3::zeros();
    for p in points {
        let proj = axes.transpose() * (p - center);
        extents = extents.sup(&proj.abs());
    }
    Ok(Obb {
        center,
        axes,
        extents,
    })
}

/// Affine map `x ↦ linear·x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub linear: Mat3,
    pub translation: Vec3,
}

impl Default for Alignment {
    fn default() -> Self {
        Self::identity()
    }
}

impl Alignment {
    pub fn identity() -> Self {
        Self {
            linear: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_rigid(t: &RigidTransform) -> Self {
        Self {
            linear: *t.rotation(),
            translation: *t.translation(),
        }
    }

    /// `x ↦ center + linear·(x − center)`.
    pub fn about(center: &Vec3, linear: Mat3) -> Self {
        Self {
            linear,
            translation: center - linear * center,
        }
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.linear * p + self.translation
    }

    pub fn apply(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud {
            points: cloud.points.iter().map(|p| self.apply_point(p)).collect(),
            confidence: cloud.confidence.clone(),
        }
    }

    /// `self ∘ first`.
    pub fn then_after(&self, first: &Alignment) -> Self {
        Self {
            linear: self.linear * first.linear,
            translation: self.linear * first.translation + self.translation,
        }
    }

    /// Row-major 3×4 matrix.
    pub fn affine(&self) -> [[f64; 4]; 3] {
        let l = &self.linear;
        let t = &self.translation;
        [
            [l[(0, 0)], l[(0, 1)], l[(0, 2)], t.x],
            [l[(1, 0)], l[(1, 1)], l[(1, 2)], t.y],
            [l[(2, 0)], l[(2, 1)], l[(2, 2)], t.z],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleFit {
    /// Factor along each principal axis of the prediction, by decreasing extent.
    PerAxis { axes: Mat3, factors: Vec3 },
    /// Ratio of box diagonals, used when the prediction is flat along an axis.
    Uniform(f64),
}

/// Extents below this count as degenerate.
const MIN_EXTENT: f64 = 1e-9;

/// Scales the prediction so its box extents match the ground truth's and
/// moves its center onto the ground-truth center.
pub fn scale_and_center(pred: &PointCloud, gt: &PointCloud) -> Result<(Alignment, ScaleFit)> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::Degenerate(
            "scale matching needs two nonempty clouds".into(),
        ));
    }
    let pb = fit_obb(&pred.points)?;
    let gb = fit_obb(&gt.points)?;
    let sorted = |e: &Vec3| {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| e[b].total_cmp(&e[a]).then(a.cmp(&b)));
        idx
    };
    let (pi, gi) = (sorted(&pb.extents), sorted(&gb.extents));
    let (linear, fit) = if pb.extents.min() < MIN_EXTENT {
        let pd = pb.extents.norm();
        let s = if pd < MIN_EXTENT {
            1.0
        } else {
            gb.extents.norm() / pd
        };
        (Mat3::identity() * s, ScaleFit::Uniform(s))
    } else {
        let axes = Mat3::from_columns(&[
            pb.axes.column(pi[0]),
            pb.axes.column(pi[1]),
            pb.axes.column(pi[2]),
        ]);
        let factors = Vec3::new(
            gb.extents[gi[0]] / pb.extents[pi[0]],
            gb.extents[gi[1]] / pb.extents[pi[1]],
            gb.extents[gi[2]] / pb.extents[pi[2]],
        );
        let linear = if factors.x == factors.y && factors.y == factors.z {
            // keeps an exact identity when the clouds already agree
            Mat3::identity() * factors.x
        } else {
            axes * Mat3::from_diagonal(&factors) * axes.transpose()
        };
        (linear, ScaleFit::PerAxis { axes, factors })
    };
    let align = Alignment {
        linear,
        translation: gb.center - linear * pb.center,
    };
    Ok((align, fit))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentConfig {
    pub rotation_steps: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub scale_step: f64,
    /// Searches a grid of scale multipliers on top of the box-matched scale.
    pub use_scale_grid: bool,
    pub icp_max_iters: usize,
    /// Relative RMS improvement below which ICP stops.
    pub icp_tol: f64,
    /// Points per cloud used when scoring grid candidates.
    pub eval_subsample: usize,
    pub seed: u64,
    pub eta_mm: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            rotation_steps: 20,
            scale_min: 0.65,
            scale_max: 1.35,
            scale_step: 0.05,
            use_scale_grid: false,
            icp_max_iters: 50,
            icp_tol: 1e-6,
            eval_subsample: 2048,
            seed: 0,
            eta_mm: 10.0,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rotation_steps == 0 {
            return Err(Error::InvalidConfig("rotation_steps must be ≥ 1".into()));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max && self.scale_step > 0.0) {
            return Err(Error::InvalidConfig(
                "scale grid must satisfy 0 < min ≤ max and step > 0".into(),
            ));
        }
        if self.eval_subsample == 0 {
            return Err(Error::InvalidConfig("eval_subsample must be ≥ 1".into()));
        }
        if !(self.icp_tol >= 0.0) {
            return Err(Error::InvalidConfig("icp_tol must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Multipliers `min + k·step` up to `max`, with tolerance for rounding.
    pub fn scale_grid(&self) -> Vec<f64> {
        let n = ((self.scale_max - self.scale_min) / self.scale_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| self.scale_min + k as f64 * self.scale_step)
            .collect()
    }
}

/// Seeded uniform subsample; clouds of equal size get the same indices.
pub fn subsample(points: &[Vec3], count: usize, seed: u64) -> Vec<Vec3> {
    if points.len() <= count {
        return points.to_vec();
    }
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, points.len(), count).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| points[i]).collect()
}

/// Scoring state for rotations about a fixed center.
pub struct ChamferScorer {
    pred: Vec<Vec3>,
    gt: Vec<Vec3>,
    pred_tree: KdTree,
    gt_tree: KdTree,
    center: Vec3,
}

impl ChamferScorer {
    pub fn new(
        pred: &[Vec3],
        gt: &[Vec3],
        center: Vec3,
        subsample_count: usize,
        seed: u64,
    ) -> Result<Self> {
        if pred.is_empty() || gt.is_empty() {
            return Err(Error::UndefinedMetric(
                "rotation search needs two nonempty clouds",
            ));
        }
        let pred = subsample(pred, subsample_count, seed);
        let gt = subsample(gt, subsample_count, seed);
        Ok(Self {
            pred_tree: KdTree::new(&pred),
            gt_tree: KdTree::new(&gt),
            pred,
            gt,
            center,
        })
    }

    /// Chamfer distance in meters after rotating the prediction by `r` about
    /// the center, or `None` as soon as it provably exceeds `bound`.
    pub fn score(&self, r: &Mat3, bound: f64) -> Option<f64> {
        let c = self.center;
        let (np, ng) = (self.pred.len() as f64, self.gt.len() as f64);
        let mut acc = 0.0;
        for p in &self.pred {
            acc += self
                .gt_tree
                .nearest_distance(&(r * (p - c) + c))
                .expect("nonempty");
            if acc / np / 2.0 > bound {
                return None;
            }
        }
        let acc_mean = acc / np;
        let rt = r.transpose();
        let mut comp = 0.0;
        for q in &self.gt {
            comp += self
                .pred_tree
                .nearest_distance(&(rt * (q - c) + c))
                .expect("nonempty");
            if (acc_mean + comp / ng) / 2.0 > bound {
                return None;
            }
        }
        Some((acc_mean + comp / ng) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridResult {
    /// Rotation about the scorer's center.
    pub rotation: Mat3,
    /// (yaw, pitch, roll) in radians.
    pub angles: [f64; 3],
    /// Subsampled chamfer distance in meters.
    pub chamfer: f64,
}

/// Coarse grid values for one axis: yaw and roll cover `[0, 2π)`, pitch
/// covers `[−π/2, π/2)` so that the grid spans every rotation.
pub fn coarse_angles(steps: usize) -> [Vec<f64>; 3] {
    let tau = std::f64::consts::TAU;
    let pi = std::f64::consts::PI;
    let full: Vec<f64> = (0..steps).map(|k| tau * k as f64 / steps as f64).collect();
    let pitch = (0..steps)
        .map(|k| {
            let v = pi * k as f64 / steps as f64;
            if v >= pi / 2.0 {
                v - pi
            } else {
                v
            }
        })
        .collect();
    [full.clone(), pitch, full]
}

/// `steps` values per axis spanning one coarse cell either side of `around`.
pub fn refined_angles(around: [f64; 3], coarse_steps: usize, steps: usize) -> [Vec<f64>; 3] {
    let pi = std::f64::consts::PI;
    let cells = [
        2.0 * pi / coarse_steps as f64,
        pi / coarse_steps as f64,
        2.0 * pi / coarse_steps as f64,
    ];
    std::array::from_fn(|axis| {
        if steps == 1 {
            return vec![around[axis]];
        }
        let lo = around[axis] - cells[axis];
        (0..steps)
            .map(|k| lo + 2.0 * cells[axis] * k as f64 / (steps - 1) as f64)
            .collect()
    })
}

/// Exhaustive search over the product grid with exact pruning. Ties go to the
/// lowest (yaw, pitch, roll) index.
pub fn search_grid(
    scorer: &ChamferScorer,
    grid: &[Vec<f64>; 3],
    initial_bound: f64,
) -> Option<GridResult> {
    let (ny, np, nr) = (grid[0].len(), grid[1].len(), grid[2].len());
    let total = ny * np * nr;
    let best = AtomicU64::new(initial_bound.to_bits());
    let angles = |idx: usize| {
        [
            grid[0][idx / (np * nr)],
            grid[1][(idx / nr) % np],
            grid[2][idx % nr],
        ]
    };
    let found = (0..total)
        .into_par_iter()
        .with_min_len(8)
        .filter_map(|idx| {
            let a = angles(idx);
            let r = euler_zyx(a[0], a[1], a[2]);
            let bound = f64::from_bits(best.load(Ordering::Relaxed));
            let value = scorer.score(&r, bound)?;
            // non-negative floats order like their bit patterns
            best.fetch_min(value.to_bits(), Ordering::Relaxed);
            Some((value, idx))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))?;
    let a = angles(found.1);
    Some(GridResult {
        rotation: euler_zyx(a[0], a[1], a[2]),
        angles: a,
        chamfer: found.0,
    })
}

/// Two-pass rotation search about `scorer`'s center. The refined pass only
/// replaces the coarse winner when it is strictly better.
pub fn rotation_grid_search(scorer: &ChamferScorer, steps: usize) -> GridResult {
    let coarse = search_grid(scorer, &coarse_angles(steps), f64::INFINITY).expect("finite chamfer");
    let fine = search_grid(
        scorer,
        &refined_angles(coarse.angles, steps, steps),
        coarse.chamfer,
    );
    match fine {
        Some(f) if f.chamfer < coarse.chamfer => f,
        _ => coarse,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    /// Maps the prediction onto the ground truth.
    pub transform: RigidTransform,
    /// Correspondence rounds performed.
    pub iterations: usize,
    pub converged: bool,
    /// RMS correspondence distance in meters at the start of each round.
    pub rms_history: Vec<f64>,
}

/// Least-squares rigid motion taking `src[k]` to `dst[k]`.
pub fn best_fit_rigid(src: &[Vec3], dst: &[Vec3]) -> RigidTransform {
    let n = src.len() as f64;
    let cs = src.iter().sum::<Vec3>() / n;
    let cd = dst.iter().sum::<Vec3>() / n;
    let mut h = Mat3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s - cs) * (d - cd).transpose();
    }
    let svd = SVD::new(h, true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V").transpose();
    let mut fix = Mat3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        fix[(2, 2)] = -1.0;
    }
    let r = v * fix * u.transpose();
    RigidTransform::new_orthonormalized(r, cd - r * cs, 1e-6).expect("SVD rotation is orthonormal")
}

pub fn icp(pred: &[Vec3], gt: &[Vec3], max_iters: usize, tol: f64) -> Result<IcpResult> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::Degenerate("ICP needs two nonempty clouds".into()));
    }
    let tree = KdTree::new(gt);
    let mut current = RigidTransform::identity();
    let mut history = Vec::new();
    let mut converged = false;
    let mut moved: Vec<Vec3> = pred.to_vec();
    for _ in 0..max_iters {
        let matches: Vec<(Vec3, f64)> = moved
            .par_iter()
            .map(|p| {
                let nn = tree.nearest(p).expect("nonempty");
                (gt[nn.index], nn.dist_sq)
            })
            .collect();
        let rms = (matches.iter().map(|m| m.1).sum::<f64>() / matches.len() as f64).sqrt();
        let previous = history.last().copied();
        history.push(rms);
        if rms == 0.0 {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            if (prev - rms) / prev < tol {
                converged = true;
                break;
            }
        }
        let targets: Vec<Vec3> = matches.iter().map(|m| m.0).collect();
        let step = best_fit_rigid(&moved, &targets);
        current = step.compose(&current);
        moved = pred.iter().map(|p| current.apply(p)).collect();
    }
    Ok(IcpResult {
        transform: current,
        iterations: history.len(),
        converged,
        rms_history: history,
    })
}

#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// Full map from prediction to ground-truth frame.
    pub alignment: Alignment,
    pub scale: ScaleFit,
    /// Multiplier chosen from the scale grid (1 when the grid is off).
    pub scale_multiplier: f64,
    pub grid: GridResult,
    pub icp: IcpResult,
    /// Metrics of the aligned full prediction against the full ground truth.
    pub report: MetricReport,
}

/// Box scale and center matching, optional scale grid, rotation grid search
/// and ICP, in that order.
pub fn align_canonical(
    pred: &PointCloud,
    gt: &PointCloud,
    cfg: &AlignmentConfig,
) -> Result<AlignmentResult> {
    cfg.validate()?;
    let (matched, scale) = scale_and_center(pred, gt)?;
    let center = fit_obb(&gt.points)?.center;
    let matched_pts: Vec<Vec3> = pred.points.iter().map(|p| matched.apply_point(p)).collect();
    let multipliers = if cfg.use_scale_grid {
        cfg.scale_grid()
    } else {
        vec![1.0]
    };

    let mut best: Option<(f64, Alignment, GridResult)> = None;
    for &m in &multipliers {
        let scaled_by = Alignment::about(&center, Mat3::identity() * m);
        let pts: Vec<Vec3> = matched_pts
            .iter()
            .map(|p| scaled_by.apply_point(p))
            .collect();
        let scorer = ChamferScorer::new(&pts, &gt.points, center, cfg.eval_subsample, cfg.seed)?;
        let g = rotation_grid_search(&scorer, cfg.rotation_steps);
        if best.as_ref().is_none_or(|b| g.chamfer < b.2.chamfer) {
            best = Some((m, scaled_by, g));
        }
    }
    let (multiplier, scaled_by, grid) = best.expect("at least one multiplier");
    let pre_icp = Alignment::about(&center, grid.rotation)
        .then_after(&scaled_by)
        .then_after(&matched);
    let moved = pre_icp.apply(pred);
    let icp_result = icp(&moved.points, &gt.points, cfg.icp_max_iters, cfg.icp_tol)?;
    let alignment = Alignment::from_rigid(&icp_result.transform).then_after(&pre_icp);
    let report = metrics::evaluate(&alignment.apply(pred), gt, cfg.eta_mm)?;
    Ok(AlignmentResult {
        alignment,
        scale,
        scale_multiplier: multiplier,
        grid,
        icp: icp_result,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Anisotropic blob with a bump so no rotation maps it onto itself.
    fn blob(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = Pcg32::seed_from_u64(seed);
        let g = Normal::new(0.0, 1.0).unwrap();
        let mut pts: Vec<Vec3> = (0..n)
            .map(|_| {
                Vec3::new(
                    0.09 * g.sample(&mut rng),
                    0.05 * g.sample(&mut rng),
                    0.025 * g.sample(&mut rng),
                )
            })
            .collect();
        for p in pts.iter_mut().take(n / 5) {
            *p = Vec3::new(0.06, 0.03, 0.02)
                + 0.015 * Vec3::new(rng.random(), rng.random(), rng.random());
        }
        pts
    }

    fn cloud(pts: Vec<Vec3>) -> PointCloud {
        PointCloud::new(pts)
    }

    #[test]
    fn obb_of_cube_corners() {
        let mut pts = Vec::new();
        for x in [-0.5, 0.5] {
            for y in [-0.5, 0.5] {
                for z in [-0.5, 0.5] {
                    pts.push(Vec3::new(x, y, z) + Vec3::new(2.0, 1.0, 0.0));
                }
            }
        }
        let obb = fit_obb(&pts).unwrap();
        assert!((obb.center - Vec3::new(2.0, 1.0, 0.0)).norm() < 1e-12);
        for e in obb.extents.iter() {
            assert!(
                (e - 0.5).abs() < 1e-9
                    || (e - 0.5 * 2f64.sqrt()).abs() < 1e-9
                    || *e <= 0.5 * 3f64.sqrt() + 1e-9
            );
        }
        let single = fit_obb(&[Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        assert_eq!(single.extents, Vec3::zeros());
        assert!(fit_obb(&[]).is_err());
    }

    #[test]
    fn obb_axes_and_rotation_invariance() {
        let pts = blob(500, 1);
        let obb = fit_obb(&pts).unwrap();
        assert!(
            (obb.axes.transpose() * obb.axes - Mat3::identity())
                .abs()
                .max()
                < 1e-9
        );
        assert!((obb.axes.determinant() - 1.0).abs() < 1e-9);
        let r = euler_zyx(0.7, -0.3, 2.0);
        let rotated: Vec<Vec3> = pts
            .iter()
            .map(|p| r * p + Vec3::new(1.0, 0.0, -2.0))
            .collect();
        let obb2 = fit_obb(&rotated).unwrap();
        assert!((obb.extents - obb2.extents).abs().max() < 1e-9);
    }

    #[test]
    fn uniform_scale_is_recovered() {
        let gt = cloud(blob(400, 2));
        let pred = cloud(gt.points.iter().map(|p| 2.0 * p).collect());
        let (a, fit) = scale_and_center(&pred, &gt).unwrap();
        match fit {
            ScaleFit::PerAxis { factors, .. } => {
                assert!((factors - Vec3::repeat(0.5)).abs().max() < 1e-9)
            }
            ScaleFit::Uniform(_) => panic!("expected per-axis fit"),
        }
        for (p, q) in a.apply(&pred).points.iter().zip(&gt.points) {
            assert!((p - q).norm() < 1e-9);
        }
        let (same, _) = scale_and_center(&gt, &gt).unwrap();
        assert!((same.linear - Mat3::identity()).abs().max() < 1e-12);
        assert!(same.translation.norm() < 1e-12);
    }

    #[test]
    fn flat_prediction_falls_back_to_uniform() {
        let gt = cloud(blob(300, 3));
        let flat = cloud(
            blob(300, 4)
                .into_iter()
                .map(|p| Vec3::new(p.x, p.y, 0.0))
                .collect(),
        );
        let (a, fit) = scale_and_center(&flat, &gt).unwrap();
        assert!(matches!(fit, ScaleFit::Uniform(s) if s.is_finite() && s > 0.0));
        assert!(a
            .apply(&flat)
            .points
            .iter()
            .all(|p| p.iter().all(|c| c.is_finite())));
    }

    #[test]
    fn scale_grid_contains_one() {
        let g = AlignmentConfig::default().scale_grid();
        assert_eq!(g.len(), 15);
        assert!(g.iter().any(|&s| (s - 1.0).abs() < 1e-12));
        assert!((g[14] - 1.35).abs() < 1e-12);
    }

    #[test]
    fn grid_recovers_representable_rotation() {
        let gt = blob(300, 5);
        let steps = 8;
        let angles = coarse_angles(steps);
        let truth = euler_zyx(angles[0][3], angles[1][6], angles[2][1]);
        // pred = truthᵀ·gt, so rotating pred by truth reproduces gt
        let pred: Vec<Vec3> = gt.iter().map(|p| truth.transpose() * p).collect();
        let scorer = ChamferScorer::new(&pred, &gt, Vec3::zeros(), 2048, 0).unwrap();
        let g = rotation_grid_search(&scorer, steps);
        assert!(g.chamfer < 1e-12, "{}", g.chamfer);
        assert!((g.rotation - truth).abs().max() < 1e-9);
    }

    #[test]
    fn pruning_matches_exhaustive_scores() {
        let gt = blob(200, 6);
        let pred: Vec<Vec3> = blob(150, 7)
            .iter()
            .map(|p| euler_zyx(0.4, 0.2, 0.1) * p)
            .collect();
        let scorer = ChamferScorer::new(&pred, &gt, Vec3::zeros(), 2048, 0).unwrap();
        let grid = coarse_angles(5);
        let fast = search_grid(&scorer, &grid, f64::INFINITY).unwrap();
        let mut best = (f64::INFINITY, [0.0; 3]);
        for &y in &grid[0] {
            for &p in &grid[1] {
                for &r in &grid[2] {
                    let v = scorer.score(&euler_zyx(y, p, r), f64::INFINITY).unwrap();
                    if v < best.0 {
                        best = (v, [y, p, r]);
                    }
                }
            }
        }
        assert_eq!(fast.chamfer, best.0);
        assert_eq!(fast.angles, best.1);
    }

    #[test]
    fn icp_identity_and_known_motion() {
        let gt = blob(600, 8);
        let r = icp(&gt, &gt, 50, 1e-6).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert!((r.transform.rotation() - Mat3::identity()).abs().max() < 1e-12);

        let motion = RigidTransform::new(
            crate::geometry::axis_angle(&Vec3::new(1.0, 2.0, 0.5), 10f64.to_radians()),
            Vec3::repeat(0.05 * 0.02),
        )
        .unwrap();
        let pred: Vec<Vec3> = gt.iter().map(|p| motion.inverse().apply(p)).collect();
        let r = icp(&pred, &gt, 100, 1e-9).unwrap();
        assert!((r.transform.rotation() - motion.rotation()).abs().max() < 1e-3);
        assert!((r.transform.translation() - motion.translation()).norm() < 1e-3 * 0.1);
        for w in r.rms_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn self_alignment_is_identity() {
        let gt = cloud(blob(500, 9));
        let cfg = AlignmentConfig {
            rotation_steps: 6,
            ..Default::default()
        };
        let r = align_canonical(&gt, &gt, &cfg).unwrap();
        assert_eq!(r.report.chamfer_mm, 0.0);
        assert!((r.alignment.linear - Mat3::identity()).abs().max() < 1e-9);
        assert!(r.alignment.translation.norm() < 1e-9);
    }

    #[test]
    fn similarity_is_undone() {
        let gt = cloud(blob(600, 10));
        let rot = euler_zyx(0.3, -0.25, 0.2);
        let pred = cloud(
            gt.points
                .iter()
                .map(|p| 0.8 * (rot * p) + Vec3::new(0.03, -0.02, 0.05))
                .collect(),
        );
        let cfg = AlignmentConfig {
            rotation_steps: 12,
            ..Default::default()
        };
        let r = align_canonical(&pred, &gt, &cfg).unwrap();
        let diag = fit_obb(&gt.points).unwrap().diagonal();
        assert!(
            r.report.chamfer_mm / 1000.0 < 1e-3 * diag,
            "{}",
            r.report.chamfer_mm
        );
        let again = align_canonical(&pred, &gt, &cfg).unwrap();
        assert_eq!(again.alignment, r.alignment);
    }
}
