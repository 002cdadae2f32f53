//! Chamfer distance and F1 for point clouds.
//!
//! Distances are computed in meters and reported in millimeters. Accuracy is
//! the mean nearest distance from prediction to ground truth, completeness
//! the reverse, and CD their mean. Threshold tests use strict `d < η`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};
use crate::kdtree::KdTree;

const MM_PER_M: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    /// Per-point activated confidence, when known.
    pub confidence: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self {
            points,
            confidence: None,
        }
    }

    pub fn with_confidence(points: Vec<Vec3>, confidence: Vec<f64>) -> Self {
        assert_eq!(points.len(), confidence.len());
        Self {
            points,
            confidence: Some(confidence),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            points: self.points.iter().map(|p| t.apply(p)).collect(),
            confidence: self.confidence.clone(),
        }
    }

    pub fn extend(&mut self, other: PointCloud) {
        match (&mut self.confidence, other.confidence) {
            (Some(a), Some(b)) => a.extend(b),
            (None, None) => {}
            // mixed inputs: confidences would no longer line up with points
            (a, _) => *a = None,
        }
        self.points.extend(other.points);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub accuracy_mm: f64,
    pub completeness_mm: f64,
    pub chamfer_mm: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub eta_mm: f64,
}

impl MetricReport {
    /// One `key=value` per line.
    pub fn to_key_values(&self) -> String {
        format!(
            "accuracy_mm={}\ncompleteness_mm={}\nchamfer_mm={}\nprecision={}\nrecall={}\nf1={}\neta_mm={}\n",
            self.accuracy_mm, self.completeness_mm, self.chamfer_mm, self.precision, self.recall, self.f1, self.eta_mm
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Nearest distances in meters from each point of `from` to the tree.
pub fn nearest_distances(from: &[Vec3], tree: &KdTree) -> Vec<f64> {
    from.par_iter()
        .with_min_len(256)
        .map(|p| tree.nearest_distance(p).expect("nonempty tree"))
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_nonempty(q: &PointCloud, qgt: &PointCloud) -> Result<()> {
    if q.is_empty() {
        return Err(Error::UndefinedMetric("prediction cloud is empty"));
    }
    if qgt.is_empty() {
        return Err(Error::UndefinedMetric("ground-truth cloud is empty"));
    }
    Ok(())
}

/// Mean prediction→ground-truth distance in mm.
pub fn accuracy(q: &PointCloud, qgt: &PointCloud) -> Result<f64> {
    check_nonempty(q, qgt)?;
    Ok(mean(&nearest_distances(&q.points, &KdTree::new(&qgt.points))) * MM_PER_M)
}

/// Mean ground-truth→prediction distance in mm.
pub fn completeness(q: &PointCloud, qgt: &PointCloud) -> Result<f64> {
    accuracy(qgt, q).map_err(|_| Error::UndefinedMetric("completeness needs two nonempty clouds"))
}

pub fn chamfer(q: &PointCloud, qgt: &PointCloud) -> Result<f64> {
    let a = accuracy(q, qgt)?;
    let c = completeness(q, qgt)?;
    Ok((a + c) / 2.0)
}

pub fn f1_from_precision_recall(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn f1_at(q: &PointCloud, qgt: &PointCloud, eta_mm: f64) -> Result<F1Score> {
    let r = evaluate(q, qgt, eta_mm)?;
    Ok(F1Score {
        precision: r.precision,
        recall: r.recall,
        f1: r.f1,
    })
}

/// All metrics with one tree per cloud.
pub fn evaluate(q: &PointCloud, qgt: &PointCloud, eta_mm: f64) -> Result<MetricReport> {
    check_nonempty(q, qgt)?;
    if !(eta_mm > 0.0 && eta_mm.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "eta must be positive, got {eta_mm}"
        )));
    }
    let to_gt = nearest_distances(&q.points, &KdTree::new(&qgt.points));
    let to_pred = nearest_distances(&qgt.points, &KdTree::new(&q.points));
    Ok(report_from_distances(&to_gt, &to_pred, eta_mm))
}

/// Builds a report from nearest distances in meters (prediction→gt and
/// gt→prediction).
pub fn report_from_distances(to_gt: &[f64], to_pred: &[f64], eta_mm: f64) -> MetricReport {
    let accuracy_mm = mean(to_gt) * MM_PER_M;
    let completeness_mm = mean(to_pred) * MM_PER_M;
    let count_below =
        |v: &[f64]| v.iter().filter(|&&d| d * MM_PER_M < eta_mm).count() as f64 / v.len() as f64;
    let precision = count_below(to_gt);
    let recall = count_below(to_pred);
    MetricReport {
        accuracy_mm,
        completeness_mm,
        chamfer_mm: (accuracy_mm + completeness_mm) / 2.0,
        precision,
        recall,
        f1: f1_from_precision_recall(precision, recall),
        eta_mm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(pts.iter().map(|p| Vec3::from(*p)).collect())
    }

    #[test]
    fn identical_clouds() {
        let q = cloud(&[[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [0.5, 0.5, 0.5]]);
        let r = evaluate(&q, &q, 10.0).unwrap();
        assert_eq!(
            (r.accuracy_mm, r.completeness_mm, r.chamfer_mm),
            (0.0, 0.0, 0.0)
        );
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn single_pair_distances() {
        let a = cloud(&[[0.0, 0.0, 0.0]]);
        let b = cloud(&[[0.0, 0.0, 0.003]]);
        assert!((accuracy(&a, &b).unwrap() - 3.0).abs() < 1e-12);
        let c = cloud(&[[0.0, 0.0, 0.004]]);
        assert!((chamfer(&a, &c).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(f1_at(&a, &b, 10.0).unwrap().f1, 1.0);
        assert_eq!(f1_at(&a, &b, 2.0).unwrap().f1, 0.0);
    }

    #[test]
    fn subset_completeness_and_symmetry() {
        let gt = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let q = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [5.0, 0.0, 0.0]]);
        assert_eq!(completeness(&q, &gt).unwrap(), 0.0);
        assert_eq!(completeness(&q, &gt).unwrap(), accuracy(&gt, &q).unwrap());
        let r = evaluate(&q, &gt, 10.0).unwrap();
        assert_eq!(r.chamfer_mm, (r.accuracy_mm + r.completeness_mm) / 2.0);
    }

    #[test]
    fn harmonic_mean() {
        assert!((f1_from_precision_recall(1.0, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_from_precision_recall(0.0, 0.0), 0.0);
    }

    #[test]
    fn empty_clouds_are_undefined() {
        let a = cloud(&[[0.0, 0.0, 0.0]]);
        let e = PointCloud::default();
        assert!(matches!(accuracy(&e, &a), Err(Error::UndefinedMetric(_))));
        assert!(matches!(
            evaluate(&a, &e, 1.0),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
