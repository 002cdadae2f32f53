//! Input view → query cameras → predictions → fused cloud.

use rayon::prelude::*;

use crate::error::Error;
use crate::error::Result;
use crate::fusion::{fuse_view, FusionConfig};
use crate::metrics::PointCloud;
use crate::predictor::{InputView, Predictor, ViewPrediction};
use crate::view_sampling::{sample_query_views, QueryView, ViewSamplingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineConfig {
    pub sampling: ViewSamplingConfig,
    pub fusion: FusionConfig,
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub queries: Vec<QueryView>,
    pub predictions: Vec<ViewPrediction>,
    /// World-frame fused points.
    pub cloud: PointCloud,
    /// Points each prediction contributed, in prediction order.
    pub view_counts: Vec<usize>,
}

/// Predictions for every query, in query order.
pub fn predict_views(
    input: &InputView,
    queries: &[QueryView],
    predictor: &dyn Predictor,
) -> Result<Vec<ViewPrediction>> {
    queries
        .par_iter()
        .map(|q| predictor.predict(input, q))
        .collect()
}

pub fn complete(
    input: &InputView,
    predictor: &dyn Predictor,
    cfg: &PipelineConfig,
) -> Result<Completion> {
    cfg.fusion.validate()?;
    let queries = sample_query_views(input, &cfg.sampling)?;
    let predictions = predict_views(input, &queries, predictor)?;
    if predictions.is_empty() {
        return Err(Error::InvalidConfig("no query views".into()));
    }
    let parts = predictions
        .par_iter()
        .map(|p| fuse_view(p, input, &cfg.fusion))
        .collect::<Result<Vec<_>>>()?;
    let mut cloud = PointCloud::with_confidence(Vec::new(), Vec::new());
    let mut view_counts = Vec::with_capacity(parts.len());
    for part in parts {
        view_counts.push(part.as_ref().map_or(0, PointCloud::len));
        if let Some(part) = part {
            cloud.extend(part);
        }
    }
    Ok(Completion {
        queries,
        predictions,
        cloud,
        view_counts,
    })
}
