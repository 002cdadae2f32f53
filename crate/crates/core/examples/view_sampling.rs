//! Query cameras for an input view: box fit, sampling radius, the golden
//! spiral and the appended input camera.
//!
//! ```text
//! cargo run --release --example view_sampling
//! ```

use rayfuse::bvh::Bvh;
use rayfuse::geometry::unproject_depth;
use rayfuse::predictor::InputView;
use rayfuse::synthetic::{generate_scene, SceneGenConfig};
use rayfuse::view_sampling::{fit_bbox, sample_query_views, sampling_radius, ViewSamplingConfig};

fn main() -> rayfuse::Result<()> {
    let s = generate_scene(1, &SceneGenConfig::default())?;
    let input = InputView::render(&Bvh::build(&s.scene)?, s.intrinsics, s.pose)?;
    let world = rayfuse::geometry::transform_point_map(
        &unproject_depth(&input.depth, &input.intrinsics)?,
        &input.pose.inverse(),
    );
    let bbox = fit_bbox(&world, &input.mask)?;
    let cam = input.pose.camera_center();

    for (name, cfg) in [
        ("default", ViewSamplingConfig::default()),
        ("octmae", ViewSamplingConfig::octmae()),
    ] {
        let r = sampling_radius(&bbox, &cam, &cfg);
        println!(
            "{name}: box radius {:.3} m, camera distance {:.3} m → sampling radius {r:.3} m",
            bbox.radius(),
            (cam - bbox.center()).norm()
        );
    }

    let queries = sample_query_views(&input, &ViewSamplingConfig::default())?;
    println!("\n idx  position (m)                 elevation");
    for q in &queries {
        let c = q.pose.camera_center() - bbox.center();
        let elevation = (c.z / c.norm()).asin().to_degrees();
        println!(
            "{:>4}  ({:>7.3}, {:>7.3}, {:>7.3})   {elevation:>6.1}°{}",
            q.index,
            c.x,
            c.y,
            c.z,
            if q.is_input { "  input camera" } else { "" }
        );
    }
    Ok(())
}
