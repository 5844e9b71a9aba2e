//! A live design session: move, add and remove cameras and watch coverage
//! update incrementally. Only the changed camera's column is recomputed.

use std::sync::Arc;

use camnet::camera::Pose;
use camnet::discretize::{voxelize_box, WORLD_UP};
use camnet::scenes::harbour;
use camnet::session::{decode_frame, SessionState, TransferMode};
use camnet::visibility::VisibilityMethod;
use camnet::Point3;

fn main() -> camnet::Result<()> {
    let h = harbour(20_000);
    let points = Arc::new(voxelize_box(&h.roi)?);
    let look = |x: f64, y: f64| Pose::look_at(Point3::new(x, y, 12.0), Point3::new(x * 0.3, 0.0, 0.0), WORLD_UP);
    let mut s = SessionState::new(
        Arc::new(h.mesh),
        points,
        VisibilityMethod::Zbuffer,
        None,
        &[(h.spec, look(-15.0, -13.0)?), (h.spec, look(15.0, 13.0)?)],
    )?;
    println!("start: coverage {:.3}", s.coverage());

    for step in 0..10 {
        let x = -15.0 + 3.0 * step as f64;
        let u = s.move_camera(0, look(x, -13.0)?)?;
        println!(
            "rev {:>2}: camera 0 to x={x:>5.1}, {:>5} points changed, coverage {:.3}, {:.1} ms",
            u.revision, u.changed_points, u.coverage, u.recompute_ms
        );
    }
    let (id, u) = s.add_camera(h.spec, look(0.0, 13.0)?)?;
    println!("added camera {id}: coverage {:.3}", u.coverage);
    s.remove_camera(1)?;
    println!("removed camera 1: coverage {:.3}, cameras {:?}", s.coverage(), s.camera_ids());
    println!("cache coherent: {}", *s.counts() == s.recompute_from_scratch());

    let counts = s.get_volume(TransferMode::Quality).encode();
    let mask = s.get_volume(TransferMode::UncoveredOnly).encode();
    println!("frames: counts {} bytes, uncovered mask {} bytes", counts.len(), mask.len());
    println!("decoded revision {}", decode_frame(&mask)?.revision);
    println!("latency {:?}", s.latency_stats().summary());
    println!("{}", serde_json::to_string_pretty(&s.export_solution()).unwrap());
    Ok(())
}
