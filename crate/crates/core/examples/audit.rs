// Dense coverage audit of a camera set on a fine grid, streamed under a memory budget.

use camnet::camera::Pose;
use camnet::discretize::WORLD_UP;
use camnet::evaluation::{dense_coverage_audit, AuditOptions};
use camnet::scenes::office;
use camnet::Point3;

fn main() -> camnet::Result<()> {
    let o = office();
    let cameras: Vec<_> = [(-15.0, -15.0), (15.0, -15.0), (15.0, 15.0), (-15.0, 15.0), (0.0, 0.0)]
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let eye = Point3::new(x, y, o.ceiling_height - 0.1);
            let pose = Pose::look_at(eye, Point3::new(x * 0.5, y * 0.5, 0.0), WORLD_UP).unwrap();
            camnet::camera::Viewpoint::new(i, o.spec, pose)
        })
        .collect();

    for (resolution, budget_mb) in [(0.25, 512), (0.1, 64)] {
        let options = AuditOptions { region: Some(o.interior), memory_budget: budget_mb << 20, bias: None };
        let t = std::time::Instant::now();
        let report = dense_coverage_audit(&o.mesh, &cameras, resolution, &options)?;
        println!(
            "{resolution} m grid {:?}: {} points, {:.2}% covered, histogram {:?}, working set {:.1} MiB of {budget_mb}, {:.2} s",
            report.grid.resolution,
            report.total,
            100.0 * report.fraction,
            report.histogram,
            report.memory_estimate as f64 / 1048576.0,
            t.elapsed().as_secs_f64()
        );
        let first = report.uncovered_points().next();
        if let Some(p) = first {
            println!("  first uncovered point {p:.2?}");
        }
    }
    Ok(())
}
