//! Voxel grids, uniform point sampling and candidate camera generation.
//! Writes the ROI points to `points.bin` in the current directory when given
//! `--write`.

use camnet::discretize::{
    merge_point_sets, sample_area_viewpoints, sample_points_uniform, sample_segment_viewpoints, voxelize_box, Polygon2,
    RoiBox, SampleRegion,
};
use camnet::scenes::{harbour, office};
use camnet::{Point3, UnitQuaternion, Vector3};

fn main() -> camnet::Result<()> {
    let roi = RoiBox::with_target_count(
        Point3::new(0.0, 0.0, 2.0),
        Vector3::new(24.0, 11.0, 2.0),
        UnitQuaternion::from_euler_angles(0.0, 0.0, 0.1),
        10_000,
    )?;
    let grid = voxelize_box(&roi)?;
    println!("roi {:?} -> {} points, spacing {:.3?}", roi.resolution, grid.len(), roi.spacing());

    let h = harbour(5000);
    let extra = sample_points_uniform(&SampleRegion::Aabb(h.aisle), 2000, 42)?;
    let all = merge_point_sets(&[voxelize_box(&h.roi)?, extra]);
    println!("harbour roi + aisle samples: {} points", all.len());

    let beams = sample_segment_viewpoints(&h.beams, h.positions_per_beam, &h.orientations, h.spec)?;
    println!(
        "harbour beams: {} segments x {} positions x {} orientations = {} candidates",
        h.beams.len(),
        h.positions_per_beam,
        h.orientations.len(),
        beams.len()
    );

    let o = office();
    let ceiling = sample_area_viewpoints(&o.ceiling, o.ceiling_height, 300, o.spec, 5)?;
    println!("office ceiling ({:.0} m2): {} candidates", o.ceiling.area(), ceiling.len());
    let first = &ceiling.viewpoints()[0];
    println!("first: {:.2?} looking {:.2?}", first.pose.position, first.pose.forward());

    let l = Polygon2::new(vec![[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [1.0, 1.0], [1.0, 3.0], [0.0, 3.0]])?;
    println!("L-shaped room area {}", l.area());

    if std::env::args().any(|a| a == "--write") {
        let mut f = std::io::BufWriter::new(std::fs::File::create("points.bin")?);
        grid.write_binary(&mut f, false)?;
        println!("wrote points.bin");
    }
    Ok(())
}
