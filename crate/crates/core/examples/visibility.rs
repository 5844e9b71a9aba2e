//! Depth rendering, the z-buffer point test against the ray-cast oracle, and the
//! binary visibility-matrix cache.

use camnet::camera::{CameraSpec, Viewpoint};
use camnet::discretize::{sample_segment_viewpoints, voxelize_box};
use camnet::geometry::Bvh;
use camnet::scenes::harbour;
use camnet::visibility::{
    build_visibility_matrix, default_depth_bias, render_depth, visible_points_raycast, visible_points_zbuffer,
    VisibilityMatrix, VisibilityMethod,
};
use std::time::Instant;

fn main() -> camnet::Result<()> {
    let h = harbour(10_000);
    let points = voxelize_box(&h.roi)?;
    let candidates = sample_segment_viewpoints(&h.beams, h.positions_per_beam, &h.orientations, h.spec)?;
    let bias = default_depth_bias(&h.mesh.bounds(), &h.spec);
    println!("{} points, {} candidates, depth bias {bias:.3} m", points.len(), candidates.len());

    // The candidate that sees the most points.
    let coarse = build_visibility_matrix(&h.mesh, &candidates, &points, VisibilityMethod::Zbuffer, bias);
    let best = (0..coarse.m_cameras()).max_by_key(|&v| (coarse.column(v).count_ones(), std::cmp::Reverse(v))).unwrap();
    let cam = &candidates.viewpoints()[best];
    let depth = render_depth(&h.mesh, cam);
    println!("camera {best} depth buffer: {} of {} pixels hit geometry", depth.covered_pixels(), depth.depths().len());

    // Silhouette quantization shrinks with resolution.
    let bvh = Bvh::build(&h.mesh);
    let r = visible_points_raycast(&bvh, cam, &points);
    for (w, hgt) in [(160, 100), (640, 400), (1280, 800)] {
        let spec = CameraSpec::new(cam.spec.perspective_angle, (w, hgt), cam.spec.min_range, cam.spec.max_range)?;
        let vp = Viewpoint::new(cam.id, spec, cam.pose);
        let bias = default_depth_bias(&h.mesh.bounds(), &spec);
        let z = visible_points_zbuffer(&render_depth(&h.mesh, &vp), &vp, &points, bias);
        println!(
            "{w}x{hgt}: z-buffer sees {}, ray casting sees {}, disagree on {} ({:.3}%)",
            z.count_ones(),
            r.count_ones(),
            z.hamming(&r),
            100.0 * z.hamming(&r) as f64 / points.len() as f64
        );
    }

    for method in [VisibilityMethod::Zbuffer, VisibilityMethod::Raycast] {
        let t = Instant::now();
        let m = build_visibility_matrix(&h.mesh, &candidates, &points, method, bias);
        println!("{method:?} matrix {}x{} in {:.2} s", m.n_points(), m.m_cameras(), t.elapsed().as_secs_f64());
        if method == VisibilityMethod::Zbuffer {
            let mut bytes = Vec::new();
            m.write_binary(&mut bytes)?;
            let back = VisibilityMatrix::read_binary(bytes.as_slice())?;
            println!("cache round trip: {} bytes, equal {}", bytes.len(), back == m);
            let counts = m.f_counts(&[0, 100, 200, 300])?;
            println!("4 cameras cover {} points", counts.covered());
        }
    }
    Ok(())
}
