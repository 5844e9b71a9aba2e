// Camera model: project world points to pixels and list the frustum corners.

use camnet::camera::{frustum_corners, project_point, CameraSpec, Pose, Viewpoint};
use camnet::discretize::WORLD_UP;
use camnet::Point3;

fn main() -> camnet::Result<()> {
    // 70° horizontal field of view, 640x400, 0.5 to 60 m.
    let spec = CameraSpec::new(70.0, (640, 400), 0.5, 60.0)?;
    let pose = Pose::look_at(Point3::new(0.0, -10.0, 5.0), Point3::new(0.0, 0.0, 0.0), WORLD_UP)?;
    let cam = Viewpoint::new(0, spec, pose);
    println!("focal {:.1} px, vertical fov {:.1}°", spec.focal_px(), spec.vertical_fov_degrees());
    println!("quaternion xyzw {:?}", pose.quaternion_xyzw());

    for p in [
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(3.0, 0.0, 0.0),
        Point3::new(0.0, 0.0, 4.0),
        Point3::new(0.0, -20.0, 0.0), // behind the camera
        Point3::new(0.0, 200.0, 0.0), // beyond max range
    ] {
        match project_point(&cam, &p) {
            Some(q) => println!("{p:?} -> ({:.1}, {:.1}) at depth {:.2}", q.u, q.v, q.z),
            None => println!("{p:?} -> outside the frustum"),
        }
    }

    let c = frustum_corners(&cam);
    for (name, i) in [("near top-left", 0), ("far top-left", 4), ("far bottom-right", 6)] {
        println!("{name}: {:.2?}", c[i]);
    }
    Ok(())
}
