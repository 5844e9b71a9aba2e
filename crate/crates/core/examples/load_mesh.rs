//! Load a mesh (OBJ, PLY or STL) or fall back to a built-in scene, build a BVH
//! and fire a few rays at it.
//!
//!     cargo run --example load_mesh -- path/to/scene.obj
//!     cargo run --example load_mesh -- harbour

use camnet::geometry::{load_mesh, Bvh, MeshFormat};
use camnet::scenes::builtin_mesh;
use camnet::{Point3, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "office".into());
    let mesh = match builtin_mesh(&arg) {
        Some(m) => m,
        None => {
            let path = std::path::Path::new(&arg);
            let format = MeshFormat::from_extension(path)
                .ok_or(format!("not a built-in scene or known mesh extension: {arg}"))?;
            let (mesh, report) = load_mesh(path, format)?;
            println!("loaded {arg}: {report:?}");
            mesh
        }
    };
    let b = mesh.bounds();
    println!("{} vertices, {} triangles", mesh.vertices().len(), mesh.triangle_count());
    println!("bounds {:?} .. {:?}, diagonal {:.2} m", b.min, b.max, b.diagonal());

    let t = std::time::Instant::now();
    let bvh = Bvh::build(&mesh);
    println!("bvh: {} nodes in {:.1} ms", bvh.node_count(), t.elapsed().as_secs_f64() * 1e3);

    // Straight down from above the scene center, then sideways through it.
    let top = Point3::new(b.center().x, b.center().y, b.max.z + 5.0);
    match bvh.ray_intersect(&top, &-Vector3::z(), f64::INFINITY) {
        Some(t) => println!("downward ray hits at z = {:.3}", top.z - t),
        None => println!("downward ray misses"),
    }
    let side = Point3::new(b.min.x - 1.0, b.center().y, b.center().z);
    println!("sideways ray: {:?}", bvh.ray_intersect(&side, &Vector3::x(), f64::INFINITY));
    Ok(())
}
