//! Scene geometry: triangle meshes, loaders and the ray-query BVH.

mod bvh;
mod io;
mod mesh;

pub use bvh::{Bvh, DEFAULT_LEAF_SIZE};
pub use io::{load_mesh, parse_mesh, MeshFormat};
pub use mesh::{Aabb, LoadReport, TriangleMesh};
