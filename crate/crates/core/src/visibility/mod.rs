//! Point visibility per camera and the visibility matrix behind `f(e, U)`.
//!
//! The production path rasterizes a depth buffer per camera and compares each
//! projected point against it. A BVH ray caster answers the same question
//! exactly and serves as the cross-check.

mod bits;
mod raster;

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bits::BitVec;
pub(crate) use raster::render_depth_with;
pub use raster::{render_depth, DepthBuffer};

use crate::camera::{CameraSpec, CameraTransform, Viewpoint};
use crate::discretize::{CandidateSet, EnvironmentPoints};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Bvh, TriangleMesh};
use crate::Point3;

/// Distance short of the target point at which the ray caster stops looking for occluders.
pub const RAY_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityMethod {
    #[default]
    Zbuffer,
    Raycast,
}

impl std::str::FromStr for VisibilityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zbuffer" => Ok(VisibilityMethod::Zbuffer),
            "raycast" => Ok(VisibilityMethod::Raycast),
            other => Err(Error::invalid(format!("unknown visibility method `{other}`"))),
        }
    }
}

/// 1.5 scene diagonals per image-resolution unit: the depth spread one pixel can
/// hide at the scene's scale.
pub fn default_depth_bias(scene_bounds: &Aabb, spec: &CameraSpec) -> f64 {
    1.5 * scene_bounds.diagonal() / spec.width().max(spec.height()) as f64
}

pub(crate) fn zbuffer_test(depth: &DepthBuffer, cam: &CameraTransform, points: &[Point3], bias: f64) -> BitVec {
    let mut out = BitVec::zeros(points.len());
    for (i, p) in points.iter().enumerate() {
        if let Some(proj) = cam.project(p) {
            let d = depth.lookup(proj.u, proj.v) as f64;
            if proj.z <= d + bias {
                out.set(i);
            }
        }
    }
    out
}

/// Point `e` is visible when it projects into the frustum and its depth does not
/// exceed the buffered depth at its pixel by more than `bias`.
pub fn visible_points_zbuffer(
    depth: &DepthBuffer,
    viewpoint: &Viewpoint,
    points: &EnvironmentPoints,
    bias: f64,
) -> BitVec {
    debug_assert!(bias >= 0.0);
    zbuffer_test(depth, &CameraTransform::of(viewpoint), points.points(), bias)
}

pub(crate) fn raycast_test(bvh: &Bvh, cam: &CameraTransform, points: &[Point3]) -> BitVec {
    let origin = cam.position();
    let mut out = BitVec::zeros(points.len());
    for (i, p) in points.iter().enumerate() {
        if cam.project(p).is_none() {
            continue;
        }
        let d = p - origin;
        let dist = d.norm();
        if dist <= RAY_TOLERANCE || !bvh.occluded(&origin, &(d / dist), dist - RAY_TOLERANCE) {
            out.set(i);
        }
    }
    out
}

pub fn visible_points_raycast(bvh: &Bvh, viewpoint: &Viewpoint, points: &EnvironmentPoints) -> BitVec {
    raycast_test(bvh, &CameraTransform::of(viewpoint), points.points())
}

/// One camera's visibility column by the chosen method. The BVH is only
/// consulted for ray casting.
pub fn compute_column(
    mesh: &TriangleMesh,
    bvh: Option<&Bvh>,
    viewpoint: &Viewpoint,
    points: &[Point3],
    method: VisibilityMethod,
    bias: f64,
) -> BitVec {
    let cam = CameraTransform::of(viewpoint);
    match method {
        VisibilityMethod::Zbuffer => {
            let depth = render_depth_with(mesh, &cam);
            zbuffer_test(&depth, &cam, points, bias)
        }
        VisibilityMethod::Raycast => {
            let owned;
            let bvh = match bvh {
                Some(b) => b,
                None => {
                    owned = Bvh::build(mesh);
                    &owned
                }
            };
            raycast_test(bvh, &cam, points)
        }
    }
}

/// Per-point view counts `f(e, U)` for one camera subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisCounts(pub Vec<u32>);

impl VisCounts {
    pub fn zeros(n: usize) -> Self {
        VisCounts(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn add_column(&mut self, column: &BitVec) {
        for e in column.iter_ones() {
            self.0[e] += 1;
        }
    }

    pub fn sub_column(&mut self, column: &BitVec) {
        for e in column.iter_ones() {
            self.0[e] -= 1;
        }
    }

    pub fn covered(&self) -> usize {
        self.0.iter().filter(|&&c| c > 0).count()
    }
}

/// `n_points × m_cameras` boolean matrix, stored column-wise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMatrix {
    n_points: usize,
    columns: Vec<BitVec>,
}

const MATRIX_MAGIC: &[u8; 4] = b"CNVM";
const ROW_MAJOR: u8 = 0;

impl VisibilityMatrix {
    pub fn from_columns(n_points: usize, columns: Vec<BitVec>) -> Result<Self> {
        if let Some((v, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n_points) {
            return Err(Error::Dimension(format!("column {v} has {} rows, expected {n_points}", c.len())));
        }
        Ok(VisibilityMatrix { n_points, columns })
    }

    /// Row-major booleans, `rows[e][v]`.
    pub fn from_rows(rows: &[Vec<bool>], m: usize) -> Result<Self> {
        let mut columns = vec![BitVec::zeros(rows.len()); m];
        for (e, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!("row {e} has {} entries, expected {m}", row.len())));
            }
            for (v, &b) in row.iter().enumerate() {
                if b {
                    columns[v].set(e);
                }
            }
        }
        Ok(VisibilityMatrix { n_points: rows.len(), columns })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn m_cameras(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn get(&self, e: usize, v: usize) -> bool {
        self.columns[v].get(e)
    }

    pub fn column(&self, v: usize) -> &BitVec {
        &self.columns[v]
    }

    pub fn columns(&self) -> &[BitVec] {
        &self.columns
    }

    pub fn replace_column(&mut self, v: usize, column: BitVec) -> Result<()> {
        if v >= self.columns.len() {
            return Err(Error::IdOutOfRange { id: v, m: self.columns.len() });
        }
        if column.len() != self.n_points {
            return Err(Error::Dimension(format!("column has {} rows, expected {}", column.len(), self.n_points)));
        }
        self.columns[v] = column;
        Ok(())
    }

    pub(crate) fn check_ids(&self, ids: &[usize]) -> Result<()> {
        let m = self.m_cameras();
        let mut seen = vec![false; m];
        for &id in ids {
            if id >= m {
                return Err(Error::IdOutOfRange { id, m });
            }
            if std::mem::replace(&mut seen[id], true) {
                return Err(Error::invalid(format!("camera id {id} appears twice")));
            }
        }
        Ok(())
    }

    /// `counts[e] = |{v ∈ U : bit(e, v)}|`.
    pub fn f_counts(&self, ids: &[usize]) -> Result<VisCounts> {
        self.check_ids(ids)?;
        let mut counts = VisCounts::zeros(self.n_points);
        for &v in ids {
            counts.add_column(&self.columns[v]);
        }
        Ok(counts)
    }

    /// Header `CNVM`, `n: u64`, `m: u64`, order byte (0 = row-major), then bit
    /// `e·m + v` packed LSB-first into bytes.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.m_cameras();
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&(self.n_points as u64).to_le_bytes())?;
        w.write_all(&(m as u64).to_le_bytes())?;
        w.write_all(&[ROW_MAJOR])?;
        let total = self.n_points * m;
        let mut bytes = vec![0u8; total.div_ceil(8)];
        for (v, col) in self.columns.iter().enumerate() {
            for e in col.iter_ones() {
                let bit = e * m + v;
                bytes[bit >> 3] |= 1 << (bit & 7);
            }
        }
        w.write_all(&bytes)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            format: "visibility matrix",
            location: "header".into(),
            message: msg.to_string(),
        };
        let mut head = [0u8; 21];
        r.read_exact(&mut head)?;
        if &head[..4] != MATRIX_MAGIC {
            return Err(bad("bad magic"));
        }
        let n = u64::from_le_bytes(head[4..12].try_into().unwrap()) as usize;
        let m = u64::from_le_bytes(head[12..20].try_into().unwrap()) as usize;
        if head[20] != ROW_MAJOR {
            return Err(bad("unsupported bit order"));
        }
        let mut bytes = vec![0u8; (n * m).div_ceil(8)];
        r.read_exact(&mut bytes)?;
        let mut columns = vec![BitVec::zeros(n); m];
        for e in 0..n {
            for (v, col) in columns.iter_mut().enumerate() {
                let bit = e * m + v;
                if bytes[bit >> 3] >> (bit & 7) & 1 == 1 {
                    col.set(e);
                }
            }
        }
        Ok(VisibilityMatrix { n_points: n, columns })
    }
}

/// Columns are computed in parallel, one per candidate.
pub fn build_visibility_matrix(
    mesh: &TriangleMesh,
    candidates: &CandidateSet,
    points: &EnvironmentPoints,
    method: VisibilityMethod,
    bias: f64,
) -> VisibilityMatrix {
    let bvh = match method {
        VisibilityMethod::Raycast => Some(Bvh::build(mesh)),
        VisibilityMethod::Zbuffer => None,
    };
    let columns = candidates
        .viewpoints()
        .par_iter()
        .map(|vp| compute_column(mesh, bvh.as_ref(), vp, points.points(), method, bias))
        .collect();
    VisibilityMatrix { n_points: points.len(), columns }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{CameraSpec, Pose};
    use crate::{UnitQuaternion, Vector3};
    use rand::Rng;

    fn wall_scene() -> (TriangleMesh, Viewpoint) {
        let z = -3.0;
        let h = 50.0;
        let (mesh, _) = TriangleMesh::new(
            vec![Point3::new(-h, -h, z), Point3::new(h, -h, z), Point3::new(h, h, z), Point3::new(-h, h, z)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let spec = CameraSpec::new(90.0, (64, 48), 0.1, 20.0).unwrap();
        (mesh, Viewpoint::new(0, spec, Pose::new(Point3::origin(), UnitQuaternion::identity())))
    }

    #[test]
    fn zbuffer_front_behind_and_on_wall() {
        let (mesh, vp) = wall_scene();
        let depth = render_depth(&mesh, &vp);
        let pts = EnvironmentPoints::new(vec![
            Point3::new(0.1, 0.2, -2.0),
            Point3::new(0.1, 0.2, -4.0),
            Point3::new(0.1, 0.2, -3.0),
        ]);
        let vis = visible_points_zbuffer(&depth, &vp, &pts, 1e-3);
        assert_eq!(vis.to_bools(), vec![true, false, true]);
    }

    #[test]
    fn raycast_basic_cases() {
        let (mesh, vp) = wall_scene();
        let bvh = Bvh::build(&mesh);
        let pts = EnvironmentPoints::new(vec![
            Point3::new(0.0, 0.0, -1.0),
            Point3::new(0.0, 0.0, -5.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(10.0, 0.0, -1.0),
        ]);
        let vis = visible_points_raycast(&bvh, &vp, &pts);
        assert_eq!(vis.to_bools(), vec![true, false, false, false]);
    }

    #[test]
    fn points_outside_range_are_never_visible() {
        let (mesh, vp) = wall_scene();
        let spec = CameraSpec::new(90.0, (64, 48), 1.5, 2.5).unwrap();
        let vp = Viewpoint { spec, ..vp };
        let depth = render_depth(&mesh, &vp);
        let pts = EnvironmentPoints::new(vec![
            Point3::new(0.0, 0.0, -1.0),
            Point3::new(0.0, 0.0, -2.0),
            Point3::new(0.0, 0.0, -2.9),
        ]);
        let z = visible_points_zbuffer(&depth, &vp, &pts, 0.5);
        let r = visible_points_raycast(&Bvh::build(&mesh), &vp, &pts);
        assert_eq!(z.to_bools(), vec![false, true, false]);
        assert_eq!(z, r);
    }

    #[test]
    fn border_point_uses_last_pixel() {
        let (mesh, vp) = wall_scene();
        let depth = render_depth(&mesh, &vp);
        // x/z = 1 lands exactly on u = width.
        let pts = EnvironmentPoints::new(vec![Point3::new(2.0, 0.0, -2.0)]);
        assert!(visible_points_zbuffer(&depth, &vp, &pts, 1e-3).get(0));
    }

    #[test]
    fn f_counts_matches_recount() {
        let mut rng = crate::discretize::rng(9);
        let rows: Vec<Vec<bool>> = (0..20).map(|_| (0..6).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let m = VisibilityMatrix::from_rows(&rows, 6).unwrap();
        let counts = m.f_counts(&[1, 3]).unwrap();
        for (e, row) in rows.iter().enumerate() {
            assert_eq!(counts.0[e], row[1] as u32 + row[3] as u32);
        }
        assert_eq!(m.f_counts(&[]).unwrap(), VisCounts::zeros(20));
        assert!(matches!(m.f_counts(&[6]), Err(Error::IdOutOfRange { id: 6, m: 6 })));
        assert!(m.f_counts(&[1, 1]).is_err());
    }

    #[test]
    fn matrix_binary_roundtrip() {
        let mut rng = crate::discretize::rng(1);
        let rows: Vec<Vec<bool>> = (0..37).map(|_| (0..5).map(|_| rng.gen_bool(0.3)).collect()).collect();
        let m = VisibilityMatrix::from_rows(&rows, 5).unwrap();
        let mut buf = Vec::new();
        m.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 21 + (37 * 5usize).div_ceil(8));
        // Row-major: bit e*m + v.
        assert_eq!(buf[21] & 1 == 1, rows[0][0]);
        assert_eq!(VisibilityMatrix::read_binary(&buf[..]).unwrap(), m);
    }

    #[test]
    fn empty_candidate_set_gives_empty_matrix() {
        let (mesh, vp) = wall_scene();
        let cands = CandidateSet::explicit(vp.spec, std::iter::empty());
        let pts = EnvironmentPoints::new(vec![Point3::origin(); 4]);
        let m = build_visibility_matrix(&mesh, &cands, &pts, VisibilityMethod::Zbuffer, 0.01);
        assert_eq!(m.m_cameras(), 0);
        assert_eq!(m.f_counts(&[]).unwrap().0, vec![0; 4]);
    }

    #[test]
    fn default_bias_scales_with_scene() {
        let bb = Aabb::new(Point3::origin(), Point3::from(Vector3::new(30.0, 40.0, 0.0)));
        let spec = CameraSpec::new(90.0, (500, 250), 0.1, 10.0).unwrap();
        assert!((default_depth_bias(&bb, &spec) - 1.5 * 50.0 / 500.0).abs() < 1e-12);
    }
}
