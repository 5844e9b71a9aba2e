//! Discretization of the observed region (environment points) and of the camera
//! configuration space (candidate viewpoints).
//!
//! All randomness goes through [`rng`], a ChaCha8 stream seeded from a `u64`, so
//! every sampler is a pure function of its inputs and seed on every platform.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{look_rotation, CameraSpec, Pose, Viewpoint};
use crate::error::{Error, Result};
use crate::geometry::Aabb;
use crate::{Point3, UnitQuaternion, Vector3};

/// World up axis used by the samplers that care about "up".
pub const WORLD_UP: Vector3 = Vector3::new(0.0, 0.0, 1.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Oriented box subdivided into `nx × ny × nz` voxels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiBox {
    pub center: Point3,
    pub half_extents: Vector3,
    pub orientation: UnitQuaternion,
    pub resolution: [usize; 3],
}

impl RoiBox {
    pub fn new(
        center: Point3,
        half_extents: Vector3,
        orientation: UnitQuaternion,
        resolution: [usize; 3],
    ) -> Result<Self> {
        let b = RoiBox { center, half_extents, orientation, resolution };
        b.validate()?;
        Ok(b)
    }

    pub fn axis_aligned(bounds: &Aabb, resolution: [usize; 3]) -> Result<Self> {
        Self::new(bounds.center(), 0.5 * bounds.extent(), UnitQuaternion::identity(), resolution)
    }

    /// Picks a near-cubic voxel size so the box holds about `target` points.
    pub fn with_target_count(
        center: Point3,
        half_extents: Vector3,
        orientation: UnitQuaternion,
        target: usize,
    ) -> Result<Self> {
        if target == 0 {
            return Err(Error::invalid("target point count must be at least 1"));
        }
        let full = 2.0 * half_extents;
        let volume = full.x * full.y * full.z;
        let mut side = (volume / target as f64).cbrt();
        let dims = |side: f64| [0, 1, 2].map(|i| ((full[i] / side).round() as usize).max(1));
        // Rounding each axis can drift from the target; nudge the side length a few times.
        for _ in 0..20 {
            let r = dims(side);
            let n = (r[0] * r[1] * r[2]) as f64;
            let ratio = n / target as f64;
            if (ratio - 1.0).abs() < 0.01 {
                break;
            }
            side *= ratio.cbrt();
        }
        Self::new(center, half_extents, orientation, dims(side))
    }

    /// Axis-aligned grid over `bounds` with voxels of roughly `spacing` meters.
    pub fn covering(bounds: &Aabb, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        let e = bounds.extent();
        let res = [0, 1, 2].map(|i| ((e[i] / spacing).round() as usize).max(1));
        let half = Vector3::new(e.x.max(spacing), e.y.max(spacing), e.z.max(spacing)) * 0.5;
        Self::new(bounds.center(), half, UnitQuaternion::identity(), res)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_extents.x > 0.0 && self.half_extents.y > 0.0 && self.half_extents.z > 0.0) {
            return Err(Error::invalid(format!("box half extents must be positive, got {:?}", self.half_extents)));
        }
        if self.resolution.contains(&0) {
            return Err(Error::invalid(format!(
                "box resolution must be at least 1 per axis, got {:?}",
                self.resolution
            )));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Center-to-center distance between adjacent voxels along each local axis.
    pub fn spacing(&self) -> Vector3 {
        Vector3::new(
            2.0 * self.half_extents.x / self.resolution[0] as f64,
            2.0 * self.half_extents.y / self.resolution[1] as f64,
            2.0 * self.half_extents.z / self.resolution[2] as f64,
        )
    }

    /// Center of voxel `(i, j, k)`.
    #[inline]
    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Point3 {
        let s = self.spacing();
        let local = Vector3::new(
            -self.half_extents.x + (i as f64 + 0.5) * s.x,
            -self.half_extents.y + (j as f64 + 0.5) * s.y,
            -self.half_extents.z + (k as f64 + 0.5) * s.z,
        );
        self.center + self.orientation * local
    }

    /// Linear index in x-fastest order.
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        let local = self.orientation.inverse() * (p - self.center);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i] * (1.0 + 1e-12))
    }

    pub fn bounds(&self) -> Aabb {
        let mut bb = Aabb::empty();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let local = self.half_extents.component_mul(&Vector3::new(sx, sy, sz));
                    bb.grow(&(self.center + self.orientation * local));
                }
            }
        }
        bb
    }
}

/// Links each point back to the voxel it was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLinkage {
    pub roi: RoiBox,
    pub voxel: Vec<u32>,
}

/// The finite set E: points with positive weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvironmentPoints {
    points: Vec<Point3>,
    weights: Vec<f64>,
    grid: Option<GridLinkage>,
}

impl EnvironmentPoints {
    pub fn new(points: Vec<Point3>) -> Self {
        let weights = vec![1.0; points.len()];
        EnvironmentPoints { points, weights, grid: None }
    }

    pub fn with_weights(points: Vec<Point3>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != points.len() {
            return Err(Error::Dimension(format!("{} weights for {} points", weights.len(), points.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid(format!("point weights must be positive and finite, got {w}")));
        }
        Ok(EnvironmentPoints { points, weights, grid: None })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> Option<&GridLinkage> {
        self.grid.as_ref()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Little-endian binary export: `count: u64`, `has_weights: u8`, then `count`
    /// float32 xyz triples, then `count` float32 weights when flagged.
    pub fn write_binary<W: Write>(&self, mut w: W, include_weights: bool) -> std::io::Result<()> {
        write_point_file(
            &mut w,
            self.points.iter().map(|p| [p.x as f32, p.y as f32, p.z as f32]),
            self.len(),
            if include_weights { Some(&self.weights) } else { None },
        )
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 9];
        r.read_exact(&mut head)?;
        let count = u64::from_le_bytes(head[..8].try_into().unwrap()) as usize;
        let has_weights = match head[8] {
            0 => false,
            1 => true,
            f => {
                return Err(Error::Parse {
                    format: "points",
                    location: "header".into(),
                    message: format!("bad weight flag {f}"),
                })
            }
        };
        let mut buf = vec![0u8; count * 12];
        r.read_exact(&mut buf)?;
        let points = buf
            .chunks_exact(12)
            .map(|c| {
                let f = |k: usize| f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().unwrap()) as f64;
                Point3::new(f(0), f(1), f(2))
            })
            .collect();
        if has_weights {
            let mut wbuf = vec![0u8; count * 4];
            r.read_exact(&mut wbuf)?;
            let weights = wbuf.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
            Self::with_weights(points, weights)
        } else {
            Ok(Self::new(points))
        }
    }
}

/// Writes the binary point format from any stream of positions.
pub fn write_point_file<W: Write>(
    w: &mut W,
    points: impl Iterator<Item = [f32; 3]>,
    count: usize,
    weights: Option<&[f64]>,
) -> std::io::Result<()> {
    w.write_all(&(count as u64).to_le_bytes())?;
    w.write_all(&[weights.is_some() as u8])?;
    let mut written = 0;
    for p in points {
        for c in p {
            w.write_all(&c.to_le_bytes())?;
        }
        written += 1;
    }
    debug_assert_eq!(written, count);
    if let Some(ws) = weights {
        for &x in ws {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SegmentGrid,
    AreaRandom,
    Explicit,
}

/// The finite set V; viewpoint ids are `0..m` in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    viewpoints: Vec<Viewpoint>,
    provenance: Provenance,
}

impl CandidateSet {
    /// Re-numbers ids to match positions.
    pub fn explicit(spec: CameraSpec, poses: impl IntoIterator<Item = Pose>) -> Self {
        let viewpoints = poses.into_iter().enumerate().map(|(id, pose)| Viewpoint::new(id, spec, pose)).collect();
        CandidateSet { viewpoints, provenance: Provenance::Explicit }
    }

    pub fn from_viewpoints(viewpoints: Vec<Viewpoint>, provenance: Provenance) -> Self {
        let viewpoints = viewpoints.into_iter().enumerate().map(|(id, v)| Viewpoint { id, ..v }).collect();
        CandidateSet { viewpoints, provenance }
    }

    pub fn len(&self) -> usize {
        self.viewpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewpoints.is_empty()
    }

    pub fn viewpoints(&self) -> &[Viewpoint] {
        &self.viewpoints
    }

    pub fn get(&self, id: usize) -> Option<&Viewpoint> {
        self.viewpoints.get(id)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

pub fn voxelize_box(roi: &RoiBox) -> Result<EnvironmentPoints> {
    roi.validate()?;
    let [nx, ny, nz] = roi.resolution;
    let mut points = Vec::with_capacity(roi.point_count());
    let mut voxel = Vec::with_capacity(roi.point_count());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                points.push(roi.voxel_center(i, j, k));
                voxel.push(roi.linear_index(i, j, k) as u32);
            }
        }
    }
    let weights = vec![1.0; points.len()];
    Ok(EnvironmentPoints { points, weights, grid: Some(GridLinkage { roi: *roi, voxel }) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point3,
    pub end: Point3,
}

impl Segment {
    pub fn new(start: Point3, end: Point3) -> Self {
        Segment { start, end }
    }

    pub fn lerp(&self, t: f64) -> Point3 {
        self.start + (self.end - self.start) * t
    }
}

/// Linearly spaced positions (endpoints included) on each segment crossed with
/// every orientation; ids in (segment, position, orientation) order.
pub fn sample_segment_viewpoints(
    segments: &[Segment],
    positions_per_segment: usize,
    orientations: &[UnitQuaternion],
    spec: CameraSpec,
) -> Result<CandidateSet> {
    if positions_per_segment < 2 {
        return Err(Error::invalid("positions_per_segment must be at least 2"));
    }
    if orientations.is_empty() {
        return Err(Error::invalid("at least one orientation is required"));
    }
    let mut viewpoints = Vec::with_capacity(segments.len() * positions_per_segment * orientations.len());
    for seg in segments {
        for p in 0..positions_per_segment {
            let t = p as f64 / (positions_per_segment - 1) as f64;
            let position = seg.lerp(t);
            for q in orientations {
                viewpoints.push(Viewpoint::new(viewpoints.len(), spec, Pose::new(position, *q)));
            }
        }
    }
    Ok(CandidateSet { viewpoints, provenance: Provenance::SegmentGrid })
}

/// Simple polygon in the horizontal plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon2 {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let p = Polygon2 { vertices };
        if p.vertices.len() < 3 || !(p.area() > 1e-12) {
            return Err(Error::invalid("polygon needs at least 3 vertices and non-zero area"));
        }
        Ok(p)
    }

    pub fn rectangle(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        Self::new(vec![min, [max[0], min[1]], max, [min[0], max[1]]])
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            s += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * s.abs()
    }

    /// Even-odd rule.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let [xi, yi] = self.vertices[i];
            let [xj, yj] = self.vertices[j];
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let (lo, hi) = self.bbox();
        loop {
            let x = lo[0] + (hi[0] - lo[0]) * rng.gen::<f64>();
            let y = lo[1] + (hi[1] - lo[1]) * rng.gen::<f64>();
            if self.contains(x, y) {
                return [x, y];
            }
        }
    }
}

/// Uniform direction among those with a non-positive vertical component, by
/// rejection from the unit ball.
pub fn sample_downward_direction(rng: &mut ChaCha8Rng) -> Vector3 {
    loop {
        let v = Vector3::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
        let n2 = v.norm_squared();
        if n2 > 1e-12 && n2 <= 1.0 && v.dot(&WORLD_UP) <= 0.0 {
            return v / n2.sqrt();
        }
    }
}

pub fn sample_area_viewpoints(
    region: &Polygon2,
    height: f64,
    count: usize,
    spec: CameraSpec,
    rng_seed: u64,
) -> Result<CandidateSet> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let region = Polygon2::new(region.vertices.clone())?;
    let mut rng = rng(rng_seed);
    let mut viewpoints = Vec::with_capacity(count);
    for id in 0..count {
        let [x, y] = region.sample(&mut rng);
        let dir = sample_downward_direction(&mut rng);
        let orientation = look_rotation(&dir, &WORLD_UP).expect("direction is a unit vector");
        viewpoints.push(Viewpoint::new(id, spec, Pose::new(Point3::new(x, y, height), orientation)));
    }
    Ok(CandidateSet { viewpoints, provenance: Provenance::AreaRandom })
}

/// Region for uniform point sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleRegion {
    Aabb(Aabb),
    Box(RoiBox),
    /// Union of disjoint boxes, each chosen with probability proportional to volume.
    Boxes(Vec<Aabb>),
}

pub fn sample_points_uniform(region: &SampleRegion, count: usize, rng_seed: u64) -> Result<EnvironmentPoints> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let mut rng = rng(rng_seed);
    let unit = |rng: &mut ChaCha8Rng| Vector3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
    let in_aabb = |bb: &Aabb, rng: &mut ChaCha8Rng| bb.min + bb.extent().component_mul(&unit(rng));
    let points: Vec<Point3> = match region {
        SampleRegion::Aabb(bb) => {
            if bb.is_empty() {
                return Err(Error::invalid("sampling region is empty"));
            }
            (0..count).map(|_| in_aabb(bb, &mut rng)).collect()
        }
        SampleRegion::Box(b) => {
            b.validate()?;
            (0..count)
                .map(|_| {
                    let u = unit(&mut rng);
                    let local = (2.0 * u - Vector3::repeat(1.0)).component_mul(&b.half_extents);
                    b.center + b.orientation * local
                })
                .collect()
        }
        SampleRegion::Boxes(boxes) => {
            let volumes: Vec<f64> = boxes.iter().map(Aabb::volume).collect();
            let total: f64 = volumes.iter().sum();
            if boxes.is_empty() || !(total > 0.0) {
                return Err(Error::invalid("sampling boxes have no volume"));
            }
            (0..count)
                .map(|_| {
                    let mut pick = rng.gen::<f64>() * total;
                    let mut idx = boxes.len() - 1;
                    for (i, v) in volumes.iter().enumerate() {
                        if pick < *v {
                            idx = i;
                            break;
                        }
                        pick -= v;
                    }
                    in_aabb(&boxes[idx], &mut rng)
                })
                .collect()
        }
    };
    Ok(EnvironmentPoints::new(points))
}

/// Concatenates point sets, keeping weights. The grid linkage survives only when
/// every source carries one for the same box.
pub fn merge_point_sets(sets: &[EnvironmentPoints]) -> EnvironmentPoints {
    let mut out = EnvironmentPoints::default();
    let shared_roi = sets
        .first()
        .and_then(|s| s.grid.as_ref().map(|g| g.roi))
        .filter(|roi| sets.iter().all(|s| s.grid.as_ref().map(|g| g.roi == *roi).unwrap_or(false)));
    let mut voxel = Vec::new();
    for s in sets {
        out.points.extend_from_slice(&s.points);
        out.weights.extend_from_slice(&s.weights);
        if shared_roi.is_some() {
            voxel.extend_from_slice(&s.grid.as_ref().unwrap().voxel);
        }
    }
    out.grid = shared_roi.map(|roi| GridLinkage { roi, voxel });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(res: [usize; 3]) -> RoiBox {
        RoiBox::new(Point3::origin(), Vector3::repeat(0.5), UnitQuaternion::identity(), res).unwrap()
    }

    fn spec() -> CameraSpec {
        CameraSpec::new(90.0, (64, 32), 0.1, 20.0).unwrap()
    }

    #[test]
    fn unit_box_thousand_voxels() {
        let pts = voxelize_box(&unit_box([10, 10, 10])).unwrap();
        assert_eq!(pts.len(), 1000);
        let d = pts.points()[1] - pts.points()[0];
        assert!((d.norm() - 0.1).abs() < 1e-12);
        // x-fastest: the 11th point steps in y.
        let dy = pts.points()[10] - pts.points()[0];
        assert!((dy.y - 0.1).abs() < 1e-12 && dy.x.abs() < 1e-12);
        assert_eq!(pts.grid().unwrap().voxel[10], 10);
    }

    #[test]
    fn single_voxel_is_center() {
        let b =
            RoiBox::new(Point3::new(1.0, 2.0, 3.0), Vector3::new(1.0, 2.0, 3.0), UnitQuaternion::identity(), [1, 1, 1])
                .unwrap();
        let pts = voxelize_box(&b).unwrap();
        assert_eq!(pts.points(), &[Point3::new(1.0, 2.0, 3.0)]);
    }

    #[test]
    fn target_count_hits_thirty_thousand() {
        let b = RoiBox::with_target_count(
            Point3::origin(),
            Vector3::new(20.0, 10.0, 1.5),
            UnitQuaternion::identity(),
            30_000,
        )
        .unwrap();
        let n = b.point_count() as f64;
        assert!((n / 30_000.0 - 1.0).abs() < 0.03, "{n}");
    }

    #[test]
    fn invalid_boxes() {
        assert!(
            RoiBox::new(Point3::origin(), Vector3::new(0.0, 1.0, 1.0), UnitQuaternion::identity(), [1, 1, 1]).is_err()
        );
        assert!(RoiBox::new(Point3::origin(), Vector3::repeat(1.0), UnitQuaternion::identity(), [0, 1, 1]).is_err());
    }

    #[test]
    fn segment_grid_counts_and_order() {
        let segs = [
            Segment::new(Point3::origin(), Point3::new(10.0, 0.0, 0.0)),
            Segment::new(Point3::new(0.0, 5.0, 0.0), Point3::new(10.0, 5.0, 0.0)),
        ];
        let quats: Vec<_> = (0..15).map(|i| UnitQuaternion::from_euler_angles(0.0, 0.0, i as f64)).collect();
        let set = sample_segment_viewpoints(&segs, 20, &quats, spec()).unwrap();
        assert_eq!(set.len(), 600);

        let one = sample_segment_viewpoints(&segs[..1], 2, &quats[..1], spec()).unwrap();
        assert_eq!(one.viewpoints()[0].pose.position, segs[0].start);
        assert_eq!(one.viewpoints()[1].pose.position, segs[0].end);

        let small = sample_segment_viewpoints(&segs[..1], 5, &quats[..3], spec()).unwrap();
        assert_eq!(small.len(), 15);
        for (i, vp) in small.viewpoints().iter().enumerate() {
            assert_eq!(vp.id, i);
            let (pos, ori) = (i / 3, i % 3);
            assert!((vp.pose.position.x - 2.5 * pos as f64).abs() < 1e-12);
            assert!(vp.pose.orientation.angle_to(&quats[ori]) < 1e-9);
        }
        assert!(sample_segment_viewpoints(&segs, 1, &quats, spec()).is_err());
        assert!(sample_segment_viewpoints(&segs, 3, &[], spec()).is_err());
    }

    #[test]
    fn area_sampling_is_reproducible_and_downward() {
        let square = Polygon2::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let a = sample_area_viewpoints(&square, 3.0, 4, spec(), 11).unwrap();
        let b = sample_area_viewpoints(&square, 3.0, 4, spec(), 11).unwrap();
        assert_eq!(a, b);
        for vp in a.viewpoints() {
            assert_eq!(vp.pose.position.z, 3.0);
            assert!(vp.pose.forward().z <= 1e-12);
        }
        let c = sample_area_viewpoints(&square, 3.0, 4, spec(), 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn area_sampling_is_uniform() {
        let square = Polygon2::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let set = sample_area_viewpoints(&square, 0.0, 100_000, spec(), 5).unwrap();
        let left = set.viewpoints().iter().filter(|v| v.pose.position.x < 0.5).count();
        let frac = left as f64 / 100_000.0;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn l_shaped_polygon_rejects_notch() {
        let l = Polygon2::new(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]).unwrap();
        assert!((l.area() - 3.0).abs() < 1e-12);
        let set = sample_area_viewpoints(&l, 1.0, 2000, spec(), 2).unwrap();
        assert!(set.viewpoints().iter().all(|v| !(v.pose.position.x > 1.0 && v.pose.position.y > 1.0)));
        assert!(Polygon2::new(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
    }

    #[test]
    fn uniform_points_inside_region() {
        let bb = Aabb::new(Point3::new(-1.0, 0.0, 2.0), Point3::new(1.0, 3.0, 2.5));
        let pts = sample_points_uniform(&SampleRegion::Aabb(bb), 16_000, 3).unwrap();
        assert_eq!(pts.len(), 16_000);
        assert!(pts.points().iter().all(|p| bb.contains_point(p)));
        let one = sample_points_uniform(&SampleRegion::Aabb(bb), 1, 3).unwrap();
        assert!(bb.contains_point(&one.points()[0]));
        let again = sample_points_uniform(&SampleRegion::Aabb(bb), 16_000, 3).unwrap();
        assert_eq!(pts, again);

        let rot = unit_box([2, 2, 2]);
        let rot = RoiBox { orientation: UnitQuaternion::from_euler_angles(0.3, 0.2, 0.1), ..rot };
        let pts = sample_points_uniform(&SampleRegion::Box(rot), 500, 1).unwrap();
        assert!(pts.points().iter().all(|p| rot.contains(p)));
    }

    #[test]
    fn merge_semantics() {
        let a = voxelize_box(&unit_box([2, 2, 2])).unwrap();
        let b = sample_points_uniform(&SampleRegion::Aabb(a.grid().unwrap().roi.bounds()), 5, 0).unwrap();
        let ab = merge_point_sets(&[a.clone(), b]);
        assert_eq!(ab.len(), 13);
        assert!(ab.grid().is_none());
        let aa = merge_point_sets(&[a.clone(), a.clone()]);
        assert_eq!(aa.len(), 16);
        assert_eq!(aa.grid().unwrap().voxel.len(), 16);
        assert!(merge_point_sets(&[]).is_empty());
    }

    #[test]
    fn binary_roundtrip() {
        let pts = EnvironmentPoints::with_weights(
            vec![Point3::new(0.5, 1.25, -2.0), Point3::new(3.0, 0.0, 1.0)],
            vec![1.0, 2.5],
        )
        .unwrap();
        let mut buf = Vec::new();
        pts.write_binary(&mut buf, true).unwrap();
        assert_eq!(buf.len(), 9 + 2 * 12 + 2 * 4);
        let back = EnvironmentPoints::read_binary(&buf[..]).unwrap();
        assert_eq!(back.points(), pts.points());
        assert_eq!(back.weights(), pts.weights());
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(EnvironmentPoints::with_weights(vec![Point3::origin()], vec![0.0]).is_err());
        assert!(EnvironmentPoints::with_weights(vec![Point3::origin()], vec![]).is_err());
    }
}
