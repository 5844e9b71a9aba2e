//! Pinhole camera model.
//!
//! Conventions: the camera looks along its local −z axis, local +x is image
//! right and local +y is image up. Image coordinates are continuous with the
//! origin at the top-left corner of the top-left pixel, so `u ∈ [0, width]`,
//! `v ∈ [0, height]` and pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`.
//! Depth `z` is the positive distance along the viewing axis; `min_range` and
//! `max_range` gate that axial depth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Matrix3, Point3, UnitQuaternion, Vector3};

/// Intrinsics. `perspective_angle` is the horizontal field of view in degrees;
/// the vertical one follows from the aspect ratio with square pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct CameraSpec {
    pub perspective_angle: f64,
    pub resolution: (u32, u32),
    pub min_range: f64,
    pub max_range: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    perspective_angle: f64,
    resolution: (u32, u32),
    min_range: f64,
    max_range: f64,
}

impl TryFrom<RawSpec> for CameraSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        CameraSpec::new(r.perspective_angle, r.resolution, r.min_range, r.max_range)
    }
}

impl CameraSpec {
    pub fn new(perspective_angle: f64, resolution: (u32, u32), min_range: f64, max_range: f64) -> Result<Self> {
        if !(perspective_angle > 0.0 && perspective_angle < 180.0) {
            return Err(Error::invalid(format!(
                "perspective_angle must lie in (0, 180) degrees, got {perspective_angle}"
            )));
        }
        if resolution.0 < 1 || resolution.1 < 1 {
            return Err(Error::invalid(format!("resolution must be at least 1x1, got {resolution:?}")));
        }
        if !(min_range >= 0.0 && min_range < max_range) || !max_range.is_finite() {
            return Err(Error::invalid(format!(
                "ranges must satisfy 0 <= min_range < max_range, got {min_range}..{max_range}"
            )));
        }
        Ok(CameraSpec { perspective_angle, resolution, min_range, max_range })
    }

    pub fn width(&self) -> u32 {
        self.resolution.0
    }

    pub fn height(&self) -> u32 {
        self.resolution.1
    }

    /// Focal length in pixels (same for both axes).
    pub fn focal_px(&self) -> f64 {
        0.5 * self.width() as f64 / (0.5 * self.perspective_angle.to_radians()).tan()
    }

    pub fn vertical_fov_degrees(&self) -> f64 {
        let half = (0.5 * self.perspective_angle.to_radians()).tan() * self.height() as f64 / self.width() as f64;
        2.0 * half.atan().to_degrees()
    }
}

/// Rigid placement. The quaternion is renormalized on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point3,
    pub orientation: UnitQuaternion,
}

impl Pose {
    pub fn new(position: Point3, orientation: UnitQuaternion) -> Self {
        // Re-normalize to absorb drift from callers composing rotations.
        let orientation = UnitQuaternion::new_normalize(orientation.into_inner());
        Pose { position, orientation }
    }

    /// From `[x, y, z, w]` quaternion components, normalizing them.
    pub fn from_xyzw(position: [f64; 3], q: [f64; 4]) -> Result<Self> {
        let quat = nalgebra::Quaternion::new(q[3], q[0], q[1], q[2]);
        let norm = quat.norm();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(Error::invalid(format!("quaternion {q:?} cannot be normalized")));
        }
        Ok(Pose { position: Point3::from(position), orientation: UnitQuaternion::new_normalize(quat) })
    }

    /// Camera at `eye` looking at `target`, with image-up as close to `up` as possible.
    pub fn look_at(eye: Point3, target: Point3, up: Vector3) -> Result<Self> {
        Self::look_along(eye, target - eye, up)
    }

    pub fn look_along(eye: Point3, direction: Vector3, up: Vector3) -> Result<Self> {
        let orientation = look_rotation(&direction, &up)
            .ok_or_else(|| Error::invalid(format!("cannot orient a camera along {direction:?}")))?;
        Ok(Pose { position: eye, orientation })
    }

    pub fn forward(&self) -> Vector3 {
        self.orientation * -Vector3::z()
    }

    pub fn quaternion_xyzw(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.i, q.j, q.k, q.w]
    }
}

/// Rotation taking local −z onto `direction` and local +y towards `up`. When the
/// direction is (anti)parallel to `up`, world +y (or +x) stands in for it.
pub fn look_rotation(direction: &Vector3, up: &Vector3) -> Option<UnitQuaternion> {
    let d = direction.try_normalize(1e-12)?;
    let mut up_ref = *up;
    if up_ref.cross(&d).norm() < 1e-9 {
        up_ref = if Vector3::y().cross(&d).norm() >= 1e-9 { Vector3::y() } else { Vector3::x() };
    }
    // face_towards aligns local +z with its argument.
    Some(UnitQuaternion::face_towards(&-d, &up_ref))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub id: usize,
    pub spec: CameraSpec,
    pub pose: Pose,
}

impl Viewpoint {
    pub fn new(id: usize, spec: CameraSpec, pose: Pose) -> Self {
        Viewpoint { id, spec, pose }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

/// World-to-image mapping with the rotation expanded to a matrix, for batch use.
#[derive(Debug, Clone, Copy)]
pub struct CameraTransform {
    world_to_cam: Matrix3,
    position: Point3,
    focal: f64,
    cx: f64,
    cy: f64,
    width: f64,
    height: f64,
    min_range: f64,
    max_range: f64,
}

impl CameraTransform {
    pub fn new(spec: &CameraSpec, pose: &Pose) -> Self {
        let r = pose.orientation.to_rotation_matrix();
        CameraTransform {
            world_to_cam: r.matrix().transpose(),
            position: pose.position,
            focal: spec.focal_px(),
            cx: 0.5 * spec.width() as f64,
            cy: 0.5 * spec.height() as f64,
            width: spec.width() as f64,
            height: spec.height() as f64,
            min_range: spec.min_range,
            max_range: spec.max_range,
        }
    }

    pub fn of(vp: &Viewpoint) -> Self {
        Self::new(&vp.spec, &vp.pose)
    }

    /// Camera-frame coordinates with the third component flipped to positive depth.
    #[inline]
    pub fn to_view(&self, p: &Point3) -> Vector3 {
        let c = self.world_to_cam * (p - self.position);
        Vector3::new(c.x, c.y, -c.z)
    }

    /// Screen position of a view-space point with positive depth.
    #[inline]
    pub fn view_to_screen(&self, v: &Vector3) -> (f64, f64) {
        let inv = 1.0 / v.z;
        (self.cx + self.focal * v.x * inv, self.cy - self.focal * v.y * inv)
    }

    #[inline]
    pub fn project(&self, p: &Point3) -> Option<Projection> {
        let v = self.to_view(p);
        let z = v.z;
        if !(z >= self.min_range && z <= self.max_range) || z <= 0.0 {
            return None;
        }
        let (u, vv) = self.view_to_screen(&v);
        if u >= 0.0 && u <= self.width && vv >= 0.0 && vv <= self.height {
            Some(Projection { u, v: vv, z })
        } else {
            None
        }
    }

    /// World-space direction (unit) of the ray through image point `(u, v)`, and the
    /// factor converting distance along it to axial depth.
    pub fn pixel_ray(&self, u: f64, v: f64) -> (Vector3, f64) {
        let local = Vector3::new((u - self.cx) / self.focal, -(v - self.cy) / self.focal, -1.0);
        let n = local.norm();
        let world = self.world_to_cam.transpose() * local;
        (world / n, 1.0 / n)
    }

    pub fn position(&self) -> Point3 {
        self.position
    }

    pub fn width(&self) -> u32 {
        self.width as u32
    }

    pub fn height(&self) -> u32 {
        self.height as u32
    }

    pub fn min_range(&self) -> f64 {
        self.min_range
    }
}

pub fn project_point(viewpoint: &Viewpoint, point: &Point3) -> Option<Projection> {
    CameraTransform::of(viewpoint).project(point)
}

pub fn frustum_contains(viewpoint: &Viewpoint, point: &Point3) -> bool {
    project_point(viewpoint, point).is_some()
}

/// The eight world-space corners of the frustum, near plane first, ordered
/// top-left, top-right, bottom-right, bottom-left in the image.
pub fn frustum_corners(viewpoint: &Viewpoint) -> [Point3; 8] {
    let spec = &viewpoint.spec;
    let f = spec.focal_px();
    let hx = 0.5 * spec.width() as f64 / f;
    let hy = 0.5 * spec.height() as f64 / f;
    let mut out = [Point3::origin(); 8];
    for (k, depth) in [spec.min_range, spec.max_range].into_iter().enumerate() {
        let corners = [(-hx, hy), (hx, hy), (hx, -hy), (-hx, -hy)];
        for (i, (x, y)) in corners.into_iter().enumerate() {
            let local = Vector3::new(x * depth, y * depth, -depth);
            out[4 * k + i] = viewpoint.pose.position + viewpoint.pose.orientation * local;
        }
    }
    out
}
