//! Software depth rasterizer: near-plane clipping, perspective-correct depth,
//! top-left fill rule, one sample per pixel center.

use crate::camera::{CameraTransform, Viewpoint};
use crate::geometry::TriangleMesh;
use crate::Vector3;

/// Axial depth per pixel, row-major from the top-left, `+inf` where nothing was drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthBuffer {
    width: u32,
    height: u32,
    depths: Vec<f32>,
}

impl DepthBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        DepthBuffer { width, height, depths: vec![f32::INFINITY; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.depths[y as usize * self.width as usize + x as usize]
    }

    pub fn depths(&self) -> &[f32] {
        &self.depths
    }

    /// Depth at the pixel containing continuous image point `(u, v)`; points on the
    /// far borders are clamped inward to the last pixel.
    #[inline]
    pub fn lookup(&self, u: f64, v: f64) -> f32 {
        let x = (u.max(0.0) as u32).min(self.width - 1);
        let y = (v.max(0.0) as u32).min(self.height - 1);
        self.get(x, y)
    }

    pub fn covered_pixels(&self) -> usize {
        self.depths.iter().filter(|d| d.is_finite()).count()
    }
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    x: f64,
    y: f64,
    inv_z: f64,
}

pub fn render_depth(mesh: &TriangleMesh, viewpoint: &Viewpoint) -> DepthBuffer {
    let cam = CameraTransform::of(viewpoint);
    render_depth_with(mesh, &cam)
}

pub(crate) fn render_depth_with(mesh: &TriangleMesh, cam: &CameraTransform) -> DepthBuffer {
    let mut buf = DepthBuffer::new(cam.width(), cam.height());
    // A zero near plane would put vertices at the eye at infinity.
    let near = cam.min_range().max(1e-6);
    let view: Vec<Vector3> = mesh.vertices().iter().map(|p| cam.to_view(p)).collect();
    let project = |v: &Vector3| {
        let (x, y) = cam.view_to_screen(v);
        ScreenVertex { x, y, inv_z: 1.0 / v.z }
    };
    let screen: Vec<Option<ScreenVertex>> =
        view.iter().map(|v| if v.z >= near { Some(project(v)) } else { None }).collect();

    for tri in mesh.triangles() {
        let idx = tri.map(|k| k as usize);
        match (screen[idx[0]], screen[idx[1]], screen[idx[2]]) {
            (Some(a), Some(b), Some(c)) => raster_triangle(&mut buf, near, a, b, c),
            _ => {
                let poly = [view[idx[0]], view[idx[1]], view[idx[2]]];
                if poly.iter().all(|v| v.z < near) {
                    continue;
                }
                let clipped = clip_near(&poly, near);
                if clipped.len() < 3 {
                    continue;
                }
                let s: Vec<ScreenVertex> = clipped.iter().map(project).collect();
                for i in 1..s.len() - 1 {
                    raster_triangle(&mut buf, near, s[0], s[i], s[i + 1]);
                }
            }
        }
    }
    buf
}

/// Sutherland–Hodgman against the plane `z = near` (keeping `z >= near`).
fn clip_near(poly: &[Vector3; 3], near: f64) -> Vec<Vector3> {
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let cur = poly[i];
        let next = poly[(i + 1) % 3];
        let cin = cur.z >= near;
        let nin = next.z >= near;
        if cin {
            out.push(cur);
        }
        if cin != nin {
            let t = (near - cur.z) / (next.z - cur.z);
            let mut p = cur + (next - cur) * t;
            p.z = near;
            out.push(p);
        }
    }
    out
}

#[inline]
fn edge(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

/// Top or left edge for triangles with positive `edge(a, b, c)` in y-down screen space.
#[inline]
fn is_top_left(a: &ScreenVertex, b: &ScreenVertex) -> bool {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

fn raster_triangle(buf: &mut DepthBuffer, near: f64, a: ScreenVertex, b: ScreenVertex, c: ScreenVertex) {
    let (a, mut b, mut c) = (a, b, c);
    let mut area = edge(a.x, a.y, b.x, b.y, c.x, c.y);
    if !(area.abs() > 0.0) || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        std::mem::swap(&mut b, &mut c);
        area = -area;
    }
    let w = buf.width as i64;
    let h = buf.height as i64;
    let min_x = a.x.min(b.x).min(c.x);
    let max_x = a.x.max(b.x).max(c.x);
    let min_y = a.y.min(b.y).min(c.y);
    let max_y = a.y.max(b.y).max(c.y);
    // Pixel i is covered when its center i + 0.5 lies in the triangle.
    let x0 = ((min_x - 0.5).ceil().max(0.0) as i64).min(w);
    let x1 = ((max_x - 0.5).floor().min((w - 1) as f64)) as i64;
    let y0 = ((min_y - 0.5).ceil().max(0.0) as i64).min(h);
    let y1 = ((max_y - 0.5).floor().min((h - 1) as f64)) as i64;
    if x0 > x1 || y0 > y1 {
        return;
    }
    let tl0 = is_top_left(&b, &c);
    let tl1 = is_top_left(&c, &a);
    let tl2 = is_top_left(&a, &b);
    let inv_area = 1.0 / area;
    for y in y0..=y1 {
        let py = y as f64 + 0.5;
        let row = (y * w) as usize;
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let w0 = edge(b.x, b.y, c.x, c.y, px, py);
            let w1 = edge(c.x, c.y, a.x, a.y, px, py);
            let w2 = edge(a.x, a.y, b.x, b.y, px, py);
            let inside = (w0 > 0.0 || (w0 == 0.0 && tl0))
                && (w1 > 0.0 || (w1 == 0.0 && tl1))
                && (w2 > 0.0 || (w2 == 0.0 && tl2));
            if !inside {
                continue;
            }
            // 1/z is affine in screen space, so interpolate it and invert.
            let inv_z = (w0 * a.inv_z + w1 * b.inv_z + w2 * c.inv_z) * inv_area;
            let z = ((1.0 / inv_z).max(near)) as f32;
            let slot = &mut buf.depths[row + x as usize];
            if z < *slot {
                *slot = z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{CameraSpec, Pose};
    use crate::{Point3, UnitQuaternion};

    fn wall(distance: f64, half: f64) -> TriangleMesh {
        let z = -distance;
        TriangleMesh::new(
            vec![
                Point3::new(-half, -half, z),
                Point3::new(half, -half, z),
                Point3::new(half, half, z),
                Point3::new(-half, half, z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
        .0
    }

    fn camera(w: u32, h: u32) -> Viewpoint {
        let spec = CameraSpec::new(90.0, (w, h), 0.1, 100.0).unwrap();
        Viewpoint::new(0, spec, Pose::new(Point3::origin(), UnitQuaternion::identity()))
    }

    #[test]
    fn fronto_parallel_wall_fills_frame() {
        let buf = render_depth(&wall(3.0, 100.0), &camera(64, 48));
        assert_eq!(buf.covered_pixels(), 64 * 48);
        assert_eq!(buf.get(32, 24), 3.0);
        assert!(buf.depths().iter().all(|&d| (d - 3.0).abs() < 1e-5));
    }

    #[test]
    fn empty_view_is_infinite() {
        // Wall behind the camera.
        let buf = render_depth(&wall(-3.0, 100.0), &camera(32, 32));
        assert_eq!(buf.covered_pixels(), 0);
        assert!(buf.depths().iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn shared_diagonal_has_no_cracks_or_double_coverage() {
        // A quad whose diagonal passes exactly through pixel centers.
        let buf = render_depth(&wall(1.0, 0.5), &camera(64, 64));
        // 90° fov: x in [-1, 1] at depth 1 spans 64 px, so the 1x1 quad covers 32x32.
        assert_eq!(buf.covered_pixels(), 32 * 32);
    }

    #[test]
    fn near_plane_clips_geometry() {
        // Triangle crossing the near plane: the part in front of min_range is cut.
        let (mesh, _) = TriangleMesh::new(
            vec![Point3::new(-5.0, -1.0, 1.0), Point3::new(5.0, -1.0, 1.0), Point3::new(0.0, -1.0, -20.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let spec = CameraSpec::new(90.0, (64, 64), 0.5, 100.0).unwrap();
        let vp = Viewpoint::new(0, spec, Pose::new(Point3::origin(), UnitQuaternion::identity()));
        let buf = render_depth(&mesh, &vp);
        assert!(buf.covered_pixels() > 0);
        assert!(buf.depths().iter().filter(|d| d.is_finite()).all(|&d| d >= 0.5));
    }
}
