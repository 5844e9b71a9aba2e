//! Procedural test scenes. All are z-up and in meters.
//!
//! - [`unit_cube`]: 12 triangles centered at the origin.
//! - [`harbour`]: container yard with two camera beams and a 15-orientation set.
//! - [`office`]: 40 × 40 × 3 m floor with partitions and desks, ceiling-mounted candidates.
//! - [`clutter`]: random icospheres on a ground plane; over 100k triangles by default.
//! - [`open_field`]: a lone ground plane, so nothing above it is ever occluded.

use std::collections::HashMap;

use rand::Rng;

use crate::camera::{look_rotation, CameraSpec};
use crate::discretize::{rng, Polygon2, RoiBox, Segment, WORLD_UP};
use crate::geometry::{Aabb, TriangleMesh};
use crate::{Point3, UnitQuaternion, Vector3};

#[derive(Debug, Default)]
pub struct MeshBuilder {
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
    labels: Vec<u32>,
    label_names: Vec<String>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn label(&mut self, name: &str) -> u32 {
        match self.label_names.iter().position(|n| n == name) {
            Some(i) => i as u32,
            None => {
                self.label_names.push(name.to_string());
                (self.label_names.len() - 1) as u32
            }
        }
    }

    fn push_vertex(&mut self, p: Point3) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    /// Quad `a b c d` (counter-clockwise seen from its front).
    pub fn quad(&mut self, corners: [Point3; 4], label: &str) -> &mut Self {
        let l = self.label(label);
        let i = corners.map(|p| self.push_vertex(p));
        self.triangles.push([i[0], i[1], i[2]]);
        self.triangles.push([i[0], i[2], i[3]]);
        self.labels.extend([l, l]);
        self
    }

    /// Horizontal rectangle at height `z`.
    pub fn floor(&mut self, min: [f64; 2], max: [f64; 2], z: f64, label: &str) -> &mut Self {
        self.quad(
            [
                Point3::new(min[0], min[1], z),
                Point3::new(max[0], min[1], z),
                Point3::new(max[0], max[1], z),
                Point3::new(min[0], max[1], z),
            ],
            label,
        )
    }

    pub fn cuboid(&mut self, b: &Aabb, label: &str) -> &mut Self {
        let l = self.label(label);
        let base = self.vertices.len() as u32;
        for k in 0..8 {
            self.vertices.push(Point3::new(
                if k & 1 == 0 { b.min.x } else { b.max.x },
                if k & 2 == 0 { b.min.y } else { b.max.y },
                if k & 4 == 0 { b.min.z } else { b.max.z },
            ));
        }
        const FACES: [[u32; 4]; 6] = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        for f in FACES {
            self.triangles.push([base + f[0], base + f[1], base + f[2]]);
            self.triangles.push([base + f[0], base + f[2], base + f[3]]);
            self.labels.extend([l, l]);
        }
        self
    }

    pub fn icosphere(&mut self, center: Point3, radius: f64, subdivisions: u32, label: &str) -> &mut Self {
        let l = self.label(label);
        let (verts, tris) = icosphere(subdivisions);
        let base = self.vertices.len() as u32;
        self.vertices.extend(verts.iter().map(|v| center + v * radius));
        for t in tris {
            self.triangles.push(t.map(|i| i + base));
            self.labels.push(l);
        }
        self
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn build(self) -> TriangleMesh {
        TriangleMesh::with_labels(self.vertices, self.triangles, Some(self.labels), self.label_names)
            .expect("procedural scenes are non-empty")
            .0
    }
}

/// Unit-radius icosphere as (vertices, triangles); `20 · 4^s` triangles.
pub fn icosphere(subdivisions: u32) -> (Vec<Vector3>, Vec<[u32; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vector3::new(p[0], p[1], p[2]).normalize())
    .collect();
    let mut tris: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vector3>| {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) / 2.0).normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (verts, tris)
}

pub fn unit_cube() -> TriangleMesh {
    let mut b = MeshBuilder::new();
    b.cuboid(&Aabb::new(Point3::new(-0.5, -0.5, -0.5), Point3::new(0.5, 0.5, 0.5)), "cube");
    b.build()
}

/// Downward-looking orientations: every yaw paired with every depression angle (degrees).
pub fn yaw_pitch_orientations(yaws_deg: &[f64], depressions_deg: &[f64]) -> Vec<UnitQuaternion> {
    let mut out = Vec::with_capacity(yaws_deg.len() * depressions_deg.len());
    for &yaw in yaws_deg {
        for &pitch in depressions_deg {
            let (y, p) = (yaw.to_radians(), pitch.to_radians());
            let dir = Vector3::new(p.cos() * y.cos(), p.cos() * y.sin(), -p.sin());
            out.push(look_rotation(&dir, &WORLD_UP).expect("nonzero direction"));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct HarbourScene {
    pub mesh: TriangleMesh,
    /// Region of interest over the container yard.
    pub roi: RoiBox,
    /// Aisle between the two container rows, for denser extra sampling.
    pub aisle: Aabb,
    pub beams: [Segment; 2],
    pub positions_per_beam: usize,
    pub orientations: Vec<UnitQuaternion>,
    pub spec: CameraSpec,
}

pub const HARBOUR_YAWS: [f64; 5] = [0.0, 72.0, 144.0, 216.0, 288.0];
pub const HARBOUR_DEPRESSIONS: [f64; 3] = [25.0, 45.0, 65.0];

/// Container yard: two rows of 6 m containers (some stacked) flanking an aisle,
/// camera beams 12 m up along both long sides. `roi_points` sets the ROI grid size.
pub fn harbour(roi_points: usize) -> HarbourScene {
    let mut b = MeshBuilder::new();
    b.floor([-35.0, -20.0], [35.0, 20.0], 0.0, "ground");
    let (len, wid, hgt) = (6.1, 2.44, 2.59);
    for (row, y0) in [(0, 2.5), (1, -2.5 - wid)] {
        for i in 0..6 {
            let x0 = -22.0 + i as f64 * 7.6;
            let stacks = 1 + (i + row) % 2;
            for s in 0..stacks {
                let z0 = s as f64 * hgt;
                b.cuboid(&Aabb::new(Point3::new(x0, y0, z0), Point3::new(x0 + len, y0 + wid, z0 + hgt)), "container");
            }
        }
        // A third row further out, shadowing the yard edges.
        let y1 = if row == 0 { 8.0 } else { -8.0 - wid };
        for i in 0..3 {
            let x0 = -18.0 + i as f64 * 13.0;
            b.cuboid(&Aabb::new(Point3::new(x0, y1, 0.0), Point3::new(x0 + len, y1 + wid, hgt)), "container");
        }
    }
    let mesh = b.build();
    let roi = RoiBox::with_target_count(
        Point3::new(0.0, 0.0, 2.0),
        Vector3::new(24.0, 11.0, 2.0),
        UnitQuaternion::identity(),
        roi_points,
    )
    .expect("valid harbour ROI");
    HarbourScene {
        mesh,
        roi,
        aisle: Aabb::new(Point3::new(-22.0, -2.4, 0.1), Point3::new(23.5, 2.4, 3.0)),
        beams: [
            Segment::new(Point3::new(-25.0, 13.0, 12.0), Point3::new(25.0, 13.0, 12.0)),
            Segment::new(Point3::new(-25.0, -13.0, 12.0), Point3::new(25.0, -13.0, 12.0)),
        ],
        positions_per_beam: 20,
        orientations: yaw_pitch_orientations(&HARBOUR_YAWS, &HARBOUR_DEPRESSIONS),
        spec: CameraSpec::new(70.0, (160, 100), 0.5, 60.0).expect("valid spec"),
    }
}

#[derive(Debug, Clone)]
pub struct OfficeScene {
    pub mesh: TriangleMesh,
    /// Interior volume, floor to ceiling.
    pub interior: Aabb,
    /// Ceiling-level area for candidate sampling.
    pub ceiling: Polygon2,
    pub ceiling_height: f64,
    /// 2:1 aspect, 90° horizontal field of view.
    pub spec: CameraSpec,
}

/// 40 × 40 × 3 m office floor: outer walls, a partition grid with doorways and rows of desks.
pub fn office() -> OfficeScene {
    let (half, height, t) = (20.0, 3.0, 0.1);
    let mut b = MeshBuilder::new();
    b.floor([-half, -half], [half, half], 0.0, "floor");
    let wall = |b: &mut MeshBuilder, min: [f64; 3], max: [f64; 3]| {
        b.cuboid(&Aabb::new(Point3::from(min), Point3::from(max)), "wall");
    };
    wall(&mut b, [-half - t, -half - t, 0.0], [half + t, -half, height]);
    wall(&mut b, [-half - t, half, 0.0], [half + t, half + t, height]);
    wall(&mut b, [-half - t, -half, 0.0], [-half, half, height]);
    wall(&mut b, [half, -half, 0.0], [half + t, half, height]);
    // Partitions at x = ±7 and y = 0, each with a 2 m doorway.
    for x in [-7.0, 7.0] {
        wall(&mut b, [x, -half, 0.0], [x + t, -3.0, 2.2]);
        wall(&mut b, [x, -1.0, 0.0], [x + t, 6.0, 2.2]);
        wall(&mut b, [x, 8.0, 0.0], [x + t, half, 2.2]);
    }
    for (x0, x1) in [(-half, -10.0), (-8.0, 4.0), (6.0, half)] {
        wall(&mut b, [x0, 0.0, 0.0], [x1, t, 2.2]);
    }
    for i in 0..6 {
        for j in 0..5 {
            let x = -17.5 + i as f64 * 6.5;
            let y = -17.0 + j as f64 * 7.5;
            b.cuboid(&Aabb::new(Point3::new(x, y, 0.0), Point3::new(x + 1.6, y + 0.8, 0.75)), "desk");
        }
    }
    let mesh = b.build();
    OfficeScene {
        mesh,
        interior: Aabb::new(Point3::new(-half, -half, 0.0), Point3::new(half, half, height)),
        ceiling: Polygon2::rectangle([-half + 0.2, -half + 0.2], [half - 0.2, half - 0.2]).expect("valid rectangle"),
        ceiling_height: 2.9,
        spec: CameraSpec::new(90.0, (160, 80), 0.2, 30.0).expect("valid spec"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterParams {
    pub spheres: usize,
    pub subdivisions: u32,
    /// Half extent of the square footprint.
    pub half_extent: f64,
    pub seed: u64,
}

impl ClutterParams {
    /// 30 low-poly spheres, for fast unit tests.
    pub fn small() -> Self {
        ClutterParams { spheres: 30, subdivisions: 1, half_extent: 10.0, seed: 7 }
    }
}

impl Default for ClutterParams {
    /// 100 spheres of 1280 triangles each.
    fn default() -> Self {
        ClutterParams { spheres: 100, subdivisions: 3, half_extent: 15.0, seed: 7 }
    }
}

#[derive(Debug, Clone)]
pub struct ClutterScene {
    pub mesh: TriangleMesh,
    /// Volume the spheres occupy, for point sampling.
    pub region: Aabb,
}

pub fn clutter(params: ClutterParams) -> ClutterScene {
    let h = params.half_extent;
    let mut r = rng(params.seed);
    let mut b = MeshBuilder::new();
    b.floor([-h - 10.0, -h - 10.0], [h + 10.0, h + 10.0], 0.0, "ground");
    for _ in 0..params.spheres {
        let radius = r.gen_range(0.4..1.6);
        let c = Point3::new(r.gen_range(-h..h), r.gen_range(-h..h), r.gen_range(radius..5.0));
        b.icosphere(c, radius, params.subdivisions, "sphere");
    }
    ClutterScene { mesh: b.build(), region: Aabb::new(Point3::new(-h, -h, 0.05), Point3::new(h, h, 6.0)) }
}

/// Large ground plane at z = 0 and nothing else.
pub fn open_field(half_extent: f64) -> TriangleMesh {
    let mut b = MeshBuilder::new();
    b.floor([-half_extent, -half_extent], [half_extent, half_extent], 0.0, "ground");
    b.build()
}

/// Build a mesh by name: `unit_cube`, `harbour`, `office`, `clutter`, `clutter_small`, `open_field`.
pub fn builtin_mesh(name: &str) -> Option<TriangleMesh> {
    Some(match name {
        "unit_cube" => unit_cube(),
        "harbour" => harbour(1).mesh,
        "office" => office().mesh,
        "clutter" => clutter(ClutterParams::default()).mesh,
        "clutter_small" => clutter(ClutterParams::small()).mesh,
        "open_field" => open_field(100.0),
        _ => return None,
    })
}

pub const BUILTIN_SCENES: [&str; 6] = ["unit_cube", "harbour", "office", "clutter", "clutter_small", "open_field"];
