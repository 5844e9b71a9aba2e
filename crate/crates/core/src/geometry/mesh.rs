use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Point3, Vector3};

/// Axis-aligned bounding box in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    /// An inverted box that any `grow` call will replace.
    pub fn empty() -> Self {
        Aabb {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn new(a: Point3, b: Point3) -> Self {
        Aabb { min: a.inf(&b), max: a.sup(&b) }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut bb = Aabb::empty();
        for p in points {
            bb.grow(p);
        }
        bb
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&other.min), max: self.max.sup(&other.max) }
    }

    pub fn extent(&self) -> Vector3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.extent().norm()
        }
    }

    pub fn contains_point(&self, p: &Point3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        self.contains_point(&other.min) && self.contains_point(&other.max)
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            let e = self.extent();
            e.x * e.y * e.z
        }
    }

    /// Slab test; returns the entry distance when the ray overlaps the box within `[0, t_max]`.
    #[inline]
    pub(crate) fn ray_entry(&self, origin: &Point3, inv_dir: &Vector3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for i in 0..3 {
            let a = (self.min[i] - origin[i]) * inv_dir[i];
            let b = (self.max[i] - origin[i]) * inv_dir[i];
            // NaN arises for 0 * inf when the origin lies on a slab plane of a parallel ray;
            // max/min below discard it, keeping the test conservative.
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// Triangle soup with shared vertices. Degenerate triangles never survive construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
    /// Per-triangle object label, indexing into `label_names`.
    labels: Option<Vec<u32>>,
    label_names: Vec<String>,
}

/// What a loader or constructor observed while building a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadReport {
    pub triangles: usize,
    pub dropped_degenerate: usize,
    pub bounds: Aabb,
}

impl TriangleMesh {
    /// Validates indices and drops zero-area triangles.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<(Self, LoadReport)> {
        Self::with_labels(vertices, triangles, None, Vec::new())
    }

    pub fn with_labels(
        vertices: Vec<Point3>,
        triangles: Vec<[u32; 3]>,
        labels: Option<Vec<u32>>,
        label_names: Vec<String>,
    ) -> Result<(Self, LoadReport)> {
        if let Some(l) = &labels {
            if l.len() != triangles.len() {
                return Err(Error::Dimension(format!("{} labels for {} triangles", l.len(), triangles.len())));
            }
        }
        let n = vertices.len();
        let mut kept = Vec::with_capacity(triangles.len());
        let mut kept_labels = labels.as_ref().map(|_| Vec::with_capacity(triangles.len()));
        let mut dropped = 0;
        for (i, tri) in triangles.iter().enumerate() {
            for &idx in tri {
                if idx as usize >= n {
                    return Err(Error::VertexIndex { triangle: i, index: idx as usize, vertex_count: n });
                }
            }
            let [a, b, c] = tri.map(|k| vertices[k as usize]);
            if is_degenerate(&a, &b, &c) {
                dropped += 1;
                continue;
            }
            kept.push(*tri);
            if let (Some(out), Some(src)) = (kept_labels.as_mut(), labels.as_ref()) {
                out.push(src[i]);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh { dropped });
        }
        let mesh = TriangleMesh { vertices, triangles: kept, labels: kept_labels, label_names };
        let report = LoadReport { triangles: mesh.triangles.len(), dropped_degenerate: dropped, bounds: mesh.bounds() };
        Ok((mesh, report))
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    #[inline]
    pub fn triangle(&self, i: usize) -> [Point3; 3] {
        self.triangles[i].map(|k| self.vertices[k as usize])
    }

    /// Bounds of the referenced vertices.
    pub fn bounds(&self) -> Aabb {
        let mut bb = Aabb::empty();
        for tri in &self.triangles {
            for &k in tri {
                bb.grow(&self.vertices[k as usize]);
            }
        }
        bb
    }

    /// Concatenates two meshes; labels are dropped unless both carry them.
    pub fn merged(&self, other: &TriangleMesh) -> TriangleMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| t.map(|k| k + offset)));
        let (labels, label_names) = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => {
                let shift = self.label_names.len() as u32;
                let mut l = a.clone();
                l.extend(b.iter().map(|x| x + shift));
                let mut names = self.label_names.clone();
                names.extend(other.label_names.iter().cloned());
                (Some(l), names)
            }
            _ => (None, Vec::new()),
        };
        TriangleMesh { vertices, triangles, labels, label_names }
    }

    /// Wavefront OBJ with one `o` group per label when labels are present.
    pub fn write_obj<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {} vertices, {} triangles", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        let mut current: Option<u32> = None;
        for (i, t) in self.triangles.iter().enumerate() {
            if let Some(labels) = &self.labels {
                if current != Some(labels[i]) {
                    current = Some(labels[i]);
                    let name = self
                        .label_names
                        .get(labels[i] as usize)
                        .cloned()
                        .unwrap_or_else(|| format!("object{}", labels[i]));
                    writeln!(w, "o {name}")?;
                }
            }
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

pub(crate) fn is_degenerate(a: &Point3, b: &Point3, c: &Point3) -> bool {
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let longest = ab.norm_squared().max(ac.norm_squared()).max(bc.norm_squared());
    if !(longest > 0.0) || !longest.is_finite() {
        return true;
    }
    // Twice the area relative to the squared longest edge: scale-free flatness test.
    ab.cross(&ac).norm() <= 1e-12 * longest
}
