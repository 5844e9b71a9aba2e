//! Median-split bounding volume hierarchy over a triangle mesh.

use super::mesh::{Aabb, TriangleMesh};
use crate::{Point3, Vector3};

pub const DEFAULT_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Immutable ray-acceleration structure. Triangles are copied into leaf order so
/// traversal touches contiguous memory.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Mesh triangle index for each slot in leaf order.
    order: Vec<u32>,
    tris: Vec<[Point3; 3]>,
    leaf_size: usize,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Bvh {
        Self::with_leaf_size(mesh, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(mesh: &TriangleMesh, leaf_size: usize) -> Bvh {
        let leaf_size = leaf_size.max(1);
        let n = mesh.triangle_count();
        let boxes: Vec<Aabb> = (0..n).map(|i| Aabb::from_points(mesh.triangle(i).iter())).collect();
        let centroids: Vec<Point3> = boxes.iter().map(Aabb::center).collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / leaf_size + 1);
        nodes.push(Node { bounds: Aabb::empty(), kind: NodeKind::Leaf { start: 0, count: 0 } });

        // Explicit stack: (node index, start, end).
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((node, start, end)) = stack.pop() {
            let slice = &mut order[start..end];
            let bounds = slice.iter().fold(Aabb::empty(), |acc, &t| acc.union(&boxes[t as usize]));
            let count = end - start;
            if count <= leaf_size {
                nodes[node] = Node { bounds, kind: NodeKind::Leaf { start: start as u32, count: count as u32 } };
                continue;
            }
            let cbounds = Aabb::from_points(slice.iter().map(|&t| &centroids[t as usize]));
            let ext = cbounds.extent();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            // Total order with the triangle index as tie-break keeps construction deterministic.
            slice.sort_unstable_by(|&a, &b| {
                centroids[a as usize][axis].total_cmp(&centroids[b as usize][axis]).then(a.cmp(&b))
            });
            let mid = start + count / 2;
            let left = nodes.len();
            nodes.push(Node { bounds: Aabb::empty(), kind: NodeKind::Leaf { start: 0, count: 0 } });
            nodes.push(Node { bounds: Aabb::empty(), kind: NodeKind::Leaf { start: 0, count: 0 } });
            nodes[node] = Node { bounds, kind: NodeKind::Inner { left: left as u32, right: left as u32 + 1 } };
            stack.push((left + 1, mid, end));
            stack.push((left, start, mid));
        }

        let tris = order.iter().map(|&t| mesh.triangle(t as usize)).collect();
        Bvh { nodes, order, tris, leaf_size }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    /// Nearest hit distance in `(0, t_max]` along a unit `direction`.
    pub fn ray_intersect(&self, origin: &Point3, direction: &Vector3, t_max: f64) -> Option<f64> {
        self.traverse(origin, direction, t_max, false).map(|(t, _)| t)
    }

    /// Nearest hit distance and the mesh index of the triangle that produced it.
    pub fn ray_intersect_triangle(&self, origin: &Point3, direction: &Vector3, t_max: f64) -> Option<(f64, usize)> {
        self.traverse(origin, direction, t_max, false).map(|(t, slot)| (t, self.order[slot] as usize))
    }

    /// True when any triangle is hit in `(0, t_max]`.
    pub fn occluded(&self, origin: &Point3, direction: &Vector3, t_max: f64) -> bool {
        self.traverse(origin, direction, t_max, true).is_some()
    }

    fn traverse(&self, origin: &Point3, direction: &Vector3, t_max: f64, any: bool) -> Option<(f64, usize)> {
        if !(t_max > 0.0) || self.tris.is_empty() {
            return None;
        }
        let ray = WatertightRay::new(origin, direction);
        let inv = Vector3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut best = t_max;
        let mut hit = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        self.nodes[0].bounds.ray_entry(origin, &inv, best)?;
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for slot in start as usize..(start + count) as usize {
                        if let Some(t) = ray.intersect(&self.tris[slot], best) {
                            best = t;
                            hit = Some((t, slot));
                            if any {
                                return hit;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let tl = self.nodes[left as usize].bounds.ray_entry(origin, &inv, best);
                    let tr = self.nodes[right as usize].bounds.ray_entry(origin, &inv, best);
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            // Push the farther child first so the nearer one is visited next.
                            if a <= b {
                                stack.push(right);
                                stack.push(left);
                            } else {
                                stack.push(left);
                                stack.push(right);
                            }
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        hit
    }

    /// Checks the structural invariants: every triangle in exactly one leaf and
    /// children contained in their parents.
    pub fn validate(&self) -> bool {
        let mut seen = vec![0u32; self.tris.len()];
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for slot in start..start + count {
                        seen[slot as usize] += 1;
                        let tb = Aabb::from_points(self.tris[slot as usize].iter());
                        if !node.bounds.contains(&tb) {
                            return false;
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    for c in [left, right] {
                        if !node.bounds.contains(&self.nodes[c as usize].bounds) {
                            return false;
                        }
                        stack.push(c as usize);
                    }
                }
            }
        }
        let mut sorted = self.order.clone();
        sorted.sort_unstable();
        seen.iter().all(|&c| c == 1) && sorted.iter().enumerate().all(|(i, &t)| i as u32 == t)
    }

    pub fn is_single_leaf(&self) -> bool {
        matches!(self.nodes[0].kind, NodeKind::Leaf { .. })
    }
}

/// Precomputed ray shear for the watertight ray/triangle test: edges shared by two
/// triangles are never missed by both.
struct WatertightRay {
    origin: Point3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

impl WatertightRay {
    fn new(origin: &Point3, dir: &Vector3) -> Self {
        let a = dir.abs();
        let kz = if a.x >= a.y && a.x >= a.z {
            0
        } else if a.y >= a.z {
            1
        } else {
            2
        };
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if dir[kz] < 0.0 {
            std::mem::swap(&mut kx, &mut ky);
        }
        WatertightRay { origin: *origin, kx, ky, kz, sx: dir[kx] / dir[kz], sy: dir[ky] / dir[kz], sz: 1.0 / dir[kz] }
    }

    #[inline]
    fn intersect(&self, tri: &[Point3; 3], t_max: f64) -> Option<f64> {
        let a = tri[0] - self.origin;
        let b = tri[1] - self.origin;
        let c = tri[2] - self.origin;
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let ax = a[kx] - self.sx * a[kz];
        let ay = a[ky] - self.sy * a[kz];
        let bx = b[kx] - self.sx * b[kz];
        let by = b[ky] - self.sy * b[kz];
        let cx = c[kx] - self.sx * c[kz];
        let cy = c[ky] - self.sy * c[kz];
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let az = self.sz * a[kz];
        let bz = self.sz * b[kz];
        let cz = self.sz * c[kz];
        let t = (u * az + v * bz + w * cz) / det;
        if t > 0.0 && t <= t_max {
            Some(t)
        } else {
            None
        }
    }
}
