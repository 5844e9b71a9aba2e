//! Cross-evaluation of solutions across quality functions, and dense coverage audits.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{CameraTransform, Viewpoint};
use crate::discretize::{write_point_file, EnvironmentPoints, RoiBox};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, TriangleMesh};
use crate::objective::{covered_fraction, quality_of_counts, QualityFunction, Regularizer, Solution};
use crate::optimize::{run_optimizer, OptimizerConfig};
use crate::visibility::{
    default_depth_bias, render_depth_with, zbuffer_test, BitVec, DepthBuffer, VisCounts, VisibilityMatrix,
};
use crate::Point3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEvalTable {
    pub functions: Vec<QualityFunction>,
    pub optimizer: OptimizerConfig,
    /// `solutions[i]` was optimized for `functions[i]`.
    pub solutions: Vec<Solution>,
    /// `G_i(U_i)`.
    pub self_values: Vec<f64>,
    /// `ratios[i][j] = G_i(U_j) / G_i(U_i)`.
    pub ratios: Vec<Vec<f64>>,
    /// Weighted coverage of each solution.
    pub coverage: Vec<f64>,
    /// Arithmetic mean over functions of each solution's ratios (column means).
    pub mean_ratio: Vec<f64>,
}

/// One external solution scored against a table's functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalRow {
    pub ratios: Vec<f64>,
    pub coverage: f64,
    pub mean_ratio: f64,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    xs.sum::<f64>() / n as f64
}

/// Optimizes one solution per function (in parallel) and scores every solution
/// under every function. Ratios are not clamped; greedy is not exact, so entries
/// above 1 occur.
pub fn cross_evaluate(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    functions: &[QualityFunction],
    optimizer: &OptimizerConfig,
) -> Result<CrossEvalTable> {
    if functions.is_empty() {
        return Err(Error::invalid("cross evaluation needs at least one quality function"));
    }
    let reg = Regularizer::none();
    let solutions: Vec<Solution> = functions
        .par_iter()
        .map(|q| run_optimizer(matrix, points, optimizer, q, &reg).map(|r| r.solution))
        .collect::<Result<_>>()?;
    let counts: Vec<VisCounts> = solutions.par_iter().map(|s| matrix.f_counts(&s.ids)).collect::<Result<_>>()?;
    // values[i][j] = G_i(U_j)
    let values: Vec<Vec<f64>> = functions
        .par_iter()
        .map(|q| {
            let table = q.table();
            counts.iter().map(|c| quality_of_counts(c, points, &table)).collect()
        })
        .collect();
    for (i, row) in values.iter().enumerate() {
        if !(row[i] > 0.0) {
            return Err(Error::DegenerateObjective { index: i, name: functions[i].name() });
        }
    }
    let ratios: Vec<Vec<f64>> =
        values.iter().enumerate().map(|(i, row)| row.iter().map(|v| v / row[i]).collect()).collect();
    let n = functions.len();
    let mean_ratio = (0..n).map(|j| mean(ratios.iter().map(|r| r[j]))).collect();
    Ok(CrossEvalTable {
        functions: functions.to_vec(),
        optimizer: optimizer.clone(),
        solutions,
        self_values: (0..n).map(|i| values[i][i]).collect(),
        ratios,
        coverage: counts.iter().map(|c| covered_fraction(c, points)).collect(),
        mean_ratio,
    })
}

impl CrossEvalTable {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Scores view counts produced by any camera set against this table.
    pub fn score_counts(&self, counts: &VisCounts, points: &EnvironmentPoints) -> Result<ExternalRow> {
        if counts.len() != points.len() {
            return Err(Error::Dimension(format!("{} counts for {} points", counts.len(), points.len())));
        }
        let mut ratios = Vec::with_capacity(self.len());
        for (i, q) in self.functions.iter().enumerate() {
            let denom = self.self_values[i];
            if !(denom > 0.0) {
                return Err(Error::DegenerateObjective { index: i, name: q.name() });
            }
            ratios.push(quality_of_counts(counts, points, &q.table()) / denom);
        }
        Ok(ExternalRow { mean_ratio: mean(ratios.iter().copied()), ratios, coverage: covered_fraction(counts, points) })
    }

    /// Ratio matrix as CSV: a header `function,U0,U1,…` then one row per function.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "function")?;
        for j in 0..self.len() {
            write!(w, ",U{j}")?;
        }
        writeln!(w)?;
        for (i, row) in self.ratios.iter().enumerate() {
            write!(w, "{i}")?;
            for r in row {
                // Display for f64 is the shortest string that round-trips.
                write!(w, ",{r}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Reads a ratio matrix written by [`CrossEvalTable::write_csv`].
pub fn read_ratio_csv<R: BufRead>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header"))??;
    let cols = header.split(',').count().saturating_sub(1);
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        fields.next();
        let row = fields
            .map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(idx + 2, &e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != cols {
            return Err(parse_err(idx + 2, &format!("expected {cols} values, found {}", row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse { format: "csv", location: format!("line {line}"), message: message.to_string() }
}

/// `G_i(solution) / G_i(U_i)` for every function of `table`, plus coverage.
/// An empty solution is allowed and scores zero.
pub fn evaluate_external_solution(
    matrix: &VisibilityMatrix,
    points: &EnvironmentPoints,
    solution: &Solution,
    table: &CrossEvalTable,
) -> Result<ExternalRow> {
    let counts = matrix.f_counts(&solution.ids)?;
    table.score_counts(&counts, points)
}

pub const DEFAULT_AUDIT_MEMORY_BUDGET: u64 = 512 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    /// Region to resample; the mesh bounds when unset.
    pub region: Option<Aabb>,
    pub memory_budget: u64,
    /// Depth bias; derived from the scene bounds per camera when unset.
    pub bias: Option<f64>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { region: None, memory_budget: DEFAULT_AUDIT_MEMORY_BUDGET, bias: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub grid: RoiBox,
    pub total: u64,
    pub covered: u64,
    pub fraction: f64,
    /// `histogram[c]` = number of points seen by exactly `c` cameras.
    pub histogram: Vec<u64>,
    /// Peak working-set estimate in bytes.
    pub memory_estimate: u64,
    /// Grid points nobody sees, as a bitmask over linear voxel indices.
    #[serde(skip)]
    pub uncovered: BitVec,
}

impl CoverageReport {
    pub fn uncovered_count(&self) -> u64 {
        self.total - self.covered
    }

    pub fn uncovered_points(&self) -> impl Iterator<Item = Point3> + '_ {
        let [nx, ny, _] = self.grid.resolution;
        self.uncovered.iter_ones().map(move |idx| {
            let (i, rest) = (idx % nx, idx / nx);
            self.grid.voxel_center(i, rest % ny, rest / ny)
        })
    }

    /// Uncovered points in the binary point-file format.
    pub fn write_uncovered<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let points = self.uncovered_points().map(|p| [p.x as f32, p.y as f32, p.z as f32]);
        write_point_file(&mut w, points, self.uncovered_count() as usize, None)
    }
}

const POINT_BYTES: u64 = (std::mem::size_of::<Point3>() + std::mem::size_of::<u16>()) as u64;

/// Resamples the region on a regular grid and counts, per point, how many of
/// `cameras` see it. Depth buffers are rendered once; the grid is processed in
/// z-slabs sized to the memory budget.
pub fn dense_coverage_audit(
    mesh: &TriangleMesh,
    cameras: &[Viewpoint],
    resolution: f64,
    options: &AuditOptions,
) -> Result<CoverageReport> {
    if !(resolution > 0.0) {
        return Err(Error::invalid(format!("audit resolution must be positive, got {resolution}")));
    }
    let region = options.region.unwrap_or_else(|| mesh.bounds());
    let grid = RoiBox::covering(&region, resolution)?;
    let [nx, ny, nz] = grid.resolution;
    let total = (nx * ny * nz) as u64;
    let layer = (nx * ny) as u64;

    let depth_bytes: u64 = cameras.iter().map(|c| c.spec.width() as u64 * c.spec.height() as u64 * 4).sum();
    let fixed = depth_bytes + total.div_ceil(8);
    // A slab holds its points and counts plus one scratch visibility column.
    let per_layer = layer * POINT_BYTES + layer.div_ceil(8);
    let required = fixed + per_layer;
    if required > options.memory_budget {
        return Err(Error::MemoryBudget { required, budget: options.memory_budget });
    }
    let layers_per_slab = (((options.memory_budget - fixed) / per_layer) as usize).clamp(1, nz);
    let memory_estimate = fixed + per_layer * layers_per_slab as u64;

    let scene_bounds = mesh.bounds();
    let rendered: Vec<(CameraTransform, DepthBuffer, f64)> = cameras
        .par_iter()
        .map(|vp| {
            let cam = CameraTransform::of(vp);
            let depth = render_depth_with(mesh, &cam);
            let bias = options.bias.unwrap_or_else(|| default_depth_bias(&scene_bounds, &vp.spec));
            (cam, depth, bias)
        })
        .collect();

    let mut histogram = vec![0u64; cameras.len() + 1];
    let mut uncovered = BitVec::zeros(total as usize);
    let mut covered = 0u64;
    let mut k0 = 0;
    while k0 < nz {
        let k1 = (k0 + layers_per_slab).min(nz);
        let slab: Vec<Point3> = (k0..k1)
            .flat_map(|k| (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j, k))))
            .map(|(i, j, k)| grid.voxel_center(i, j, k))
            .collect();
        let mut counts = vec![0u16; slab.len()];
        for (cam, depth, bias) in &rendered {
            let col = zbuffer_test(depth, cam, &slab, *bias);
            for e in col.iter_ones() {
                counts[e] += 1;
            }
        }
        let offset = k0 * nx * ny;
        for (e, &c) in counts.iter().enumerate() {
            histogram[c as usize] += 1;
            if c == 0 {
                uncovered.set(offset + e);
            } else {
                covered += 1;
            }
        }
        k0 = k1;
    }
    Ok(CoverageReport {
        grid,
        total,
        covered,
        fraction: if total == 0 { 0.0 } else { covered as f64 / total as f64 },
        histogram,
        memory_estimate,
        uncovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{CameraSpec, Pose};
    use crate::discretize::rng;
    use crate::objective::{g_eval, sample_quality_weights, QualityWeights};
    use crate::optimize::OptimizerMethod;
    use crate::scenes;
    use crate::visibility::visible_points_zbuffer;
    use crate::Vector3;
    use rand::Rng;

    fn toy(seed: u64, n: usize, m: usize) -> (VisibilityMatrix, EnvironmentPoints) {
        let mut r = rng(seed);
        let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..m).map(|_| r.gen_bool(0.3)).collect()).collect();
        (VisibilityMatrix::from_rows(&rows, m).unwrap(), EnvironmentPoints::new(vec![Point3::origin(); n]))
    }

    fn functions(count: u64) -> Vec<QualityFunction> {
        (0..count).map(|s| QualityFunction::redundancy(sample_quality_weights(s, 6).unwrap())).collect()
    }

    #[test]
    fn single_function_table() {
        let (m, p) = toy(1, 40, 12);
        let t = cross_evaluate(&m, &p, &functions(1), &OptimizerConfig::new(OptimizerMethod::LazyGreedy, 3)).unwrap();
        assert_eq!(t.ratios, vec![vec![1.0]]);
        assert_eq!(t.mean_ratio, vec![1.0]);
    }

    #[test]
    fn ratios_match_fresh_evaluation() {
        let (m, p) = toy(2, 60, 12);
        let fs = functions(5);
        let t = cross_evaluate(&m, &p, &fs, &OptimizerConfig::new(OptimizerMethod::Greedy, 3)).unwrap();
        for (i, f) in fs.iter().enumerate() {
            assert_eq!(t.ratios[i][i], 1.0);
            for j in 0..5 {
                let num = g_eval(&m, &p, &t.solutions[j].ids, f).unwrap();
                let den = g_eval(&m, &p, &t.solutions[i].ids, f).unwrap();
                assert!((t.ratios[i][j] - num / den).abs() <= 1e-12);
                assert!(t.ratios[i][j] > 0.0);
            }
        }
    }

    #[test]
    fn ratios_invariant_under_weight_scaling() {
        let (m, p) = toy(3, 60, 12);
        let base = [0.4, 0.3, 0.2, 0.1];
        let scaled: Vec<f64> = base.iter().map(|x| x * 3.0).collect();
        let qa = QualityFunction::redundancy(QualityWeights::new(base.to_vec()).unwrap());
        let qb = QualityFunction::CustomTable {
            table: crate::objective::CustomTable::new(
                scaled
                    .iter()
                    .scan(0.0, |s, x| {
                        *s += x;
                        Some(*s)
                    })
                    .collect(),
            )
            .unwrap(),
        };
        let other = functions(1).remove(0);
        let cfg = OptimizerConfig::new(OptimizerMethod::Greedy, 3);
        let ta = cross_evaluate(&m, &p, &[qa, other.clone()], &cfg).unwrap();
        let tb = cross_evaluate(&m, &p, &[qb, other], &cfg).unwrap();
        assert_eq!(ta.solutions, tb.solutions);
        for j in 0..2 {
            assert!((ta.ratios[0][j] - tb.ratios[0][j]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_function_is_named() {
        let m = VisibilityMatrix::from_rows(&[vec![false, false], vec![false, false]], 2).unwrap();
        let p = EnvironmentPoints::new(vec![Point3::origin(); 2]);
        let err = cross_evaluate(&m, &p, &[QualityFunction::Scp], &OptimizerConfig::new(OptimizerMethod::Greedy, 1))
            .unwrap_err();
        assert!(err.to_string().contains("scp"), "{err}");
    }

    #[test]
    fn external_rows() {
        let (m, p) = toy(4, 50, 12);
        let t = cross_evaluate(&m, &p, &functions(4), &OptimizerConfig::new(OptimizerMethod::Greedy, 3)).unwrap();
        for j in 0..4 {
            let row = evaluate_external_solution(&m, &p, &t.solutions[j], &t).unwrap();
            let col: Vec<f64> = t.ratios.iter().map(|r| r[j]).collect();
            assert_eq!(row.ratios, col);
            assert_eq!(row.coverage, t.coverage[j]);
            assert_eq!(row.mean_ratio, t.mean_ratio[j]);
        }
        let empty = evaluate_external_solution(&m, &p, &Solution::empty(), &t).unwrap();
        assert_eq!(empty.coverage, 0.0);
        assert!(empty.ratios.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn csv_roundtrip() {
        let (m, p) = toy(5, 80, 12);
        let t = cross_evaluate(&m, &p, &functions(6), &OptimizerConfig::new(OptimizerMethod::LazyGreedy, 4)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(read_ratio_csv(&buf[..]).unwrap(), t.ratios);
        let json = serde_json::to_string(&t).unwrap();
        let back: CrossEvalTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(read_ratio_csv(&b"function,U0\n0,abc\n"[..]).is_err());
    }

    fn box_scene_cameras() -> (TriangleMesh, Vec<Viewpoint>) {
        let mesh = scenes::clutter(scenes::ClutterParams::small()).mesh;
        let spec = CameraSpec::new(80.0, (120, 90), 0.2, 50.0).unwrap();
        let cams = [(-12.0, -12.0), (12.0, 12.0), (12.0, -12.0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                let pose = Pose::look_at(Point3::new(x, y, 8.0), Point3::new(0.0, 0.0, 1.0), Vector3::z()).unwrap();
                Viewpoint::new(i, spec, pose)
            })
            .collect();
        (mesh, cams)
    }

    #[test]
    fn audit_matches_materialized_recount() {
        let (mesh, cams) = box_scene_cameras();
        let region = Aabb::new(Point3::new(-10.0, -10.0, 0.0), Point3::new(10.0, 10.0, 4.0));
        // A tight budget forces several slabs.
        let opts = AuditOptions { region: Some(region), memory_budget: 600_000, bias: None };
        let report = dense_coverage_audit(&mesh, &cams, 0.4, &opts).unwrap();
        assert!(report.memory_estimate <= 600_000);
        let pts = crate::discretize::voxelize_box(&report.grid).unwrap();
        let mut counts = VisCounts::zeros(pts.len());
        for vp in &cams {
            let depth = crate::visibility::render_depth(&mesh, vp);
            let bias = default_depth_bias(&mesh.bounds(), &vp.spec);
            counts.add_column(&visible_points_zbuffer(&depth, vp, &pts, bias));
        }
        assert_eq!(report.total as usize, pts.len());
        assert_eq!(report.covered as usize, counts.covered());
        assert_eq!(report.histogram.iter().sum::<u64>(), report.total);
        let mut buf = Vec::new();
        report.write_uncovered(&mut buf).unwrap();
        let back = EnvironmentPoints::read_binary(&buf[..]).unwrap();
        assert_eq!(back.len() as u64, report.uncovered_count());
    }

    #[test]
    fn audit_without_cameras_and_budget_errors() {
        let (mesh, _) = box_scene_cameras();
        let r = dense_coverage_audit(&mesh, &[], 1.0, &AuditOptions::default()).unwrap();
        assert_eq!(r.covered, 0);
        assert_eq!(r.fraction, 0.0);
        let err = dense_coverage_audit(&mesh, &[], 0.05, &AuditOptions { memory_budget: 1000, ..Default::default() })
            .unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { budget: 1000, .. }));
        assert!(dense_coverage_audit(&mesh, &[], 0.0, &AuditOptions::default()).is_err());
    }

    #[test]
    fn audit_is_stable_across_resolutions() {
        let (mesh, cams) = box_scene_cameras();
        let region = Aabb::new(Point3::new(-8.0, -8.0, 0.0), Point3::new(8.0, 8.0, 4.0));
        let opts = AuditOptions { region: Some(region), ..Default::default() };
        let coarse = dense_coverage_audit(&mesh, &cams, 0.4, &opts).unwrap();
        let fine = dense_coverage_audit(&mesh, &cams, 0.2, &opts).unwrap();
        assert!((coarse.fraction - fine.fraction).abs() <= 0.02, "{} vs {}", coarse.fraction, fine.fraction);
    }
}
