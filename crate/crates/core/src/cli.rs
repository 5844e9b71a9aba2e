//! Batch entry points behind the `camnet` binary. Every command reads one
//! scenario file; flags only override scalar fields, and every output carries
//! the hash of the effective configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::camera::{Pose, Viewpoint};
use crate::discretize::{voxelize_box, EnvironmentPoints, RoiBox};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_evaluate, dense_coverage_audit, AuditOptions, CoverageReport, CrossEvalTable, ExternalRow,
};
use crate::geometry::Bvh;
use crate::objective::{sample_quality_weights, QualityFunction};
use crate::optimize::{run_optimizer, OptimizerMethod, OptimizerReport};
use crate::scenario::Scenario;
use crate::session::{serve, CameraRecord, ServerConfig, ServerHandle, SessionExport, SessionState};
use crate::visibility::{build_visibility_matrix, compute_column, VisCounts, VisibilityMethod};
use crate::UnitQuaternion;

#[derive(Debug, Parser)]
#[command(name = "camnet", version, about = "Camera network design: optimize, evaluate, audit, benchmark and serve")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed used by the command.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the visibility method.
    #[arg(long)]
    pub method: Option<VisibilityMethod>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select k cameras from the candidate set.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Optimize for many sampled quality functions and cross-score the solutions.
    Crosseval {
        #[command(flatten)]
        common: Common,
        /// Number of sampled functions.
        #[arg(long)]
        functions: Option<usize>,
        /// Extra solution (optimize output or session export) to score against the table.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Dense coverage audit of a solution on a regular grid.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Solution file; the scenario's live cameras when absent.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Grid spacing in meters.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Latency and full-recompute timings over point and camera counts.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ROI point counts for the latency sweep.
        #[arg(long, value_delimiter = ',')]
        voxel_counts: Option<Vec<usize>>,
        /// Comma-separated live camera counts for the full-recompute sweep.
        #[arg(long, value_delimiter = ',')]
        camera_counts: Option<Vec<usize>>,
    },
    /// Interactive session over a WebSocket.
    Serve {
        #[command(flatten)]
        common: Common,
        /// Listening port; 0 picks a free one.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Sample redundancy quality functions.
    SampleFunctions {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        functions: Option<usize>,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Optimize { common }
            | Command::Crosseval { common, .. }
            | Command::Audit { common, .. }
            | Command::Bench { common, .. }
            | Command::Serve { common, .. }
            | Command::SampleFunctions { common, .. } => common,
        }
    }
}

/// Loads the scenario and applies the command's overrides.
pub fn scenario_for(command: &Command) -> Result<Scenario> {
    let common = command.common();
    let mut s = Scenario::load(&common.config)?;
    let c = &mut s.config;
    if let Some(m) = common.method {
        c.visibility.method = m;
    }
    match command {
        Command::Optimize { .. } => {
            if let Some(seed) = common.seed {
                c.optimizer.seed = seed;
            }
        }
        Command::Crosseval { functions, .. } | Command::SampleFunctions { functions, .. } => {
            if let Some(seed) = common.seed {
                c.crosseval.seed = seed;
            }
            if let Some(n) = functions {
                c.crosseval.functions = *n;
            }
        }
        Command::Audit { resolution, .. } => {
            if let Some(r) = resolution {
                c.audit.resolution = *r;
            }
        }
        Command::Bench { voxel_counts, camera_counts, .. } => {
            if let Some(seed) = common.seed {
                c.bench.seed = seed;
            }
            if let Some(v) = voxel_counts {
                c.bench.voxel_counts = v.clone();
            }
            if let Some(v) = camera_counts {
                c.bench.camera_counts = v.clone();
            }
        }
        Command::Serve { port, .. } => {
            if let Some(p) = port {
                c.server.port = *p;
            }
        }
    }
    s.validate()?;
    Ok(s)
}

pub fn run(cli: Cli) -> Result<()> {
    let scenario = scenario_for(&cli.command)?;
    let out = cli.command.common().out.clone();
    match &cli.command {
        Command::Optimize { .. } => cmd_optimize(&scenario, &out).map(drop),
        Command::Crosseval { solution, .. } => cmd_crosseval(&scenario, solution.as_deref(), &out).map(drop),
        Command::Audit { solution, .. } => cmd_audit(&scenario, solution.as_deref(), &out).map(drop),
        Command::Bench { .. } => cmd_bench(&scenario, &out).map(drop),
        Command::Serve { .. } => cmd_serve(&scenario, &out),
        Command::SampleFunctions { .. } => cmd_sample_functions(&scenario, &out).map(drop),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Selected cameras plus the deterministic part of the optimizer report.
/// Wall time lives in `report.json` so repeated runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub config_hash: String,
    pub method: OptimizerMethod,
    pub k: usize,
    pub ids: Vec<usize>,
    pub value: f64,
    pub gains: Vec<f64>,
    pub evaluations: u64,
    pub guarantee_void: bool,
    pub warnings: Vec<String>,
    pub cameras: Vec<CameraRecord>,
}

#[derive(Debug, Clone, Serialize)]
struct ReportFile<'a> {
    config_hash: &'a str,
    report: &'a OptimizerReport,
}

/// Any JSON file with a `cameras` list: optimize output or a session export.
pub fn load_solution_cameras(path: &Path) -> Result<Vec<Viewpoint>> {
    #[derive(Deserialize)]
    struct Cameras {
        cameras: Vec<CameraRecord>,
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let c: Cameras = serde_json::from_str(&text).map_err(|e| Error::Parse {
        format: "solution json",
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    c.cameras.iter().map(CameraRecord::viewpoint).collect()
}

pub fn cmd_optimize(s: &Scenario, out: &Path) -> Result<SolutionFile> {
    let hash = s.hash();
    let mesh = s.mesh()?;
    let points = s.points()?;
    let candidates = s.candidates()?;
    let bias = s.bias(&mesh);
    info!("{} triangles, {} points, {} candidates", mesh.triangle_count(), points.len(), candidates.len());
    let t = Instant::now();
    let matrix = build_visibility_matrix(&mesh, &candidates, &points, s.method(), bias);
    info!("visibility matrix in {:.2} s", t.elapsed().as_secs_f64());
    let q = s.quality()?;
    let reg = s.regularizer(&candidates)?;
    let report = run_optimizer(&matrix, &points, &s.optimizer(), &q, &reg)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let cameras = report
        .solution
        .ids
        .iter()
        .map(|&id| {
            let vp = candidates.get(id).expect("solution ids are candidate ids");
            CameraRecord::new(id as u32, vp.spec, &vp.pose)
        })
        .collect();
    let file = SolutionFile {
        config_hash: hash.clone(),
        method: report.method,
        k: report.solution.k,
        ids: report.solution.ids.clone(),
        value: report.value,
        gains: report.gains.clone(),
        evaluations: report.evaluations,
        guarantee_void: report.guarantee_void,
        warnings: report.warnings.clone(),
        cameras,
    };
    write_json(&out.join("solution.json"), &file)?;
    write_json(&out.join("report.json"), &ReportFile { config_hash: &hash, report: &report })?;
    write_with(&out.join("points.bin"), |w| points.write_binary(w, !points.has_unit_weights()))?;
    write_with(&out.join("visibility.cnvm"), |w| matrix.write_binary(w))?;
    info!("selected {:?}, value {}", file.ids, file.value);
    Ok(file)
}

/// `count` redundancy functions from consecutive seeds starting at `seed`.
pub fn sample_functions(count: usize, seed: u64, levels: usize) -> Result<Vec<QualityFunction>> {
    (0..count as u64)
        .map(|i| sample_quality_weights(seed.wrapping_add(i), levels).map(QualityFunction::redundancy))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionsFile {
    pub config_hash: String,
    pub seed: u64,
    pub levels: usize,
    pub functions: Vec<QualityFunction>,
}

pub fn cmd_sample_functions(s: &Scenario, out: &Path) -> Result<FunctionsFile> {
    let c = &s.config.crosseval;
    let file = FunctionsFile {
        config_hash: s.hash(),
        seed: c.seed,
        levels: c.levels,
        functions: sample_functions(c.functions, c.seed, c.levels)?,
    };
    write_json(&out.join("functions.json"), &file)?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEvalFile {
    pub config_hash: String,
    pub seed: u64,
    pub table: CrossEvalTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalRow>,
}

/// View counts of arbitrary cameras over `points`.
pub fn counts_for(
    mesh: &crate::geometry::TriangleMesh,
    cameras: &[Viewpoint],
    points: &EnvironmentPoints,
    method: VisibilityMethod,
    bias: impl Fn(&Viewpoint) -> f64 + Sync,
) -> VisCounts {
    use rayon::prelude::*;
    let bvh = (method == VisibilityMethod::Raycast).then(|| Bvh::build(mesh));
    let columns: Vec<_> = cameras
        .par_iter()
        .map(|vp| compute_column(mesh, bvh.as_ref(), vp, points.points(), method, bias(vp)))
        .collect();
    let mut counts = VisCounts::zeros(points.len());
    for c in &columns {
        counts.add_column(c);
    }
    counts
}

pub fn cmd_crosseval(s: &Scenario, solution: Option<&Path>, out: &Path) -> Result<CrossEvalFile> {
    let mesh = s.mesh()?;
    let points = s.points()?;
    let candidates = s.candidates()?;
    let matrix = build_visibility_matrix(&mesh, &candidates, &points, s.method(), s.bias(&mesh));
    let c = &s.config.crosseval;
    let functions = sample_functions(c.functions, c.seed, c.levels)?;
    let t = Instant::now();
    let table = cross_evaluate(&matrix, &points, &functions, &s.optimizer())?;
    info!("{0}×{0} cross evaluation in {1:.2} s", table.len(), t.elapsed().as_secs_f64());
    let external = match solution {
        Some(path) => {
            let cameras = load_solution_cameras(path)?;
            let bias = s.config.visibility.bias;
            let bounds = mesh.bounds();
            let counts = counts_for(&mesh, &cameras, &points, s.method(), |vp| {
                bias.unwrap_or_else(|| crate::visibility::default_depth_bias(&bounds, &vp.spec))
            });
            let row = table.score_counts(&counts, &points)?;
            write_with(&out.join("external.csv"), |w| {
                writeln!(w, "function,external")?;
                for (i, r) in row.ratios.iter().enumerate() {
                    writeln!(w, "{i},{r}")?;
                }
                Ok(())
            })?;
            Some(row)
        }
        None => None,
    };
    write_with(&out.join("crosseval.csv"), |w| table.write_csv(w))?;
    let file = CrossEvalFile { config_hash: s.hash(), seed: c.seed, table, external };
    write_json(&out.join("crosseval.json"), &file)?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFile {
    pub config_hash: String,
    pub resolution: f64,
    pub memory_budget: u64,
    pub cameras: usize,
    pub report: CoverageReport,
}

pub fn cmd_audit(s: &Scenario, solution: Option<&Path>, out: &Path) -> Result<AuditFile> {
    let mesh = s.mesh()?;
    let cameras = match solution {
        Some(path) => load_solution_cameras(path)?,
        None => {
            s.live_cameras()?.into_iter().enumerate().map(|(i, (spec, pose))| Viewpoint::new(i, spec, pose)).collect()
        }
    };
    let a = &s.config.audit;
    let options = AuditOptions {
        region: s.audit_region(),
        memory_budget: a.memory_budget_mb * 1024 * 1024,
        bias: s.config.visibility.bias,
    };
    let t = Instant::now();
    let report = dense_coverage_audit(&mesh, &cameras, a.resolution, &options)?;
    info!("audited {} points in {:.2} s: {:.4} covered", report.total, t.elapsed().as_secs_f64(), report.fraction);
    write_with(&out.join("uncovered.bin"), |w| report.write_uncovered(w))?;
    let file = AuditFile {
        config_hash: s.hash(),
        resolution: a.resolution,
        memory_budget: options.memory_budget,
        cameras: cameras.len(),
        report,
    };
    write_json(&out.join("audit.json"), &file)?;
    Ok(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_points: usize,
    pub m_cameras: usize,
    /// Mean single-camera move latency.
    pub mean_latency_ms: f64,
    /// All cameras recomputed from scratch.
    pub full_recompute_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`; `r_squared` is 1 when `y` is constant
/// and fits exactly.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (intercept + slope * a)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchFile {
    pub config_hash: String,
    pub voxel_sweep: Vec<BenchRow>,
    pub camera_sweep: Vec<BenchRow>,
    /// Move latency against point count.
    pub latency_fit: Option<LinearFit>,
    /// Full recompute time against camera count.
    pub recompute_fit: Option<LinearFit>,
}

/// Bench cameras: the scenario's live cameras first, then candidates, cycling
/// if more are requested than exist.
fn bench_poses(s: &Scenario) -> Result<Vec<(crate::camera::CameraSpec, Pose)>> {
    let mut poses = s.live_cameras()?;
    if let Ok(c) = s.candidates() {
        poses.extend(c.viewpoints().iter().map(|v| (v.spec, v.pose)));
    }
    if poses.is_empty() {
        return Err(Error::config("cameras", "bench needs live cameras or candidates"));
    }
    Ok(poses)
}

fn take_cycled<T: Clone>(xs: &[T], n: usize) -> Vec<T> {
    xs.iter().cycle().take(n).cloned().collect()
}

fn bench_grid(s: &Scenario, mesh: &crate::geometry::TriangleMesh, n: usize) -> Result<EnvironmentPoints> {
    let b = match s.config.roi.first() {
        Some(_) => s.roi_boxes()?[0],
        None => RoiBox::axis_aligned(&mesh.bounds(), [1, 1, 1])?,
    };
    voxelize_box(&RoiBox::with_target_count(b.center, b.half_extents, b.orientation, n)?)
}

/// Times `moves` single-camera moves (each camera yawed back and forth by a
/// few degrees in turn) and one full recompute.
pub fn bench_point(
    mesh: Arc<crate::geometry::TriangleMesh>,
    points: Arc<EnvironmentPoints>,
    cameras: &[(crate::camera::CameraSpec, Pose)],
    method: VisibilityMethod,
    bias: Option<f64>,
    moves: usize,
) -> Result<BenchRow> {
    let mut state = SessionState::new(mesh, points.clone(), method, bias, cameras)?;
    let ids = state.camera_ids();
    let mut total = 0.0;
    for i in 0..moves {
        let id = ids[i % ids.len()];
        let (_, base) = cameras[i % cameras.len()];
        let yaw = if (i / ids.len()) % 2 == 0 { 2.0f64 } else { 0.0 };
        let q = UnitQuaternion::from_axis_angle(&crate::Vector3::z_axis(), yaw.to_radians()) * base.orientation;
        total += state.move_camera(id, Pose::new(base.position, q))?.recompute_ms;
    }
    let t = Instant::now();
    std::hint::black_box(state.recompute_from_scratch());
    Ok(BenchRow {
        n_points: points.len(),
        m_cameras: ids.len(),
        mean_latency_ms: total / moves as f64,
        full_recompute_ms: t.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn cmd_bench(s: &Scenario, out: &Path) -> Result<BenchFile> {
    let b = &s.config.bench;
    let mesh = Arc::new(s.mesh()?);
    let poses = bench_poses(s)?;
    let bias = s.config.visibility.bias;
    let mut voxel_sweep = Vec::new();
    for &n in &b.voxel_counts {
        let points = Arc::new(bench_grid(s, &mesh, n)?);
        let row = bench_point(mesh.clone(), points, &take_cycled(&poses, b.cameras), s.method(), bias, b.moves)?;
        info!("voxels {row:?}");
        voxel_sweep.push(row);
    }
    let fixed = b.voxel_counts.first().copied().unwrap_or(50_000);
    let points = Arc::new(bench_grid(s, &mesh, fixed)?);
    let mut camera_sweep = Vec::new();
    for &m in &b.camera_counts {
        let row = bench_point(mesh.clone(), points.clone(), &take_cycled(&poses, m), s.method(), bias, b.moves)?;
        info!("cameras {row:?}");
        camera_sweep.push(row);
    }
    let fit = |rows: &[BenchRow], x: fn(&BenchRow) -> f64, y: fn(&BenchRow) -> f64| {
        linear_fit(&rows.iter().map(x).collect::<Vec<_>>(), &rows.iter().map(y).collect::<Vec<_>>())
    };
    let file = BenchFile {
        config_hash: s.hash(),
        latency_fit: fit(&voxel_sweep, |r| r.n_points as f64, |r| r.mean_latency_ms),
        recompute_fit: fit(&camera_sweep, |r| r.m_cameras as f64, |r| r.full_recompute_ms),
        voxel_sweep,
        camera_sweep,
    };
    write_with(&out.join("bench.csv"), |w| {
        writeln!(w, "sweep,n_points,m_cameras,mean_latency_ms,full_recompute_ms")?;
        for (name, rows) in [("voxels", &file.voxel_sweep), ("cameras", &file.camera_sweep)] {
            for r in rows {
                writeln!(w, "{name},{},{},{},{}", r.n_points, r.m_cameras, r.mean_latency_ms, r.full_recompute_ms)?;
            }
        }
        Ok(())
    })?;
    write_json(&out.join("bench.json"), &file)?;
    Ok(file)
}

/// Builds the session and starts the service; the final export goes to
/// `out/session_export.json` on shutdown.
pub fn start_server(s: &Scenario, out: &Path) -> Result<ServerHandle> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let state = s.session()?;
    let host: std::net::IpAddr =
        s.config.server.host.parse().map_err(|e| Error::config("server.host", format!("{e}")))?;
    let config = ServerConfig {
        addr: (host, s.config.server.port).into(),
        session_name: s.config.scene.builtin.clone().unwrap_or_else(|| "session".into()),
        export_path: Some(out.join("session_export.json")),
        config_hash: Some(s.hash()),
    };
    serve(state, config)
}

/// Serves until Ctrl-C, then writes the export.
pub fn cmd_serve(s: &Scenario, out: &Path) -> Result<()> {
    let handle = start_server(s, out)?;
    println!("listening on {}", handle.url());
    let (tx, rx) = std::sync::mpsc::channel();
    ctrlc::set_handler(move || {
        let _ = tx.send(());
    })
    .map_err(|e| Error::invalid(format!("cannot install signal handler: {e}")))?;
    let _ = rx.recv();
    let export: SessionExport = handle.shutdown()?;
    println!(
        "revision {}, {} cameras, coverage {:.4}; export in {}",
        export.revision,
        export.cameras.len(),
        export.coverage,
        out.join("session_export.json").display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }

    #[test]
    fn fit_matches_hand_computation() {
        // y = 0, 1, 1 at x = 0, 1, 2: slope 1/2, intercept 1/6, R² = 3/4.
        let f = linear_fit(&[0.0, 1.0, 2.0], &[0.0, 1.0, 1.0]).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 1.0 / 6.0).abs() < 1e-12);
        assert!((f.r_squared - 0.75).abs() < 1e-12);
    }

    #[test]
    fn parse_flags() {
        let cli = Cli::try_parse_from([
            "camnet",
            "bench",
            "--config",
            "a.toml",
            "--seed",
            "4",
            "--out",
            "o",
            "--method",
            "raycast",
            "--voxel-counts",
            "10,20",
        ])
        .unwrap();
        match cli.command {
            Command::Bench { common, voxel_counts, .. } => {
                assert_eq!(common.seed, Some(4));
                assert_eq!(common.method, Some(VisibilityMethod::Raycast));
                assert_eq!(voxel_counts, Some(vec![10, 20]));
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["camnet", "serve", "--config", "a.toml", "--port", "70000"]).is_err());
        assert!(Cli::try_parse_from(["camnet", "audit", "--config", "a", "--resolution", "x"]).is_err());
        assert!(Cli::try_parse_from(["camnet", "optimize", "--config", "a", "--method", "magic"]).is_err());
    }

    #[test]
    fn sampled_functions_are_reproducible() {
        let a = sample_functions(5, 11, 6).unwrap();
        assert_eq!(a, sample_functions(5, 11, 6).unwrap());
        assert_ne!(a[0], a[1]);
        assert_eq!(a[1], sample_functions(1, 12, 6).unwrap()[0]);
    }
}
