//! TOML scenario files: scene, region of interest, candidates, objective and
//! optimizer settings in one place.
//!
//! ```toml
//! [scene]
//! builtin = "harbour"            # or: path = "yard.ply", format = "ply"
//!
//! [camera]
//! perspective_angle = 70.0
//! resolution = [160, 100]
//! min_range = 0.5
//! max_range = 60.0
//!
//! [[roi]]
//! center = [0.0, 0.0, 2.0]
//! half_extents = [24.0, 11.0, 2.0]
//! target_points = 12000          # or: resolution = [nx, ny, nz]
//!
//! [[sample]]
//! min = [-22.0, -2.4, 0.1]
//! max = [23.5, 2.4, 3.0]
//! count = 4000
//! seed = 1
//!
//! [candidates]
//! positions_per_segment = 20
//! segments = [{ start = [-25.0, 13.0, 12.0], end = [25.0, 13.0, 12.0] }]
//! orientations = { yaws = [0.0, 72.0], depressions = [25.0, 45.0] }
//!
//! [quality]
//! kind = "redundancy"
//! seed = 3                       # or: weights = [0.5, 0.3, 0.2]
//!
//! [optimizer]
//! method = "lazy_greedy"
//! k = 10
//! ```
//!
//! Relative scene paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::camera::{CameraSpec, Pose};
use crate::discretize::{
    merge_point_sets, sample_area_viewpoints, sample_points_uniform, sample_segment_viewpoints, voxelize_box,
    CandidateSet, EnvironmentPoints, Polygon2, Provenance, RoiBox, SampleRegion, Segment, WORLD_UP,
};
use crate::error::{Error, Result};
use crate::evaluation::DEFAULT_AUDIT_MEMORY_BUDGET;
use crate::geometry::{load_mesh, Aabb, MeshFormat, TriangleMesh};
use crate::objective::{
    sample_quality_weights, CustomTable, QualityFunction, QualityWeights, Regularizer, DEFAULT_LEVELS,
};
use crate::optimize::{OptimizerConfig, OptimizerMethod, DEFAULT_BRUTE_FORCE_BUDGET};
use crate::scenes::{self, yaw_pitch_orientations};
use crate::session::SessionState;
use crate::visibility::{default_depth_bias, VisibilityMethod};
use crate::{Point3, UnitQuaternion, Vector3};

pub const DEFAULT_PORT: u16 = 8765;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scene: SceneConfig,
    pub camera: CameraConfig,
    #[serde(default)]
    pub roi: Vec<RoiConfig>,
    #[serde(default)]
    pub sample: Vec<SampleConfig>,
    #[serde(default)]
    pub candidates: CandidatesConfig,
    #[serde(default)]
    pub cameras: Vec<LiveCameraConfig>,
    #[serde(default)]
    pub quality: QualityConfig,
    #[serde(default)]
    pub regularizer: RegularizerConfig,
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub crosseval: CrossEvalConfig,
    #[serde(default)]
    pub visibility: VisibilityConfig,
    #[serde(default)]
    pub server: ServerSection,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<MeshFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub perspective_angle: f64,
    pub resolution: [u32; 2],
    pub min_range: f64,
    pub max_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiConfig {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    /// `[x, y, z, w]`; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatesConfig {
    #[serde(default)]
    pub segments: Vec<SegmentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_per_segment: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientations: Option<OrientationsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<AreaConfig>,
    #[serde(default)]
    pub explicit: Vec<PoseConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub start: [f64; 3],
    pub end: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrientationsConfig {
    /// Explicit `[x, y, z, w]` quaternions.
    List(Vec<[f64; 4]>),
    /// Every yaw (degrees from +x) paired with every depression angle (degrees below horizontal).
    YawPitch { yaws: Vec<f64>, depressions: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub polygon: Vec<[f64; 2]>,
    pub height: f64,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseConfig {
    pub position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quaternion: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub look_at: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveCameraConfig {
    #[serde(flatten)]
    pub pose: PoseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<CameraConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig { kind: "scp".into(), weights: None, seed: None, levels: None, cap: None, table: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerConfig {
    #[serde(default)]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default)]
    pub method: OptimizerMethod,
    pub k: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BRUTE_FORCE_BUDGET as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossEvalConfig {
    #[serde(default = "default_functions")]
    pub functions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_functions() -> usize {
    60
}

fn default_levels() -> usize {
    DEFAULT_LEVELS
}

impl Default for CrossEvalConfig {
    fn default() -> Self {
        CrossEvalConfig { functions: default_functions(), seed: 0, levels: DEFAULT_LEVELS }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityConfig {
    #[serde(default)]
    pub method: VisibilityMethod,
    /// Depth bias in meters; `1.5 · scene diagonal / max(width, height)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerSection {
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_host")]
    pub host: String,
}

fn default_port() -> u16 {
    DEFAULT_PORT
}

fn default_host() -> String {
    "127.0.0.1".into()
}

impl Default for ServerSection {
    fn default() -> Self {
        ServerSection { port: DEFAULT_PORT, host: default_host() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default = "default_audit_resolution")]
    pub resolution: f64,
    #[serde(default = "default_memory_mb")]
    pub memory_budget_mb: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<[f64; 3]>,
}

fn default_audit_resolution() -> f64 {
    0.1
}

fn default_memory_mb() -> u64 {
    DEFAULT_AUDIT_MEMORY_BUDGET / (1024 * 1024)
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            resolution: default_audit_resolution(),
            memory_budget_mb: default_memory_mb(),
            min: None,
            max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Point counts for the latency sweep.
    #[serde(default = "default_voxel_counts")]
    pub voxel_counts: Vec<usize>,
    /// Camera counts for the full-recompute sweep.
    #[serde(default = "default_camera_counts")]
    pub camera_counts: Vec<usize>,
    /// Cameras in the voxel sweep.
    #[serde(default = "default_bench_cameras")]
    pub cameras: usize,
    /// Single-camera moves timed per configuration.
    #[serde(default = "default_moves")]
    pub moves: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_voxel_counts() -> Vec<usize> {
    vec![100_000, 500_000, 1_000_000, 1_500_000, 2_000_000]
}

fn default_camera_counts() -> Vec<usize> {
    vec![1, 5, 10, 20, 30]
}

fn default_bench_cameras() -> usize {
    10
}

fn default_moves() -> usize {
    10
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            voxel_counts: default_voxel_counts(),
            camera_counts: default_camera_counts(),
            cameras: default_bench_cameras(),
            moves: default_moves(),
            seed: 0,
        }
    }
}

fn cfg_err(path: impl Into<String>, e: impl std::fmt::Display) -> Error {
    Error::config(path, e.to_string())
}

fn pose_from(p: &PoseConfig, path: &str) -> Result<Pose> {
    match (&p.quaternion, &p.look_at) {
        (Some(q), None) => Pose::from_xyzw(p.position, *q).map_err(|e| cfg_err(format!("{path}.quaternion"), e)),
        (None, Some(t)) => Pose::look_at(Point3::from(p.position), Point3::from(*t), WORLD_UP)
            .map_err(|e| cfg_err(format!("{path}.look_at"), e)),
        _ => Err(cfg_err(path, "exactly one of `quaternion` or `look_at` is required")),
    }
}

fn spec_from(c: &CameraConfig, path: &str) -> Result<CameraSpec> {
    CameraSpec::new(c.perspective_angle, (c.resolution[0], c.resolution[1]), c.min_range, c.max_range)
        .map_err(|e| cfg_err(path, e))
}

fn aabb_from(min: [f64; 3], max: [f64; 3], path: &str) -> Result<Aabb> {
    if (0..3).any(|i| !(min[i] < max[i])) {
        return Err(cfg_err(path, format!("min {min:?} must be below max {max:?} on every axis")));
    }
    Ok(Aabb::new(Point3::from(min), Point3::from(max)))
}

/// A validated scenario and the hash identifying it in every output.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let span = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_default();
            Error::config(span, e.message())
        })?;
        let s = Scenario { config, base_dir: base_dir.into() };
        s.validate()?;
        Ok(s)
    }

    pub fn from_config(config: ScenarioConfig, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let s = Scenario { config, base_dir: base_dir.into() };
        s.validate()?;
        Ok(s)
    }

    /// Checks every field against the ranges its consumer demands, naming the field on failure.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        match (&c.scene.builtin, &c.scene.path) {
            (Some(name), None) => {
                if !scenes::BUILTIN_SCENES.contains(&name.as_str()) {
                    return Err(cfg_err(
                        "scene.builtin",
                        format!("unknown scene `{name}`, expected one of {:?}", scenes::BUILTIN_SCENES),
                    ));
                }
            }
            (None, Some(p)) => {
                let full = self.base_dir.join(p);
                if !full.is_file() {
                    return Err(cfg_err("scene.path", format!("{} does not exist", full.display())));
                }
                if c.scene.format.is_none() && MeshFormat::from_extension(&full).is_none() {
                    return Err(cfg_err("scene.format", "cannot infer the format from the extension"));
                }
            }
            _ => return Err(cfg_err("scene", "exactly one of `builtin` or `path` is required")),
        }
        spec_from(&c.camera, "camera")?;
        if c.roi.is_empty() && c.sample.is_empty() {
            return Err(cfg_err("roi", "at least one `roi` or `sample` entry is required"));
        }
        for (i, r) in c.roi.iter().enumerate() {
            self.roi_box(r, &format!("roi[{i}]"))?;
        }
        for (i, s) in c.sample.iter().enumerate() {
            aabb_from(s.min, s.max, &format!("sample[{i}]"))?;
            if s.count == 0 {
                return Err(cfg_err(format!("sample[{i}].count"), "must be at least 1"));
            }
        }
        let cand = &c.candidates;
        if !cand.segments.is_empty() {
            match cand.positions_per_segment {
                Some(n) if n >= 2 => {}
                _ => {
                    return Err(cfg_err(
                        "candidates.positions_per_segment",
                        "must be at least 2 when segments are given",
                    ))
                }
            }
            self.orientations()?;
        }
        if let Some(a) = &cand.area {
            Polygon2::new(a.polygon.clone()).map_err(|e| cfg_err("candidates.area.polygon", e))?;
            if a.count == 0 {
                return Err(cfg_err("candidates.area.count", "must be at least 1"));
            }
        }
        for (i, p) in cand.explicit.iter().enumerate() {
            pose_from(p, &format!("candidates.explicit[{i}]"))?;
        }
        for (i, cam) in c.cameras.iter().enumerate() {
            pose_from(&cam.pose, &format!("cameras[{i}]"))?;
            if let Some(s) = &cam.spec {
                spec_from(s, &format!("cameras[{i}].spec"))?;
            }
        }
        self.quality()?;
        if !(c.regularizer.alpha >= 0.0) {
            return Err(cfg_err("regularizer.alpha", "must be nonnegative"));
        }
        if c.regularizer.alpha > 0.0 && c.regularizer.min_separation.is_none() {
            return Err(cfg_err("regularizer.min_separation", "required when alpha > 0"));
        }
        if let Some(d) = c.regularizer.min_separation {
            if !(d >= 0.0) {
                return Err(cfg_err("regularizer.min_separation", "must be nonnegative"));
            }
        }
        if c.optimizer.k == 0 {
            return Err(cfg_err("optimizer.k", "must be at least 1"));
        }
        if c.crosseval.functions == 0 {
            return Err(cfg_err("crosseval.functions", "must be at least 1"));
        }
        if c.crosseval.levels == 0 {
            return Err(cfg_err("crosseval.levels", "must be at least 1"));
        }
        if let Some(b) = c.visibility.bias {
            if !(b >= 0.0) {
                return Err(cfg_err("visibility.bias", "must be nonnegative"));
            }
        }
        if !(c.audit.resolution > 0.0) {
            return Err(cfg_err("audit.resolution", "must be positive"));
        }
        if let (Some(min), Some(max)) = (c.audit.min, c.audit.max) {
            aabb_from(min, max, "audit")?;
        } else if c.audit.min.is_some() != c.audit.max.is_some() {
            return Err(cfg_err("audit", "`min` and `max` go together"));
        }
        if c.bench.voxel_counts.contains(&0) {
            return Err(cfg_err("bench.voxel_counts", "entries must be at least 1"));
        }
        if c.bench.camera_counts.contains(&0) {
            return Err(cfg_err("bench.camera_counts", "entries must be at least 1"));
        }
        if c.bench.moves == 0 {
            return Err(cfg_err("bench.moves", "must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the effective configuration,
    /// so overrides change the hash.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&self.config).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn spec(&self) -> CameraSpec {
        spec_from(&self.config.camera, "camera").expect("validated")
    }

    pub fn mesh(&self) -> Result<TriangleMesh> {
        let scene = &self.config.scene;
        if let Some(name) = &scene.builtin {
            return scenes::builtin_mesh(name)
                .ok_or_else(|| cfg_err("scene.builtin", format!("unknown scene `{name}`")));
        }
        let path = self.base_dir.join(scene.path.as_ref().expect("validated"));
        let format = match scene.format {
            Some(f) => f,
            None => MeshFormat::from_extension(&path).expect("validated"),
        };
        Ok(load_mesh(&path, format)?.0)
    }

    fn roi_box(&self, r: &RoiConfig, path: &str) -> Result<RoiBox> {
        let orientation = match r.orientation {
            Some(q) => Pose::from_xyzw([0.0; 3], q).map_err(|e| cfg_err(format!("{path}.orientation"), e))?.orientation,
            None => UnitQuaternion::identity(),
        };
        let center = Point3::from(r.center);
        let half = Vector3::from(r.half_extents);
        let b = match (r.resolution, r.target_points) {
            (Some(res), None) => RoiBox::new(center, half, orientation, res),
            (None, Some(n)) => RoiBox::with_target_count(center, half, orientation, n),
            _ => return Err(cfg_err(path, "exactly one of `resolution` or `target_points` is required")),
        };
        b.map_err(|e| cfg_err(path, e))
    }

    pub fn roi_boxes(&self) -> Result<Vec<RoiBox>> {
        self.config.roi.iter().enumerate().map(|(i, r)| self.roi_box(r, &format!("roi[{i}]"))).collect()
    }

    /// ROI voxel centers followed by each sampling directive's points.
    pub fn points(&self) -> Result<EnvironmentPoints> {
        let mut sets = Vec::new();
        for b in self.roi_boxes()? {
            sets.push(voxelize_box(&b)?);
        }
        for (i, s) in self.config.sample.iter().enumerate() {
            let region = aabb_from(s.min, s.max, &format!("sample[{i}]"))?;
            sets.push(sample_points_uniform(&SampleRegion::Aabb(region), s.count, s.seed)?);
        }
        Ok(if sets.len() == 1 { sets.pop().unwrap() } else { merge_point_sets(&sets) })
    }

    pub fn orientations(&self) -> Result<Vec<UnitQuaternion>> {
        let path = "candidates.orientations";
        match &self.config.candidates.orientations {
            None => Err(cfg_err(path, "required when segments are given")),
            Some(OrientationsConfig::List(qs)) => {
                if qs.is_empty() {
                    return Err(cfg_err(path, "must not be empty"));
                }
                qs.iter()
                    .enumerate()
                    .map(|(i, q)| {
                        Pose::from_xyzw([0.0; 3], *q)
                            .map(|p| p.orientation)
                            .map_err(|e| cfg_err(format!("{path}[{i}]"), e))
                    })
                    .collect()
            }
            Some(OrientationsConfig::YawPitch { yaws, depressions }) => {
                if yaws.is_empty() || depressions.is_empty() {
                    return Err(cfg_err(path, "yaws and depressions must not be empty"));
                }
                Ok(yaw_pitch_orientations(yaws, depressions))
            }
        }
    }

    /// Segment candidates, then area samples, then explicit poses; ids in that order.
    pub fn candidates(&self) -> Result<CandidateSet> {
        let cand = &self.config.candidates;
        let spec = self.spec();
        let mut viewpoints = Vec::new();
        let mut kinds = Vec::new();
        if !cand.segments.is_empty() {
            let segments: Vec<Segment> =
                cand.segments.iter().map(|s| Segment::new(Point3::from(s.start), Point3::from(s.end))).collect();
            let set = sample_segment_viewpoints(
                &segments,
                cand.positions_per_segment.expect("validated"),
                &self.orientations()?,
                spec,
            )?;
            viewpoints.extend_from_slice(set.viewpoints());
            kinds.push(Provenance::SegmentGrid);
        }
        if let Some(a) = &cand.area {
            let poly = Polygon2::new(a.polygon.clone()).map_err(|e| cfg_err("candidates.area.polygon", e))?;
            let set = sample_area_viewpoints(&poly, a.height, a.count, spec, a.seed)?;
            viewpoints.extend_from_slice(set.viewpoints());
            kinds.push(Provenance::AreaRandom);
        }
        for (i, p) in cand.explicit.iter().enumerate() {
            let pose = pose_from(p, &format!("candidates.explicit[{i}]"))?;
            viewpoints.push(crate::camera::Viewpoint::new(0, spec, pose));
            kinds.push(Provenance::Explicit);
        }
        if viewpoints.is_empty() {
            return Err(cfg_err("candidates", "no candidate viewpoints configured"));
        }
        for (id, vp) in viewpoints.iter_mut().enumerate() {
            vp.id = id;
        }
        kinds.dedup();
        let provenance = if kinds.len() == 1 { kinds[0] } else { Provenance::Explicit };
        Ok(CandidateSet::from_viewpoints(viewpoints, provenance))
    }

    pub fn quality(&self) -> Result<QualityFunction> {
        let q = &self.config.quality;
        let p = |f: &str| format!("quality.{f}");
        match q.kind.as_str() {
            "scp" => Ok(QualityFunction::Scp),
            "redundancy" => {
                let w = match (&q.weights, q.seed) {
                    (Some(w), None) => QualityWeights::new(w.clone()).map_err(|e| cfg_err(p("weights"), e))?,
                    (None, Some(seed)) => sample_quality_weights(seed, q.levels.unwrap_or(DEFAULT_LEVELS))
                        .map_err(|e| cfg_err(p("levels"), e))?,
                    _ => return Err(cfg_err("quality", "redundancy needs exactly one of `weights` or `seed`")),
                };
                Ok(QualityFunction::redundancy(w))
            }
            "threshold_count" => {
                let cap = q.cap.ok_or_else(|| cfg_err(p("cap"), "required for threshold_count"))?;
                QualityFunction::threshold(cap).map_err(|e| cfg_err(p("cap"), e))
            }
            "custom_table" => {
                let t = q.table.clone().ok_or_else(|| cfg_err(p("table"), "required for custom_table"))?;
                Ok(QualityFunction::CustomTable { table: CustomTable::new(t).map_err(|e| cfg_err(p("table"), e))? })
            }
            other => Err(cfg_err(p("kind"), format!("unknown kind `{other}`"))),
        }
    }

    pub fn regularizer(&self, candidates: &CandidateSet) -> Result<Regularizer> {
        let r = &self.config.regularizer;
        if r.alpha == 0.0 {
            return Ok(Regularizer::none());
        }
        Regularizer::proximity(r.alpha, r.min_separation.expect("validated"), candidates)
            .map_err(|e| cfg_err("regularizer", e))
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        let o = &self.config.optimizer;
        OptimizerConfig { method: o.method, k: o.k, budget: o.budget as u128, seed: o.seed }
    }

    pub fn method(&self) -> VisibilityMethod {
        self.config.visibility.method
    }

    pub fn bias(&self, mesh: &TriangleMesh) -> f64 {
        self.config.visibility.bias.unwrap_or_else(|| default_depth_bias(&mesh.bounds(), &self.spec()))
    }

    pub fn live_cameras(&self) -> Result<Vec<(CameraSpec, Pose)>> {
        self.config
            .cameras
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("cameras[{i}]");
                let spec = match &c.spec {
                    Some(s) => spec_from(s, &format!("{path}.spec"))?,
                    None => self.spec(),
                };
                Ok((spec, pose_from(&c.pose, &path)?))
            })
            .collect()
    }

    pub fn audit_region(&self) -> Option<Aabb> {
        match (self.config.audit.min, self.config.audit.max) {
            (Some(a), Some(b)) => Some(Aabb::new(Point3::from(a), Point3::from(b))),
            _ => None,
        }
    }

    pub fn session(&self) -> Result<SessionState> {
        use std::sync::Arc;
        let mesh = self.mesh()?;
        let points = self.points()?;
        SessionState::new(
            Arc::new(mesh),
            Arc::new(points),
            self.method(),
            self.config.visibility.bias,
            &self.live_cameras()?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scene]
builtin = "unit_cube"

[camera]
perspective_angle = 90.0
resolution = [64, 40]
min_range = 0.1
max_range = 20.0

[[roi]]
center = [0.0, 0.0, 0.0]
half_extents = [2.0, 2.0, 2.0]
resolution = [4, 4, 4]

[candidates]
explicit = [
  { position = [5.0, 0.0, 0.0], look_at = [0.0, 0.0, 0.0] },
  { position = [0.0, 5.0, 0.0], quaternion = [0.0, 0.0, 0.0, 1.0] },
]

[optimizer]
k = 1
"#;

    #[test]
    fn minimal_config() {
        let s = Scenario::parse(MINIMAL, ".").unwrap();
        assert_eq!(s.points().unwrap().len(), 64);
        assert_eq!(s.candidates().unwrap().len(), 2);
        assert_eq!(s.quality().unwrap(), QualityFunction::Scp);
        assert_eq!(s.hash(), Scenario::parse(MINIMAL, ".").unwrap().hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn k_zero_names_the_field() {
        let text = MINIMAL.replace("k = 1", "k = 0");
        let err = Scenario::parse(&text, ".").unwrap_err();
        assert!(matches!(&err, Error::Config { path, .. } if path == "optimizer.k"), "{err}");
    }

    #[test]
    fn field_paths_in_errors() {
        let cases = [
            (MINIMAL.replace("perspective_angle = 90.0", "perspective_angle = 190.0"), "camera"),
            (MINIMAL.replace("resolution = [4, 4, 4]", "resolution = [0, 4, 4]"), "roi[0]"),
            (MINIMAL.replace("builtin = \"unit_cube\"", "builtin = \"nowhere\""), "scene.builtin"),
            (MINIMAL.replace("builtin = \"unit_cube\"", "path = \"missing.obj\""), "scene.path"),
            (
                MINIMAL.replace("look_at = [0.0, 0.0, 0.0]", "quaternion = [0.0, 0.0, 0.0, 0.0]"),
                "candidates.explicit[0].quaternion",
            ),
            (format!("{MINIMAL}\n[quality]\nkind = \"threshold_count\"\n"), "quality.cap"),
            (format!("{MINIMAL}\n[regularizer]\nalpha = 1.0\n"), "regularizer.min_separation"),
        ];
        for (text, want) in cases {
            match Scenario::parse(&text, ".") {
                Err(Error::Config { path, .. }) => assert_eq!(path, want),
                other => panic!("expected config error at {want}, got {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("k = 1", "k = 1\nkk = 2");
        assert!(Scenario::parse(&text, ".").is_err());
    }

    #[test]
    fn overrides_change_hash() {
        let mut s = Scenario::parse(MINIMAL, ".").unwrap();
        let h = s.hash();
        s.config.optimizer.seed = 9;
        assert_ne!(s.hash(), h);
    }

    #[test]
    fn yaw_pitch_orientations_and_segments() {
        let text = MINIMAL.replace(
            "[candidates]",
            "[candidates]\npositions_per_segment = 5\nsegments = [{ start = [0.0, 0.0, 5.0], end = [4.0, 0.0, 5.0] }]\norientations = { yaws = [0.0, 90.0, 180.0], depressions = [30.0] }",
        );
        let s = Scenario::parse(&text, ".").unwrap();
        let c = s.candidates().unwrap();
        assert_eq!(c.len(), 15 + 2);
        assert_eq!(c.get(16).unwrap().id, 16);
    }
}
