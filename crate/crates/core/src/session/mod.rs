//! Live design state: movable cameras with cached visibility and per-point view
//! counts kept in sync incrementally.

mod frame;
pub mod protocol;
mod server;

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use frame::{decode_frame, FrameEncoding, FramePayload, VolumeFrame, FRAME_HEADER_LEN};
pub use server::{serve, ServerConfig, ServerHandle};

use crate::camera::{CameraSpec, Pose, Viewpoint};
use crate::discretize::EnvironmentPoints;
use crate::error::{Error, Result};
use crate::geometry::{Bvh, TriangleMesh};
use crate::objective::covered_fraction;
use crate::visibility::{compute_column, default_depth_bias, BitVec, VisCounts, VisibilityMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    #[default]
    Quality,
    UncoveredOnly,
    Custom,
}

impl std::str::FromStr for TransferMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quality" => Ok(TransferMode::Quality),
            "uncovered_only" => Ok(TransferMode::UncoveredOnly),
            "custom" => Ok(TransferMode::Custom),
            other => Err(Error::invalid(format!("unknown transfer mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub value: f64,
    pub rgba: [u8; 4],
}

/// Piecewise-linear color ramp over view counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTransfer")]
pub struct TransferFunction {
    mode: TransferMode,
    control_points: Vec<ControlPoint>,
}

#[derive(Deserialize)]
struct RawTransfer {
    mode: TransferMode,
    control_points: Vec<ControlPoint>,
}

impl TryFrom<RawTransfer> for TransferFunction {
    type Error = Error;

    fn try_from(r: RawTransfer) -> Result<Self> {
        TransferFunction::new(r.mode, r.control_points)
    }
}

impl TransferFunction {
    pub fn new(mode: TransferMode, control_points: Vec<ControlPoint>) -> Result<Self> {
        if control_points.is_empty() {
            return Err(Error::invalid("transfer function needs at least one control point"));
        }
        if control_points.windows(2).any(|w| !(w[0].value < w[1].value)) {
            return Err(Error::invalid("transfer control points must be sorted by strictly increasing value"));
        }
        Ok(TransferFunction { mode, control_points })
    }

    /// Red where unseen, ramping through yellow to green at `saturation` views.
    pub fn quality(saturation: u32) -> Self {
        let s = saturation.max(2) as f64;
        TransferFunction {
            mode: TransferMode::Quality,
            control_points: vec![
                ControlPoint { value: 0.0, rgba: [220, 30, 30, 200] },
                ControlPoint { value: 1.0, rgba: [240, 200, 40, 120] },
                ControlPoint { value: s, rgba: [40, 190, 70, 60] },
            ],
        }
    }

    /// Only unseen points are colored.
    pub fn uncovered_only() -> Self {
        TransferFunction {
            mode: TransferMode::UncoveredOnly,
            control_points: vec![
                ControlPoint { value: 0.0, rgba: [230, 20, 20, 220] },
                ControlPoint { value: 1.0, rgba: [0, 0, 0, 0] },
            ],
        }
    }

    pub fn mode(&self) -> TransferMode {
        self.mode
    }

    pub fn control_points(&self) -> &[ControlPoint] {
        &self.control_points
    }

    pub fn color(&self, value: f64) -> [u8; 4] {
        let cps = &self.control_points;
        if value <= cps[0].value {
            return cps[0].rgba;
        }
        for w in cps.windows(2) {
            if value <= w[1].value {
                let t = (value - w[0].value) / (w[1].value - w[0].value);
                return std::array::from_fn(|i| {
                    (w[0].rgba[i] as f64 + t * (w[1].rgba[i] as f64 - w[0].rgba[i] as f64)).round() as u8
                });
            }
        }
        cps[cps.len() - 1].rgba
    }
}

impl Default for TransferFunction {
    fn default() -> Self {
        TransferFunction::quality(3)
    }
}

pub const LATENCY_WINDOW: usize = 1000;

/// Recompute durations of committed mutations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatencyStats {
    window: VecDeque<f64>,
    total_samples: u64,
    total_ms: f64,
    max_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencySummary {
    pub samples: u64,
    /// Mean over the whole run.
    pub mean_ms: f64,
    /// Mean over the last [`LATENCY_WINDOW`] samples.
    pub rolling_mean_ms: f64,
    pub max_ms: f64,
    pub last_ms: f64,
}

impl LatencyStats {
    pub fn record(&mut self, ms: f64) {
        let ms = ms.max(0.0);
        if self.window.len() == LATENCY_WINDOW {
            self.window.pop_front();
        }
        self.window.push_back(ms);
        self.total_samples += 1;
        self.total_ms += ms;
        self.max_ms = self.max_ms.max(ms);
    }

    pub fn len(&self) -> u64 {
        self.total_samples
    }

    pub fn is_empty(&self) -> bool {
        self.total_samples == 0
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.window.iter().copied()
    }

    pub fn summary(&self) -> LatencySummary {
        if self.is_empty() {
            return LatencySummary::default();
        }
        LatencySummary {
            samples: self.total_samples,
            mean_ms: self.total_ms / self.total_samples as f64,
            rolling_mean_ms: self.window.iter().sum::<f64>() / self.window.len() as f64,
            max_ms: self.max_ms,
            last_ms: *self.window.back().unwrap(),
        }
    }
}

/// A camera in wire form: position plus `[x, y, z, w]` quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub id: u32,
    pub spec: CameraSpec,
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

impl CameraRecord {
    pub fn new(id: u32, spec: CameraSpec, pose: &Pose) -> Self {
        CameraRecord { id, spec, position: pose.position.into(), quaternion: pose.quaternion_xyzw() }
    }

    pub fn pose(&self) -> Result<Pose> {
        Pose::from_xyzw(self.position, self.quaternion)
    }

    pub fn viewpoint(&self) -> Result<Viewpoint> {
        Ok(Viewpoint::new(self.id as usize, self.spec, self.pose()?))
    }
}

/// Snapshot of a session's cameras, consumable by the audit and cross-evaluation tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExport {
    pub revision: u64,
    pub coverage: f64,
    pub cameras: Vec<CameraRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl SessionExport {
    pub fn viewpoints(&self) -> Result<Vec<Viewpoint>> {
        self.cameras.iter().map(CameraRecord::viewpoint).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateSummary {
    pub revision: u64,
    pub camera: u32,
    /// Points whose view count changed.
    pub changed_points: usize,
    pub recompute_ms: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone)]
struct LiveCamera {
    spec: CameraSpec,
    pose: Pose,
    visibility: BitVec,
}

#[derive(Debug, Clone)]
pub struct SessionState {
    mesh: Arc<TriangleMesh>,
    bvh: Option<Arc<Bvh>>,
    points: Arc<EnvironmentPoints>,
    method: VisibilityMethod,
    bias: Option<f64>,
    cameras: BTreeMap<u32, LiveCamera>,
    counts: VisCounts,
    revision: u64,
    next_id: u32,
    transfer: TransferFunction,
    latency: LatencyStats,
}

impl SessionState {
    /// Session at revision 0 with `cameras` already placed (ids `0..`).
    pub fn new(
        mesh: Arc<TriangleMesh>,
        points: Arc<EnvironmentPoints>,
        method: VisibilityMethod,
        bias: Option<f64>,
        cameras: &[(CameraSpec, Pose)],
    ) -> Result<Self> {
        if let Some(b) = bias {
            if !(b >= 0.0) {
                return Err(Error::invalid(format!("depth bias must be nonnegative, got {b}")));
            }
        }
        let bvh = match method {
            VisibilityMethod::Raycast => Some(Arc::new(Bvh::build(&mesh))),
            VisibilityMethod::Zbuffer => None,
        };
        let mut state = SessionState {
            counts: VisCounts::zeros(points.len()),
            mesh,
            bvh,
            points,
            method,
            bias,
            cameras: BTreeMap::new(),
            revision: 0,
            next_id: 0,
            transfer: TransferFunction::default(),
            latency: LatencyStats::default(),
        };
        use rayon::prelude::*;
        let columns: Vec<BitVec> = cameras.par_iter().map(|(spec, pose)| state.column(spec, pose)).collect();
        for ((spec, pose), visibility) in cameras.iter().zip(columns) {
            state.counts.add_column(&visibility);
            state.cameras.insert(state.next_id, LiveCamera { spec: *spec, pose: *pose, visibility });
            state.next_id += 1;
        }
        Ok(state)
    }

    fn bias_for(&self, spec: &CameraSpec) -> f64 {
        self.bias.unwrap_or_else(|| default_depth_bias(&self.mesh.bounds(), spec))
    }

    fn column(&self, spec: &CameraSpec, pose: &Pose) -> BitVec {
        let vp = Viewpoint::new(0, *spec, *pose);
        compute_column(&self.mesh, self.bvh.as_deref(), &vp, self.points.points(), self.method, self.bias_for(spec))
    }

    fn commit(&mut self, camera: u32, changed_points: usize, start: Instant) -> UpdateSummary {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        self.latency.record(ms);
        self.revision += 1;
        UpdateSummary { revision: self.revision, camera, changed_points, recompute_ms: ms, coverage: self.coverage() }
    }

    /// Recomputes only camera `id`'s column and patches the counts.
    pub fn move_camera(&mut self, id: u32, pose: Pose) -> Result<UpdateSummary> {
        let start = Instant::now();
        let spec = self.cameras.get(&id).ok_or(Error::UnknownCamera(id))?.spec;
        let fresh = self.column(&spec, &pose);
        let cam = self.cameras.get_mut(&id).expect("checked above");
        let changed = cam.visibility.hamming(&fresh);
        self.counts.sub_column(&cam.visibility);
        self.counts.add_column(&fresh);
        cam.visibility = fresh;
        cam.pose = pose;
        Ok(self.commit(id, changed, start))
    }

    pub fn add_camera(&mut self, spec: CameraSpec, pose: Pose) -> Result<(u32, UpdateSummary)> {
        let start = Instant::now();
        let id = self.next_id;
        let visibility = self.column(&spec, &pose);
        let changed = visibility.count_ones();
        self.counts.add_column(&visibility);
        self.cameras.insert(id, LiveCamera { spec, pose, visibility });
        self.next_id += 1;
        Ok((id, self.commit(id, changed, start)))
    }

    pub fn remove_camera(&mut self, id: u32) -> Result<UpdateSummary> {
        let start = Instant::now();
        let cam = self.cameras.remove(&id).ok_or(Error::UnknownCamera(id))?;
        self.counts.sub_column(&cam.visibility);
        Ok(self.commit(id, cam.visibility.count_ones(), start))
    }

    pub fn set_transfer(&mut self, transfer: TransferFunction) {
        self.transfer = transfer;
    }

    pub fn transfer(&self) -> &TransferFunction {
        &self.transfer
    }

    pub fn get_volume(&self, mode: TransferMode) -> VolumeFrame {
        VolumeFrame::from_counts(self.revision, &self.counts, mode)
    }

    pub fn export_solution(&self) -> SessionExport {
        SessionExport {
            revision: self.revision,
            coverage: self.coverage(),
            cameras: self.cameras.iter().map(|(&id, c)| CameraRecord::new(id, c.spec, &c.pose)).collect(),
            config_hash: None,
        }
    }

    pub fn latency_stats(&self) -> &LatencyStats {
        &self.latency
    }

    /// Every live camera's column recomputed from nothing, then summed.
    pub fn recompute_from_scratch(&self) -> VisCounts {
        use rayon::prelude::*;
        let columns: Vec<BitVec> =
            self.cameras.values().collect::<Vec<_>>().par_iter().map(|c| self.column(&c.spec, &c.pose)).collect();
        let mut counts = VisCounts::zeros(self.points.len());
        for c in &columns {
            counts.add_column(c);
        }
        counts
    }

    /// Counts re-summed from the cached columns.
    pub fn cached_sum(&self) -> VisCounts {
        let mut counts = VisCounts::zeros(self.points.len());
        for c in self.cameras.values() {
            counts.add_column(&c.visibility);
        }
        counts
    }

    pub fn camera_visibility(&self, id: u32) -> Option<&BitVec> {
        self.cameras.get(&id).map(|c| &c.visibility)
    }

    pub fn camera(&self, id: u32) -> Option<CameraRecord> {
        self.cameras.get(&id).map(|c| CameraRecord::new(id, c.spec, &c.pose))
    }

    pub fn camera_ids(&self) -> Vec<u32> {
        self.cameras.keys().copied().collect()
    }

    pub fn camera_count(&self) -> usize {
        self.cameras.len()
    }

    pub fn counts(&self) -> &VisCounts {
        &self.counts
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn points(&self) -> &Arc<EnvironmentPoints> {
        &self.points
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn coverage(&self) -> f64 {
        covered_fraction(&self.counts, &self.points)
    }
}
