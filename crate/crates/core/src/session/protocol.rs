//! JSON control messages exchanged over the session socket, tagged by `type`.
//!
//! After `hello` the server answers with `welcome`, then one binary message of
//! `n_points` little-endian f32 xyz triples, then a `status` text message and a
//! volume frame for the current revision. Every later revision is announced the
//! same way: `status`, then its frame.

use serde::{Deserialize, Serialize};

use crate::camera::CameraSpec;
use crate::geometry::Aabb;
use crate::session::{CameraRecord, LatencySummary, SessionExport, TransferMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirePose {
    pub position: [f64; 3],
    /// `[x, y, z, w]`.
    pub quaternion: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        #[serde(default)]
        session: Option<String>,
    },
    MoveCamera {
        id: u32,
        position: [f64; 3],
        quaternion: [f64; 4],
    },
    AddCamera {
        spec: CameraSpec,
        pose: WirePose,
    },
    RemoveCamera {
        id: u32,
    },
    SetMode {
        mode: TransferMode,
    },
    Export {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome {
        session: String,
        revision: u64,
        n_points: u32,
        bounds: Aabb,
        mode: TransferMode,
        cameras: Vec<CameraRecord>,
    },
    Status {
        revision: u64,
        coverage: f64,
        covered: u64,
        latency_ms: f64,
        latency: LatencySummary,
        cameras: Vec<CameraRecord>,
    },
    CameraAdded {
        id: u32,
        revision: u64,
    },
    Solution {
        export: SessionExport,
    },
    Error {
        message: String,
    },
}
