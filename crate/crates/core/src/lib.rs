//! Camera network design.
//!
//! Scenes are triangle meshes; the region to observe is a weighted point set and
//! the placement options a finite candidate set of cameras. Visibility is computed
//! with a software z-buffer (ray casting through a BVH serves as the oracle) and
//! stored as a point × camera bit matrix. Coverage objectives sum a concave
//! per-point quality of the view count, and greedy selection picks `k` cameras.
//! A live [`session`] keeps per-camera visibility cached so individual cameras can
//! be moved interactively, and serves that state over a WebSocket.
//!
//! Runnable examples, one per capability, live under `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `load_mesh` | mesh loading, BVH construction, ray queries |
//! | `project` | camera model and projection |
//! | `discretize` | voxel grids, candidate sampling, point files |
//! | `visibility` | depth rendering, z-buffer vs. ray casting, matrix cache |
//! | `objectives` | quality functions, gains, regularized objective |
//! | `optimize` | greedy, lazy greedy, exhaustive and random selection |
//! | `crosseval` | cross-evaluation of sampled quality functions |
//! | `audit` | dense coverage audit |
//! | `session` | incremental live session and volume frames |
//! | `serve` | WebSocket service with a scripted client |
//!
//! The `camnet` binary exposes the batch workflows driven by a TOML scenario file.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod cli;
pub mod discretize;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod objective;
pub mod optimize;
pub mod scenario;
pub mod scenes;
pub mod session;
pub mod visibility;

pub use error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
pub type Matrix3 = nalgebra::Matrix3<f64>;
pub type UnitQuaternion = nalgebra::UnitQuaternion<f64>;
