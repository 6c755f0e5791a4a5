//! Optical-path simulation of one-dimensional cavities with moving walls.

pub mod billiard;
pub mod classical;
pub mod error;
pub mod jet;
pub mod profile;
pub mod quad;
pub mod quantum;
pub mod resonance;
pub mod roots;
pub mod spline;
pub mod trajectory;
pub mod twowall;

pub use billiard::{BilliardMap, BounceMap, RayPath};
pub use error::{Error, Result};
pub use jet::Jet3;
pub use trajectory::{TrajectoryKind, WallTrajectory};
