//! Loop-closure-consistent extrinsic calibration for a LiDAR / RADAR / camera
//! rig: rigid-transform algebra, input projection, correlation cost volumes,
//! message-passing refinement, loss evaluators, an online drift monitor and a
//! seeded drift simulator that drives it.

pub mod cli;
pub mod correlation;
pub mod error;
pub mod io;
pub mod loss;
pub mod monitor;
pub mod mpn;
pub mod projection;
pub mod scenario;
pub mod se3;
pub mod sim;

pub use error::{Error, Result};
pub use mpn::{CalibrationTriple, MpnConfig, Pair};
pub use se3::{EulerAngles, RigidTransform, Translation3, UnitQuaternion, Vec3};
