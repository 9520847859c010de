//! Loop-closure message passing over the three pairwise extrinsics.
//!
//! Naming: `T_ab` maps coordinates from frame `b` into frame `a`; the triple
//! stores `T_LC`, `T_RC` and `T_RL`, which are loop consistent when
//! `T_RL = T_RC * T_LC^-1`.
//!
//! Each node receives the transform its two neighbours imply through the
//! loop and is blended toward it: SLERP on the rotation (weight `alpha` on
//! the current node) and a linear blend on the translation. All messages of
//! an iteration are computed from the state before that iteration.

use std::fmt;

use crate::error::{Error, Result};
use crate::se3::RigidTransform;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pair {
    LidarCamera,
    RadarCamera,
    LidarRadar,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::LidarCamera, Pair::RadarCamera, Pair::LidarRadar];

    pub fn as_str(&self) -> &'static str {
        match self {
            Pair::LidarCamera => "lc",
            Pair::RadarCamera => "rc",
            Pair::LidarRadar => "rl",
        }
    }

    pub fn parse(s: &str) -> Option<Pair> {
        match s.to_ascii_lowercase().as_str() {
            "lc" | "lidar_camera" => Some(Pair::LidarCamera),
            "rc" | "radar_camera" => Some(Pair::RadarCamera),
            "rl" | "lidar_radar" => Some(Pair::LidarRadar),
            _ => None,
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }

    /// The two pairs other than `self`, in canonical order.
    pub fn others(&self) -> [Pair; 2] {
        match self {
            Pair::LidarCamera => [Pair::RadarCamera, Pair::LidarRadar],
            Pair::RadarCamera => [Pair::LidarCamera, Pair::LidarRadar],
            Pair::LidarRadar => [Pair::LidarCamera, Pair::RadarCamera],
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CalibrationTriple {
    pub lc: RigidTransform,
    pub rc: RigidTransform,
    pub rl: RigidTransform,
}

impl CalibrationTriple {
    pub fn new(lc: RigidTransform, rc: RigidTransform, rl: RigidTransform) -> Self {
        Self { lc, rc, rl }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a consistent triple from the two camera pairs.
    pub fn from_camera_pairs(lc: RigidTransform, rc: RigidTransform) -> Self {
        Self::new(lc, rc, rc * lc.inverse())
    }

    pub fn get(&self, pair: Pair) -> &RigidTransform {
        match pair {
            Pair::LidarCamera => &self.lc,
            Pair::RadarCamera => &self.rc,
            Pair::LidarRadar => &self.rl,
        }
    }

    pub fn get_mut(&mut self, pair: Pair) -> &mut RigidTransform {
        match pair {
            Pair::LidarCamera => &mut self.lc,
            Pair::RadarCamera => &mut self.rc,
            Pair::LidarRadar => &mut self.rl,
        }
    }

    /// The transform the other two members imply for `pair`.
    pub fn loop_estimate(&self, pair: Pair) -> RigidTransform {
        match pair {
            Pair::LidarCamera => self.rl.inverse() * self.rc,
            Pair::RadarCamera => self.rl * self.lc,
            Pair::LidarRadar => self.rc * self.lc.inverse(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(Pair, &RigidTransform) -> RigidTransform) -> Self {
        Self::new(
            f(Pair::LidarCamera, &self.lc),
            f(Pair::RadarCamera, &self.rc),
            f(Pair::LidarRadar, &self.rl),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpnConfig {
    alphas: Vec<f64>,
}

impl Default for MpnConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.5; 4],
        }
    }
}

impl MpnConfig {
    /// One blend weight per iteration, each in `[0, 1]`.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Config(format!("MPN alpha {a} is outside [0, 1]")));
        }
        Ok(Self { alphas })
    }

    pub fn constant(iterations: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; iterations])
    }

    pub fn iterations(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// Loop-closure mismatch of a triple.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LoopResidual {
    pub rot_deg: f64,
    pub trans_m: f64,
}

pub fn compute_messages(x: &CalibrationTriple) -> CalibrationTriple {
    x.map(|pair, _| x.loop_estimate(pair))
}

fn blend(node: &RigidTransform, message: &RigidTransform, alpha: f64) -> RigidTransform {
    if alpha == 1.0 {
        return *node;
    }
    if alpha == 0.0 {
        return *message;
    }
    RigidTransform::new(
        message.rotation.slerp(&node.rotation, alpha),
        node.translation * alpha + message.translation * (1.0 - alpha),
    )
}

pub fn node_update(x: &CalibrationTriple, m: &CalibrationTriple, alpha: f64) -> CalibrationTriple {
    x.map(|pair, node| blend(node, m.get(pair), alpha))
}

pub fn refine(x: &CalibrationTriple, cfg: &MpnConfig) -> CalibrationTriple {
    cfg.alphas.iter().fold(*x, |state, &alpha| {
        node_update(&state, &compute_messages(&state), alpha)
    })
}

/// Runs [`refine`] and returns the residual before the first iteration and
/// after each one, alongside the refined triple.
pub fn refine_traced(x: &CalibrationTriple, cfg: &MpnConfig) -> (CalibrationTriple, Vec<LoopResidual>) {
    let mut state = *x;
    let mut trace = vec![loop_residual(&state)];
    for &alpha in &cfg.alphas {
        state = node_update(&state, &compute_messages(&state), alpha);
        trace.push(loop_residual(&state));
    }
    (state, trace)
}

pub fn loop_residual(x: &CalibrationTriple) -> LoopResidual {
    let (rot_deg, trans_m) = x.loop_estimate(Pair::LidarRadar).distance(&x.rl);
    LoopResidual { rot_deg, trans_m }
}
