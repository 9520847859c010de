//! Calibration loss terms, evaluated as metrics (no gradients).
//!
//! Rotation terms use the shortest-arc angle in radians so they are
//! commensurable with the meter-valued Smooth L1 translation terms.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mpn::{CalibrationTriple, Pair};
use crate::projection::PointCloud;
use crate::se3::RigidTransform;

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub lambda_r: f64,
    pub lambda_t: f64,
    pub lambda_c: f64,
    pub lambda_l: f64,
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_r: 1.0,
            lambda_t: 1.0,
            lambda_c: 0.1,
            lambda_l: 0.1,
            gamma: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_r, self.lambda_t, self.lambda_c, self.lambda_l, self.gamma];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config("loss weights must be finite and non-negative".into()));
        }
        if self.lambda_c + self.lambda_l > 1.0 {
            return Err(Error::Config("lambda_c + lambda_l must not exceed 1".into()));
        }
        Ok(())
    }

    pub fn pose_only(lambda_r: f64, lambda_t: f64) -> Self {
        Self {
            lambda_r,
            lambda_t,
            lambda_c: 0.0,
            lambda_l: 0.0,
            gamma: 0.0,
        }
    }
}

pub fn smooth_l1(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    if d < 1.0 {
        0.5 * d * d
    } else {
        d - 0.5
    }
}

/// Rotation and translation terms for a single pair.
fn pair_terms(gt: &RigidTransform, pred: &RigidTransform) -> (f64, f64) {
    let l_r = gt.rotation.angle_to_rad(&pred.rotation);
    let (g, p) = (gt.translation, pred.translation);
    let l_t = smooth_l1(g.x, p.x) + smooth_l1(g.y, p.y) + smooth_l1(g.z, p.z);
    (l_r, l_t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PoseLoss {
    pub l_p: f64,
    pub l_r: f64,
    pub l_t: f64,
}

pub fn pose_loss(pred: &CalibrationTriple, gt: &CalibrationTriple, w: &LossWeights) -> PoseLoss {
    let (l_r, l_t) = Pair::ALL.iter().fold((0.0, 0.0), |(r, t), &p| {
        let (pr, pt) = pair_terms(gt.get(p), pred.get(p));
        (r + pr, t + pt)
    });
    PoseLoss {
        l_p: w.lambda_r * l_r + w.lambda_t * l_t,
        l_r,
        l_t,
    }
}

/// Mean point displacement under `t_gt * t_pred^-1 * t_init`. An empty cloud
/// yields `(0.0, true)`; the flag marks that no point contributed.
pub fn point_cloud_loss(
    cloud: &PointCloud,
    t_gt: &RigidTransform,
    t_pred: &RigidTransform,
    t_init: &RigidTransform,
) -> (f64, bool) {
    if cloud.is_empty() {
        return (0.0, true);
    }
    let composite = *t_gt * t_pred.inverse() * *t_init;
    let sum: f64 = cloud
        .points
        .iter()
        .map(|p| (composite.transform_point(*p) - *p).norm())
        .sum();
    (sum / cloud.len() as f64, false)
}

/// Loop estimates in camera-side form (`T_CL = T_LC^-1` and so on), then the
/// mean per-pair pose loss between each estimate and the direct prediction.
pub fn loop_closure_loss(pred: &CalibrationTriple, w: &LossWeights) -> f64 {
    let t_cl = pred.lc.inverse();
    let t_cr = pred.rc.inverse();
    let t_lr = pred.rl.inverse();
    let loop_lr = t_cl.inverse() * t_cr;
    let loop_cl = t_cr * t_lr.inverse();
    let loop_cr = t_cl * t_lr;
    [(loop_lr, t_lr), (loop_cl, t_cl), (loop_cr, t_cr)]
        .iter()
        .map(|(est, direct)| {
            let (r, t) = pair_terms(est, direct);
            w.lambda_r * r + w.lambda_t * t
        })
        .sum::<f64>()
        / 3.0
}

pub fn accuracy_penalty(final_pose_loss: f64, intermediate_pose_loss: f64) -> f64 {
    (final_pose_loss - intermediate_pose_loss).max(0.0)
}

pub fn total_loss(l_p: f64, l_c: f64, l_l: f64, l_a: f64, w: &LossWeights) -> f64 {
    (1.0 - (w.lambda_c + w.lambda_l)) * l_p + w.lambda_c * l_c + w.lambda_l * l_l + w.gamma * l_a
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossReport {
    pub l_p: f64,
    pub l_r: f64,
    pub l_t: f64,
    pub l_c: f64,
    pub l_l: f64,
    pub l_a: f64,
    pub total: f64,
    /// Set when a supplied cloud was empty and its distance term defaulted to 0.
    pub empty_cloud: bool,
}

impl LossReport {
    pub const CSV_HEADER: &'static str = "frame,l_p,l_r,l_t,l_c,l_l,l_a,total";

    pub fn csv_row(&self, frame: usize) -> String {
        format!(
            "{frame},{},{},{},{},{},{},{}",
            self.l_p, self.l_r, self.l_t, self.l_c, self.l_l, self.l_a, self.total
        )
    }
}

/// Point clouds with the ground-truth extrinsics of their sensor.
#[derive(Clone, Debug)]
pub struct CloudTerms<'a> {
    pub lidar: &'a PointCloud,
    pub radar: &'a PointCloud,
    /// Ground-truth `T_LC`, `T_RC` (camera into sensor frame).
    pub extrinsics_gt: &'a CalibrationTriple,
}

/// Inputs live in miscalibration space: `gt` holds the true deltas, `pred`
/// the refined predictions and `intermediate` the predictions before
/// refinement.
pub fn evaluate(
    pred: &CalibrationTriple,
    intermediate: &CalibrationTriple,
    gt: &CalibrationTriple,
    clouds: Option<&CloudTerms<'_>>,
    w: &LossWeights,
) -> LossReport {
    let final_pose = pose_loss(pred, gt, w);
    let inter_pose = pose_loss(intermediate, gt, w);
    let (l_c, empty_cloud) = match clouds {
        None => (0.0, false),
        Some(c) => {
            // T_CL^init = dT_LC * T_CL^gt
            let init_cl = gt.lc * c.extrinsics_gt.lc.inverse();
            let init_cr = gt.rc * c.extrinsics_gt.rc.inverse();
            let (ll, el) = point_cloud_loss(c.lidar, &c.extrinsics_gt.lc, &pred.lc, &init_cl);
            let (lr, er) = point_cloud_loss(c.radar, &c.extrinsics_gt.rc, &pred.rc, &init_cr);
            (ll + lr, el || er)
        }
    };
    let l_l = loop_closure_loss(pred, w);
    let l_a = accuracy_penalty(final_pose.l_p, inter_pose.l_p);
    LossReport {
        l_p: final_pose.l_p,
        l_r: final_pose.l_r,
        l_t: final_pose.l_t,
        l_c,
        l_l,
        l_a,
        total: total_loss(final_pose.l_p, l_c, l_l, l_a, w),
        empty_cloud,
    }
}
