//! Seeded drift simulation standing in for a learned predictor, plus the
//! random-miscalibration data preparation and stage composition helpers.
//!
//! The rig is modelled as three sensor poses in a common body frame; the
//! camera starts at the origin. A drift event right-multiplies the affected
//! sensor's pose by its delta, so it changes both pairs that involve the
//! sensor. Each frame the simulator computes the true correction
//! `T_gt(a) * T_init(a)^-1` for every pair, perturbs it with Gaussian noise
//! (and occasional single-frame spikes) and feeds the result through the
//! optional message-passing refiner into the online monitor.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::monitor::{MonitorConfig, OnlineCalibrator, UpdateEvent, UpdateMethod};
use crate::mpn::{refine, CalibrationTriple, MpnConfig, Pair};
use crate::se3::{EulerAngles, RigidTransform, UnitQuaternion, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sensor {
    Lidar,
    Radar,
    Camera,
}

impl Sensor {
    pub fn parse(s: &str) -> Option<Sensor> {
        match s.to_ascii_lowercase().as_str() {
            "lidar" => Some(Sensor::Lidar),
            "radar" => Some(Sensor::Radar),
            "camera" => Some(Sensor::Camera),
            _ => None,
        }
    }

    /// The two pairs whose extrinsics change when this sensor moves.
    pub fn pairs(&self) -> [Pair; 2] {
        match self {
            Sensor::Lidar => [Pair::LidarCamera, Pair::LidarRadar],
            Sensor::Radar => [Pair::RadarCamera, Pair::LidarRadar],
            Sensor::Camera => [Pair::LidarCamera, Pair::RadarCamera],
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sensor::Lidar => "lidar",
            Sensor::Radar => "radar",
            Sensor::Camera => "camera",
        })
    }
}

/// Per-axis Gaussian prediction noise with occasional single-frame spikes.
///
/// A spike adds a rotation of `outlier_scale * 3 * rot_sigma_deg` about a
/// random axis and a translation of `outlier_scale * 3 * trans_sigma_m` in a
/// random direction on top of the regular noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub rot_sigma_deg: f64,
    pub trans_sigma_m: f64,
    pub outlier_prob: f64,
    pub outlier_scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            rot_sigma_deg: 0.015,
            trans_sigma_m: 0.003,
            outlier_prob: 0.01,
            outlier_scale: 10.0,
        }
    }
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            rot_sigma_deg: 0.0,
            trans_sigma_m: 0.0,
            outlier_prob: 0.0,
            outlier_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rot_sigma_deg >= 0.0 && self.trans_sigma_m >= 0.0) {
            return Err(Error::Config("noise sigmas must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.outlier_prob) {
            return Err(Error::Config("outlier_prob must lie in [0, 1]".into()));
        }
        if !(self.outlier_scale >= 1.0) {
            return Err(Error::Config("outlier_scale must be at least 1".into()));
        }
        Ok(())
    }

    fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> Vec3 {
        if sigma == 0.0 {
            return Vec3::ZERO;
        }
        let mut draw = || rng.sample::<f64, _>(StandardNormal) * sigma;
        Vec3::new(draw(), draw(), draw())
    }

    fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Self::gaussian(rng, 1.0);
            let n = v.norm();
            if n > 1e-9 {
                return v * (1.0 / n);
            }
        }
    }

    /// Draws a perturbation transform and whether it carries a spike.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (RigidTransform, bool) {
        let r = Self::gaussian(rng, self.rot_sigma_deg);
        let mut rotation = UnitQuaternion::from_euler(EulerAngles::new(r.x, r.y, r.z));
        let mut translation = Self::gaussian(rng, self.trans_sigma_m);
        let spike = self.outlier_prob > 0.0 && rng.random_bool(self.outlier_prob);
        if spike {
            let angle = (self.outlier_scale * 3.0 * self.rot_sigma_deg).to_radians();
            let axis = Self::unit_vector(rng);
            rotation = UnitQuaternion::from_axis_angle(axis, angle) * rotation;
            translation += Self::unit_vector(rng) * (self.outlier_scale * 3.0 * self.trans_sigma_m);
        }
        (RigidTransform::new(rotation, translation), spike)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftEvent {
    pub frame: usize,
    pub sensor: Sensor,
    /// Applied to the sensor's mounting pose, in the sensor's own frame.
    pub delta: RigidTransform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftScenario {
    pub name: String,
    pub frames: usize,
    pub ground_truth: CalibrationTriple,
    /// Initial extrinsics when the run starts; ground truth when `None`.
    pub initial: Option<CalibrationTriple>,
    pub events: Vec<DriftEvent>,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl DriftScenario {
    pub fn new(name: impl Into<String>, frames: usize, ground_truth: CalibrationTriple) -> Self {
        Self {
            name: name.into(),
            frames,
            ground_truth,
            initial: None,
            events: Vec::new(),
            noise: NoiseModel::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.events.windows(2).any(|w| w[0].frame > w[1].frame) {
            return Err(Error::Config("drift events must be sorted by frame".into()));
        }
        Ok(())
    }
}

/// Symmetric bound for random miscalibration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiscalRange {
    pub rot_deg: f64,
    pub trans_m: f64,
}

impl MiscalRange {
    pub fn new(rot_deg: f64, trans_m: f64) -> Self {
        Self { rot_deg, trans_m }
    }

    /// The five shrinking stage ranges of the refinement cascade.
    pub fn cascade() -> [MiscalRange; 5] {
        [
            MiscalRange::new(10.0, 0.50),
            MiscalRange::new(6.0, 0.30),
            MiscalRange::new(4.0, 0.20),
            MiscalRange::new(2.0, 0.10),
            MiscalRange::new(1.0, 0.05),
        ]
    }
}

fn uniform(rng: &mut impl Rng, bound: f64) -> f64 {
    if bound > 0.0 {
        rng.random_range(-bound..=bound)
    } else {
        0.0
    }
}

/// Per-axis uniform rotation (roll, pitch, yaw in degrees, composed as Euler
/// angles) and per-axis uniform translation.
pub fn random_delta(range: &MiscalRange, rng: &mut impl Rng) -> RigidTransform {
    let e = EulerAngles::new(
        uniform(rng, range.rot_deg),
        uniform(rng, range.rot_deg),
        uniform(rng, range.rot_deg),
    );
    let t = Vec3::new(
        uniform(rng, range.trans_m),
        uniform(rng, range.trans_m),
        uniform(rng, range.trans_m),
    );
    RigidTransform::from_euler_deg(e, t)
}

/// Perturbs the camera pairs of `gt` by `T_CL^init = dT_LC * T_CL^gt` (and
/// likewise for RADAR) and returns the initial triple together with the
/// ground-truth deltas, where `dT_RL = dT_RC * dT_LC^-1`.
pub fn miscalibrate(
    gt: &CalibrationTriple,
    d_lc: &RigidTransform,
    d_rc: &RigidTransform,
) -> (CalibrationTriple, CalibrationTriple) {
    let init_cl = *d_lc * gt.lc.inverse();
    let init_cr = *d_rc * gt.rc.inverse();
    let init = CalibrationTriple::from_camera_pairs(init_cl.inverse(), init_cr.inverse());
    let deltas = CalibrationTriple::new(*d_lc, *d_rc, *d_rc * d_lc.inverse());
    (init, deltas)
}

/// Composes the corrections of a refinement cascade.
///
/// Stage `k` holds the corrections `T^k_LC`, `T^k_RC`, `T^k_RL` predicted on
/// inputs already corrected by stages `1..k`. The camera pairs telescope,
/// `T_CL = (T^1_LC ... T^n_LC)^-1 * T_CL^init`; the LiDAR-RADAR pair is
/// rebuilt from the camera pairs after `n - 1` stages,
/// `T_LR = (T^n_RL)^-1 * (T_CL^(n-1))^-1 * T_CR^(n-1)`. The result is returned
/// in triple form (`lc = T_CL^-1`, `rc = T_CR^-1`, `rl = T_LR^-1`).
pub fn iterative_refinement_compose(
    stages: &[CalibrationTriple],
    init: &CalibrationTriple,
) -> Result<CalibrationTriple> {
    let last = stages
        .last()
        .ok_or_else(|| Error::Config("at least one refinement stage is required".into()))?;
    let init_cl = init.lc.inverse();
    let init_cr = init.rc.inverse();
    let mut prod_lc = RigidTransform::IDENTITY;
    let mut prod_rc = RigidTransform::IDENTITY;
    for s in &stages[..stages.len() - 1] {
        prod_lc = prod_lc * s.lc;
        prod_rc = prod_rc * s.rc;
    }
    let prev_cl = prod_lc.inverse() * init_cl;
    let prev_cr = prod_rc.inverse() * init_cr;
    let t_cl = (prod_lc * last.lc).inverse() * init_cl;
    let t_cr = (prod_rc * last.rc).inverse() * init_cr;
    let t_lr = last.rl.inverse() * prev_cl.inverse() * prev_cr;
    Ok(CalibrationTriple::new(t_cl.inverse(), t_cr.inverse(), t_lr.inverse()))
}

/// Ground-truth extrinsics of a rig whose sensors can move.
///
/// A sensor drift right-multiplies the sensor's mounting pose by its delta;
/// the pairwise transforms are updated in place so that an undisturbed rig
/// reproduces its starting triple bit for bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rig {
    triple: CalibrationTriple,
}

impl Rig {
    pub fn from_triple(gt: &CalibrationTriple) -> Self {
        Self { triple: *gt }
    }

    pub fn triple(&self) -> CalibrationTriple {
        self.triple
    }

    pub fn apply(&mut self, event: &DriftEvent) {
        let d = event.delta;
        let t = &mut self.triple;
        match event.sensor {
            Sensor::Lidar => {
                t.lc = d.inverse() * t.lc;
                t.rl = t.rl * d;
            }
            Sensor::Radar => {
                t.rc = d.inverse() * t.rc;
                t.rl = d.inverse() * t.rl;
            }
            Sensor::Camera => {
                t.lc = t.lc * d;
                t.rc = t.rc * d;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub frame: usize,
    pub pair: Pair,
    pub decision: &'static str,
    pub spike: bool,
    pub rot_estimate_deg: f64,
    pub trans_estimate_m: f64,
    /// `direct`, `loop_closure`, `held` or empty.
    pub event: &'static str,
    pub true_rot_err_deg: f64,
    pub true_trans_err_m: f64,
    pub est_rot_err_deg: f64,
    pub est_trans_err_m: f64,
}

impl FrameRecord {
    pub const CSV_HEADER: &'static str = "frame,pair,decision,rot_estimate_deg,trans_estimate_m,event,true_rot_err_deg,true_trans_err_m";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.frame,
            self.pair,
            self.decision,
            self.rot_estimate_deg,
            self.trans_estimate_m,
            self.event,
            self.true_rot_err_deg,
            self.true_trans_err_m
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionSummary {
    pub onset: usize,
    pub sensor: Sensor,
    /// Frames observed from the onset up to and including the deciding frame.
    pub latency: Option<usize>,
    /// The update touched exactly the two pairs involving the drifted sensor.
    pub localized: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub frames: usize,
    pub update_events: usize,
    pub detections: Vec<DetectionSummary>,
    pub false_positives: usize,
    pub spikes: usize,
    pub spikes_in_window: usize,
    pub mean_rot_est_err_deg: f64,
    pub mean_trans_est_err_m: f64,
}

impl RunSummary {
    pub fn render(&self) -> String {
        let mut s = format!(
            "frames={}\nupdate_events={}\nfalse_positives={}\nspikes={}\nspikes_in_window={}\nmean_rot_est_err_deg={}\nmean_trans_est_err_m={}\n",
            self.frames,
            self.update_events,
            self.false_positives,
            self.spikes,
            self.spikes_in_window,
            self.mean_rot_est_err_deg,
            self.mean_trans_est_err_m
        );
        for d in &self.detections {
            let latency = d.latency.map_or_else(|| "undetected".to_string(), |l| l.to_string());
            s.push_str(&format!(
                "drift onset={} sensor={} latency_frames={} localized={}\n",
                d.onset, d.sensor, latency, d.localized
            ));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub records: Vec<FrameRecord>,
    pub events: Vec<UpdateEvent>,
    pub summary: RunSummary,
    pub final_init: CalibrationTriple,
    pub final_ground_truth: CalibrationTriple,
}

/// `T_gt * T_init^-1` per pair; exactly the identity where the two agree.
fn true_errors(gt: &CalibrationTriple, init: &CalibrationTriple) -> CalibrationTriple {
    gt.map(|p, g| {
        let i = init.get(p);
        if g == i {
            RigidTransform::IDENTITY
        } else {
            *g * i.inverse()
        }
    })
}

pub fn run_scenario(
    s: &DriftScenario,
    cfg: &MonitorConfig,
    mpn: Option<&MpnConfig>,
) -> Result<ScenarioRun> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut rig = Rig::from_triple(&s.ground_truth);
    let mut cal = OnlineCalibrator::new(*cfg, s.initial.unwrap_or(s.ground_truth))?;
    let mut records = Vec::with_capacity(s.frames * 3);
    let mut events: Vec<UpdateEvent> = Vec::new();
    let mut false_positives = 0;
    let mut spikes = 0;
    let mut spikes_in_window = 0;
    let mut pending_spike = [false; 3];
    let (mut rot_err_sum, mut trans_err_sum) = (0.0, 0.0);
    let mut next_event = 0;

    for frame in 0..s.frames {
        while next_event < s.events.len() && s.events[next_event].frame == frame {
            rig.apply(&s.events[next_event]);
            next_event += 1;
        }
        let gt = rig.triple();
        let truth = true_errors(&gt, cal.init());

        let mut spiked = [false; 3];
        let noisy = truth.map(|p, e| {
            let (n, spike) = s.noise.sample(&mut rng);
            spiked[p.index()] = spike;
            RigidTransform::new(n.rotation * e.rotation, e.translation + n.translation)
        });
        let predictions = match mpn {
            Some(mpn_cfg) => {
                let init = *cal.init();
                let absolute = noisy.map(|p, e| *e * *init.get(p));
                refine(&absolute, mpn_cfg).map(|p, t| *t * init.get(p).inverse())
            }
            None => noisy,
        };

        let outcomes = cal.ingest(&predictions);
        for p in Pair::ALL {
            let i = p.index();
            // a spike buffered last frame either entered now as part of a pair or was dropped
            if pending_spike[i] && outcomes[i].decision == crate::monitor::Decision::PairAccepted {
                spikes_in_window += 1;
            }
            if spiked[i] && outcomes[i].decision == crate::monitor::Decision::Accepted {
                spikes_in_window += 1;
            }
            pending_spike[i] = spiked[i] && outcomes[i].decision == crate::monitor::Decision::Buffered;
        }
        spikes += spiked.iter().filter(|&&b| b).count();

        let estimates = Pair::ALL.map(|p| *cal.estimate(p));
        let frame_events = cal.maybe_update_calibration(frame);
        for ev in &frame_events {
            if ev.method == UpdateMethod::Direct {
                let (r, t) = truth.get(ev.pair).distance(&RigidTransform::IDENTITY);
                if r < cfg.tau_cal_r_deg && t < cfg.tau_cal_t_m {
                    false_positives += 1;
                }
            }
        }

        for p in Pair::ALL {
            let est = estimates[p.index()];
            let tru = truth.get(p);
            let (rot_est, trans_est) = est.distance(&RigidTransform::IDENTITY);
            let (true_rot, true_trans) = tru.distance(&RigidTransform::IDENTITY);
            let (est_rot_err, est_trans_err) = est.distance(tru);
            rot_err_sum += est_rot_err;
            trans_err_sum += est_trans_err;
            let event = frame_events
                .iter()
                .find(|e| e.pair == p)
                .map(|e| match e.method {
                    UpdateMethod::Direct => "direct",
                    UpdateMethod::LoopClosure => "loop_closure",
                })
                .or_else(|| frame_events.first().filter(|e| e.held == p).map(|_| "held"))
                .unwrap_or("");
            records.push(FrameRecord {
                frame,
                pair: p,
                decision: outcomes[p.index()].label(),
                spike: spiked[p.index()],
                rot_estimate_deg: rot_est,
                trans_estimate_m: trans_est,
                event,
                true_rot_err_deg: true_rot,
                true_trans_err_m: true_trans,
                est_rot_err_deg: est_rot_err,
                est_trans_err_m: est_trans_err,
            });
        }
        events.extend(frame_events);
    }

    let detections = s
        .events
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let horizon = s.events.get(i + 1).map_or(s.frames, |n| n.frame);
            let first = events
                .iter()
                .filter(|e| e.frame >= d.frame && e.frame < horizon && e.method == UpdateMethod::Direct)
                .min_by_key(|e| e.frame);
            match first {
                None => DetectionSummary {
                    onset: d.frame,
                    sensor: d.sensor,
                    latency: None,
                    localized: false,
                },
                Some(direct) => {
                    let derived = events
                        .iter()
                        .find(|e| e.frame == direct.frame && e.method == UpdateMethod::LoopClosure)
                        .map(|e| e.pair);
                    let touched = [Some(direct.pair), derived];
                    let localized = d.sensor.pairs().iter().all(|p| touched.contains(&Some(*p)));
                    DetectionSummary {
                        onset: d.frame,
                        sensor: d.sensor,
                        latency: Some(direct.frame - d.frame + 1),
                        localized,
                    }
                }
            }
        })
        .collect();

    let n = (s.frames * 3).max(1) as f64;
    let summary = RunSummary {
        frames: s.frames,
        update_events: events.iter().filter(|e| e.method == UpdateMethod::Direct).count(),
        detections,
        false_positives,
        spikes,
        spikes_in_window,
        mean_rot_est_err_deg: rot_err_sum / n,
        mean_trans_est_err_m: trans_err_sum / n,
    };
    Ok(ScenarioRun {
        records,
        events,
        summary,
        final_init: *cal.init(),
        final_ground_truth: rig.triple(),
    })
}
