//! Online calibration monitor.
//!
//! Every sensor pair keeps a moving window of accepted error predictions
//! (newest first). A prediction enters the window only when it is consistent
//! with its predecessor in both rotation and translation; an inconsistent one
//! is parked in a one-slot buffer and confirmed or rejected by the next
//! frame. Exponentially weighted window averages estimate the current
//! calibration error, and when an estimate crosses its recalibration
//! threshold the drifted sensor is localized by comparing the three pairs and
//! the initial extrinsics are corrected while preserving the loop constraint.
//!
//! Error convention: a prediction `E` for pair `a` is the correction with
//! `T_gt(a) ~= E * T_init(a)`.

use std::collections::VecDeque;
use std::fmt;

use log::warn;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mpn::{CalibrationTriple, Pair};
use crate::se3::{RigidTransform, Translation3, UnitQuaternion, Vec3};

/// How the translation estimate is formed from the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationAveraging {
    /// `sum_k w'_k t_{t-k}`.
    WeightedSum,
    /// The nested fold used for rotations, with lerp in place of SLERP.
    #[default]
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorConfig {
    pub window: usize,
    pub alpha: f64,
    pub tau_r_deg: f64,
    pub tau_t_m: f64,
    pub tau_cal_r_deg: f64,
    pub tau_cal_t_m: f64,
    pub translation_averaging: TranslationAveraging,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            window: 12,
            alpha: 0.65,
            tau_r_deg: 0.05,
            tau_t_m: 0.01,
            tau_cal_r_deg: 0.05,
            tau_cal_t_m: 0.01,
            translation_averaging: TranslationAveraging::default(),
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("decay alpha must lie in (0, 1)".into()));
        }
        let taus = [self.tau_r_deg, self.tau_t_m, self.tau_cal_r_deg, self.tau_cal_t_m];
        if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config("all thresholds must be positive".into()));
        }
        Ok(())
    }

    /// Both consistency checks between consecutive predictions.
    pub fn consistent(&self, a: &RigidTransform, b: &RigidTransform) -> bool {
        let (rot, trans) = a.distance(b);
        rot <= self.tau_r_deg && trans <= self.tau_t_m
    }
}

/// `alpha^k` for `k = 0..n`, normalized to sum 1, newest first.
pub fn normalized_weights(cfg: &MonitorConfig, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|k| cfg.alpha.powi(k as i32)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Accepted predictions, newest first, at most `capacity` long.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingWindow {
    entries: VecDeque<RigidTransform>,
    capacity: usize,
}

impl MovingWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Window filled with identity entries.
    pub fn filled_identity(capacity: usize) -> Self {
        Self {
            entries: std::iter::repeat_n(RigidTransform::IDENTITY, capacity).collect(),
            capacity,
        }
    }

    pub fn push(&mut self, entry: RigidTransform) {
        if self.entries.len() == self.capacity {
            self.entries.pop_back();
        }
        self.entries.push_front(entry);
    }

    pub fn newest(&self) -> Option<&RigidTransform> {
        self.entries.front()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &RigidTransform> {
        self.entries.iter()
    }
}

pub fn translation_average(window: &MovingWindow, cfg: &MonitorConfig) -> Option<Translation3> {
    if window.is_empty() {
        return None;
    }
    let w = normalized_weights(cfg, window.len());
    Some(
        window
            .iter()
            .zip(&w)
            .fold(Vec3::ZERO, |acc, (e, wk)| acc + e.translation * *wk),
    )
}

/// Nested fold `lerp(... lerp(t_0, t_1, w'_1) ..., t_{n-1}, w'_{n-1})`.
pub fn translation_average_sequential(
    window: &MovingWindow,
    cfg: &MonitorConfig,
) -> Option<Translation3> {
    let w = normalized_weights(cfg, window.len());
    let mut it = window.iter();
    let first = it.next()?.translation;
    Some(
        it.zip(&w[1..])
            .fold(first, |acc, (e, wk)| acc.lerp(e.translation, *wk)),
    )
}

/// Nested fold `slerp(... slerp(r_0, r_1, w'_1) ..., r_{n-1}, w'_{n-1})`,
/// starting from the newest rotation.
pub fn quaternion_average(window: &MovingWindow, cfg: &MonitorConfig) -> Option<UnitQuaternion> {
    let w = normalized_weights(cfg, window.len());
    let mut it = window.iter();
    let first = it.next()?.rotation;
    Some(
        it.zip(&w[1..])
            .fold(first, |acc, (e, wk)| acc.slerp(&e.rotation, *wk)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Normal,
    Buffered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Consistent with the newest window entry and inserted.
    Accepted,
    /// Consistent with the buffered prediction; both were inserted.
    PairAccepted,
    /// Inconsistent; held in the buffer for the next frame.
    Buffered,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOutcome {
    pub decision: Decision,
    /// The previously buffered prediction, when it was rejected as an outlier.
    pub discarded: Option<RigidTransform>,
}

impl IngestOutcome {
    pub fn label(&self) -> &'static str {
        match (self.decision, self.discarded.is_some()) {
            (Decision::Accepted, false) => "accepted",
            (Decision::Accepted, true) => "outlier+accepted",
            (Decision::PairAccepted, _) => "pair_accepted",
            (Decision::Buffered, false) => "buffered",
            (Decision::Buffered, true) => "outlier+buffered",
        }
    }
}

/// Window, buffer and current estimate for one sensor pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMonitor {
    window: MovingWindow,
    buffer: Option<RigidTransform>,
    estimate: RigidTransform,
}

impl PairMonitor {
    pub fn new(cfg: &MonitorConfig) -> Self {
        let mut m = Self {
            window: MovingWindow::new(cfg.window),
            buffer: None,
            estimate: RigidTransform::IDENTITY,
        };
        m.reset_windows(cfg);
        m
    }

    /// Refills the window with identity entries and clears the buffer.
    pub fn reset_windows(&mut self, cfg: &MonitorConfig) {
        self.window = MovingWindow::filled_identity(cfg.window);
        self.buffer = None;
        self.estimate = RigidTransform::IDENTITY;
    }

    pub fn window(&self) -> &MovingWindow {
        &self.window
    }

    pub fn buffer(&self) -> Option<&RigidTransform> {
        self.buffer.as_ref()
    }

    pub fn phase(&self) -> Phase {
        if self.buffer.is_some() {
            Phase::Buffered
        } else {
            Phase::Normal
        }
    }

    /// Current averaged error estimate.
    pub fn estimate(&self) -> &RigidTransform {
        &self.estimate
    }

    fn insert(&mut self, entry: RigidTransform, cfg: &MonitorConfig) {
        self.window.push(entry);
        self.recompute(cfg);
    }

    fn recompute(&mut self, cfg: &MonitorConfig) {
        let rotation = quaternion_average(&self.window, cfg).unwrap_or_default();
        let translation = match cfg.translation_averaging {
            TranslationAveraging::WeightedSum => translation_average(&self.window, cfg),
            TranslationAveraging::Sequential => translation_average_sequential(&self.window, cfg),
        }
        .unwrap_or_default();
        self.estimate = RigidTransform::new(rotation, translation);
    }

    fn check_against_window(&mut self, pred: RigidTransform, cfg: &MonitorConfig) -> Decision {
        let ok = self
            .window
            .newest()
            .is_none_or(|newest| cfg.consistent(&pred, newest));
        if ok {
            self.insert(pred, cfg);
            Decision::Accepted
        } else {
            self.buffer = Some(pred);
            Decision::Buffered
        }
    }

    pub fn ingest(&mut self, pred: RigidTransform, cfg: &MonitorConfig) -> IngestOutcome {
        match self.buffer.take() {
            None => IngestOutcome {
                decision: self.check_against_window(pred, cfg),
                discarded: None,
            },
            Some(buffered) if cfg.consistent(&pred, &buffered) => {
                self.window.push(buffered);
                self.insert(pred, cfg);
                IngestOutcome {
                    decision: Decision::PairAccepted,
                    discarded: None,
                }
            }
            Some(buffered) => IngestOutcome {
                decision: self.check_against_window(pred, cfg),
                discarded: Some(buffered),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trigger {
    Rotation,
    Translation,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trigger::Rotation => "rotation",
            Trigger::Translation => "translation",
        })
    }
}

/// Which pair is corrected directly, which keeps its extrinsics and which is
/// re-derived through the loop constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdatePlan {
    pub trigger: Trigger,
    pub direct: Pair,
    pub held: Pair,
    pub derived: Pair,
    /// Both non-triggering pairs were also above threshold.
    pub ambiguous: bool,
}

/// Picks the update for the given per-pair `(rotation deg, translation m)`
/// error magnitudes. Rotation decides whenever any rotational estimate is at
/// or above its threshold; otherwise translation is checked. The first pair
/// (in `lc, rc, rl` order) over the threshold is corrected directly; of the
/// other two, the one with the smaller deviation is held.
pub fn plan_update(magnitudes: &[(f64, f64); 3], cfg: &MonitorConfig) -> Option<UpdatePlan> {
    let rot_over = |p: Pair| magnitudes[p.index()].0 >= cfg.tau_cal_r_deg;
    let trans_over = |p: Pair| magnitudes[p.index()].1 >= cfg.tau_cal_t_m;
    let (trigger, component): (Trigger, fn(&(f64, f64)) -> f64) =
        if Pair::ALL.iter().any(|&p| rot_over(p)) {
            (Trigger::Rotation, |m| m.0)
        } else if Pair::ALL.iter().any(|&p| trans_over(p)) {
            (Trigger::Translation, |m| m.1)
        } else {
            return None;
        };
    let over = |p: Pair| match trigger {
        Trigger::Rotation => rot_over(p),
        Trigger::Translation => trans_over(p),
    };
    let direct = *Pair::ALL.iter().find(|&&p| over(p))?;
    let [b, c] = direct.others();
    let (held, derived) = if component(&magnitudes[b.index()]) <= component(&magnitudes[c.index()]) {
        (b, c)
    } else {
        (c, b)
    };
    Some(UpdatePlan {
        trigger,
        direct,
        held,
        derived,
        ambiguous: over(held) && over(derived),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateMethod {
    Direct,
    LoopClosure,
}

impl fmt::Display for UpdateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMethod::Direct => "direct",
            UpdateMethod::LoopClosure => "loop_closure",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateEvent {
    /// Frame whose estimates triggered the update; the new extrinsics apply
    /// from the following frame.
    pub frame: usize,
    pub pair: Pair,
    pub trigger: Trigger,
    pub method: UpdateMethod,
    pub held: Pair,
    pub old_init: RigidTransform,
    pub new_init: RigidTransform,
}

impl UpdateEvent {
    pub fn effective_frame(&self) -> usize {
        self.frame + 1
    }

    /// `key=value` record for the event log.
    pub fn record(&self) -> String {
        format!(
            "frame={} effective_frame={} pair={} trigger={} method={} held={} old_init=\"{}\" new_init=\"{}\"",
            self.frame,
            self.effective_frame(),
            self.pair,
            self.trigger,
            self.method,
            self.held,
            self.old_init,
            self.new_init
        )
    }
}

/// The three pair monitors plus the live initial extrinsics they correct.
#[derive(Clone, Debug)]
pub struct OnlineCalibrator {
    cfg: MonitorConfig,
    monitors: [PairMonitor; 3],
    init: CalibrationTriple,
}

impl OnlineCalibrator {
    pub fn new(cfg: MonitorConfig, init: CalibrationTriple) -> Result<Self> {
        cfg.validate()?;
        let m = PairMonitor::new(&cfg);
        Ok(Self {
            cfg,
            monitors: [m.clone(), m.clone(), m],
            init,
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.cfg
    }

    pub fn init(&self) -> &CalibrationTriple {
        &self.init
    }

    pub fn monitor(&self, pair: Pair) -> &PairMonitor {
        &self.monitors[pair.index()]
    }

    pub fn estimate(&self, pair: Pair) -> &RigidTransform {
        self.monitors[pair.index()].estimate()
    }

    /// `(rotation deg, translation m)` of each pair's estimate.
    pub fn estimate_magnitudes(&self) -> [(f64, f64); 3] {
        Pair::ALL.map(|p| self.estimate(p).distance(&RigidTransform::IDENTITY))
    }

    pub fn ingest(&mut self, predictions: &CalibrationTriple) -> [IngestOutcome; 3] {
        Pair::ALL.map(|p| self.monitors[p.index()].ingest(*predictions.get(p), &self.cfg))
    }

    pub fn reset_windows(&mut self, pair: Pair) {
        self.monitors[pair.index()].reset_windows(&self.cfg);
    }

    /// Applies the recalibration rule to the current estimates. Returns the
    /// direct and loop-derived events, or nothing when every estimate is
    /// below its threshold.
    pub fn maybe_update_calibration(&mut self, frame: usize) -> Vec<UpdateEvent> {
        let Some(plan) = plan_update(&self.estimate_magnitudes(), &self.cfg) else {
            return Vec::new();
        };
        if plan.ambiguous {
            warn!(
                "frame {frame}: {} and {} both exceed the {} threshold; holding {} by smaller deviation",
                plan.held, plan.derived, plan.trigger, plan.held
            );
        }
        let old = self.init;
        let mut new = old;
        *new.get_mut(plan.direct) = *self.estimate(plan.direct) * *old.get(plan.direct);
        *new.get_mut(plan.derived) = new.loop_estimate(plan.derived);
        self.init = new;

        let event = |pair, method| UpdateEvent {
            frame,
            pair,
            trigger: plan.trigger,
            method,
            held: plan.held,
            old_init: *old.get(pair),
            new_init: *new.get(pair),
        };
        let events = vec![
            event(plan.direct, UpdateMethod::Direct),
            event(plan.derived, UpdateMethod::LoopClosure),
        ];
        self.reset_windows(plan.direct);
        self.reset_windows(plan.derived);
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::EulerAngles;

    fn rot(yaw_deg: f64) -> RigidTransform {
        RigidTransform::from_rotation(UnitQuaternion::rz_deg(yaw_deg))
    }

    fn trans(x: f64) -> RigidTransform {
        RigidTransform::from_translation(Vec3::new(x, 0.0, 0.0))
    }

    fn window_of(entries: &[RigidTransform]) -> MovingWindow {
        // entries given newest first
        let mut w = MovingWindow::new(entries.len());
        for e in entries.iter().rev() {
            w.push(*e);
        }
        w
    }

    #[test]
    fn weights() {
        let cfg = MonitorConfig {
            alpha: 0.5,
            ..Default::default()
        };
        assert_eq!(normalized_weights(&cfg, 1), vec![1.0]);
        let w = normalized_weights(&cfg, 3);
        for (a, b) in w.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for n in 1..=12 {
            let s: f64 = normalized_weights(&MonitorConfig::default(), n).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_averages() {
        let cfg = MonitorConfig {
            alpha: 0.5,
            ..Default::default()
        };
        let w = window_of(&[trans(1.0), trans(0.0)]);
        let t = translation_average(&w, &cfg).unwrap();
        assert!((t.x - 2.0 / 3.0).abs() < 1e-15);
        let s = translation_average_sequential(&w, &cfg).unwrap();
        assert!((s.x - 2.0 / 3.0).abs() < 1e-15);
        let c = window_of(&[trans(0.4); 5]);
        assert!((translation_average(&c, &cfg).unwrap().x - 0.4).abs() < 1e-15);
        assert!(translation_average(&MovingWindow::new(3), &cfg).is_none());
        assert!(translation_average_sequential(&MovingWindow::new(3), &cfg).is_none());
        assert!(quaternion_average(&MovingWindow::new(3), &cfg).is_none());
    }

    #[test]
    fn quaternion_average_examples() {
        let cfg = MonitorConfig {
            alpha: 0.5,
            ..Default::default()
        };
        let q = UnitQuaternion::from_euler(EulerAngles::new(1.0, 2.0, 3.0));
        let c = window_of(&[RigidTransform::from_rotation(q); 4]);
        assert!(quaternion_average(&c, &cfg).unwrap().angular_distance(&q) < 1e-9);
        // alpha = 1/2 would give w'_1 = 1/3; alpha -> 1 gives 1/2
        let cfg1 = MonitorConfig {
            alpha: 1.0 - 1e-12,
            ..Default::default()
        };
        let w = window_of(&[rot(0.0), rot(90.0)]);
        let m = quaternion_average(&w, &cfg1).unwrap();
        assert!(m.angular_distance(&UnitQuaternion::rz_deg(45.0)) < 1e-6);
    }

    #[test]
    fn quaternion_average_three_entries_matches_hand_unrolled() {
        let cfg = MonitorConfig::default();
        let r: Vec<UnitQuaternion> = [(1.0, 0.0, 5.0), (-2.0, 3.0, 1.0), (0.5, -4.0, -6.0)]
            .iter()
            .map(|&(a, b, c)| UnitQuaternion::from_euler(EulerAngles::new(a, b, c)))
            .collect();
        let w = normalized_weights(&cfg, 3);
        let expect = r[0].slerp(&r[1], w[1]).slerp(&r[2], w[2]);
        let win = window_of(&r.iter().map(|q| RigidTransform::from_rotation(*q)).collect::<Vec<_>>());
        assert!(quaternion_average(&win, &cfg).unwrap().angular_distance(&expect) < 1e-12);
    }

    #[test]
    fn window_evicts_oldest() {
        let mut w = MovingWindow::new(2);
        w.push(trans(1.0));
        w.push(trans(2.0));
        w.push(trans(3.0));
        assert_eq!(w.len(), 2);
        let xs: Vec<f64> = w.iter().map(|e| e.translation.x).collect();
        assert_eq!(xs, vec![3.0, 2.0]);
    }

    #[test]
    fn steady_stream_is_accepted() {
        let cfg = MonitorConfig::default();
        let mut m = PairMonitor::new(&cfg);
        for i in 0..30 {
            let out = m.ingest(rot(0.001 * (i % 3) as f64), &cfg);
            assert_eq!(out.decision, Decision::Accepted);
        }
    }

    #[test]
    fn isolated_spike_is_discarded() {
        let cfg = MonitorConfig::default();
        let mut m = PairMonitor::new(&cfg);
        assert_eq!(m.ingest(rot(0.0), &cfg).decision, Decision::Accepted);
        let spike = m.ingest(rot(1.0), &cfg);
        assert_eq!(spike.decision, Decision::Buffered);
        assert_eq!(m.phase(), Phase::Buffered);
        let back = m.ingest(rot(0.0), &cfg);
        assert_eq!(back.decision, Decision::Accepted);
        assert!(back.discarded.is_some());
        assert_eq!(m.phase(), Phase::Normal);
        assert!(m.window().iter().all(|e| e.rotation.angular_distance(&UnitQuaternion::IDENTITY) < 1e-12));
    }

    #[test]
    fn sustained_step_enters_after_two_frames() {
        let cfg = MonitorConfig::default();
        let mut m = PairMonitor::new(&cfg);
        assert_eq!(m.ingest(rot(0.3), &cfg).decision, Decision::Buffered);
        assert_eq!(m.ingest(rot(0.3), &cfg).decision, Decision::PairAccepted);
        assert_eq!(m.window().len(), 12);
        let stepped = m
            .window()
            .iter()
            .filter(|e| e.rotation.angular_distance(&UnitQuaternion::IDENTITY) > 0.2)
            .count();
        assert_eq!(stepped, 2);
    }

    #[test]
    fn phase_three_rebuffers() {
        let cfg = MonitorConfig::default();
        let mut m = PairMonitor::new(&cfg);
        assert_eq!(m.ingest(rot(1.0), &cfg).decision, Decision::Buffered);
        // new value inconsistent with the buffer and with the window
        let out = m.ingest(rot(-1.0), &cfg);
        assert_eq!(out.decision, Decision::Buffered);
        assert!(out.discarded.is_some());
        assert_eq!(out.label(), "outlier+buffered");
        assert!(m.buffer().unwrap().rotation.angular_distance(&UnitQuaternion::rz_deg(-1.0)) < 1e-12);
    }

    #[test]
    fn translation_check_alone_buffers() {
        let cfg = MonitorConfig::default();
        let mut m = PairMonitor::new(&cfg);
        assert_eq!(m.ingest(trans(0.02), &cfg).decision, Decision::Buffered);
    }

    #[test]
    fn reset_is_idempotent_and_identity() {
        let cfg = MonitorConfig::default();
        let mut m = PairMonitor::new(&cfg);
        m.ingest(rot(0.01), &cfg);
        m.ingest(rot(0.5), &cfg);
        m.reset_windows(&cfg);
        let once = m.clone();
        m.reset_windows(&cfg);
        assert_eq!(m, once);
        assert_eq!(*m.estimate(), RigidTransform::IDENTITY);
        assert_eq!(m.window().len(), 12);
        assert_eq!(m.phase(), Phase::Normal);
        // next ingest compares against identity
        assert_eq!(m.ingest(rot(0.06), &cfg).decision, Decision::Buffered);
    }

    #[test]
    fn plan_examples() {
        let cfg = MonitorConfig::default();
        assert_eq!(plan_update(&[(0.0, 0.0); 3], &cfg), None);
        assert_eq!(plan_update(&[(0.01, 0.009), (0.02, 0.005), (0.0, 0.0)], &cfg), None);

        // LiDAR drift: lc and rl off, rc quiet
        let p = plan_update(&[(0.2, 0.0), (0.001, 0.0), (0.2, 0.0)], &cfg).unwrap();
        assert_eq!((p.trigger, p.direct, p.held, p.derived), (Trigger::Rotation, Pair::LidarCamera, Pair::RadarCamera, Pair::LidarRadar));
        assert!(!p.ambiguous);

        // camera drift: lc and rc off
        let p = plan_update(&[(0.2, 0.0), (0.2, 0.0), (0.002, 0.0)], &cfg).unwrap();
        assert_eq!((p.direct, p.held, p.derived), (Pair::LidarCamera, Pair::LidarRadar, Pair::RadarCamera));

        // RADAR drift by translation only
        let p = plan_update(&[(0.0, 0.001), (0.0, 0.03), (0.0, 0.03)], &cfg).unwrap();
        assert_eq!((p.trigger, p.direct, p.held), (Trigger::Translation, Pair::RadarCamera, Pair::LidarCamera));

        // rotation wins over translation
        let p = plan_update(&[(0.0, 0.05), (0.06, 0.0), (0.07, 0.0)], &cfg).unwrap();
        assert_eq!((p.trigger, p.direct), (Trigger::Rotation, Pair::RadarCamera));

        let p = plan_update(&[(0.1, 0.0), (0.1, 0.0), (0.1, 0.0)], &cfg).unwrap();
        assert!(p.ambiguous);
    }

    #[test]
    fn config_validation() {
        assert!(MonitorConfig::default().validate().is_ok());
        let bad = MonitorConfig {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MonitorConfig {
            window: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MonitorConfig {
            tau_t_m: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
