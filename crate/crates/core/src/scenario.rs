//! TOML scenario files for the drift simulator.
//!
//! ```toml
//! [scenario]
//! name = "step"
//! frames = 120
//! seed = 7
//!
//! [ground_truth]            # rl is derived from the loop constraint
//! lc = "qw qx qy qz tx ty tz"    # or an array of 7 or 16 numbers
//! rc = [1, 0, 0, 0, 0.1, 0.5, -1.2]
//!
//! [initial]                 # optional, defaults to ground truth
//! lc = "..."
//! rc = "..."
//! rl = "..."                # optional
//!
//! [noise]
//! rot_sigma_deg = 0.015
//! trans_sigma_m = 0.003
//! outlier_prob = 0.01
//! outlier_scale = 10.0
//!
//! [[events]]
//! frame = 50
//! sensor = "lidar"          # lidar | radar | camera
//! rotation_deg = [0.0, 0.0, 0.2]   # roll, pitch, yaw
//! translation_m = [0.0, 0.0, 0.0]
//!
//! [monitor]
//! window = 12
//! alpha = 0.65
//! tau_r_deg = 0.05
//! tau_t_m = 0.01
//! tau_cal_r_deg = 0.05
//! tau_cal_t_m = 0.01
//! translation_averaging = "sequential"   # or "weighted_sum"
//!
//! [mpn]
//! enabled = true
//! alphas = [0.5, 0.5, 0.5, 0.5]   # or iterations + alpha
//! ```
//!
//! Every key except `[scenario].frames` and `[ground_truth]` is optional.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::io::read_text;
use crate::monitor::{MonitorConfig, TranslationAveraging};
use crate::mpn::{CalibrationTriple, MpnConfig};
use crate::se3::{EulerAngles, RigidTransform, Vec3};
use crate::sim::{DriftEvent, DriftScenario, NoiseModel, Sensor};

#[derive(Clone, Debug)]
pub struct ScenarioFile {
    pub scenario: DriftScenario,
    pub monitor: MonitorConfig,
    pub mpn: Option<MpnConfig>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TransformSpec {
    Record(String),
    Values(Vec<f64>),
}

impl TransformSpec {
    fn resolve(&self) -> Result<RigidTransform> {
        match self {
            TransformSpec::Record(s) => RigidTransform::parse_record(s),
            TransformSpec::Values(v) => RigidTransform::from_values(v),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeader {
    name: Option<String>,
    frames: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroundTruth {
    lc: Spanned<TransformSpec>,
    rc: Spanned<TransformSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    lc: Spanned<TransformSpec>,
    rc: Spanned<TransformSpec>,
    rl: Option<Spanned<TransformSpec>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    rot_sigma_deg: Option<f64>,
    trans_sigma_m: Option<f64>,
    outlier_prob: Option<f64>,
    outlier_scale: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    frame: usize,
    sensor: String,
    rotation_deg: Option<[f64; 3]>,
    translation_m: Option<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonitor {
    window: Option<usize>,
    alpha: Option<f64>,
    tau_r_deg: Option<f64>,
    tau_t_m: Option<f64>,
    tau_cal_r_deg: Option<f64>,
    tau_cal_t_m: Option<f64>,
    translation_averaging: Option<TranslationAveraging>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMpn {
    #[serde(default = "default_true")]
    enabled: bool,
    alphas: Option<Vec<f64>>,
    iterations: Option<usize>,
    alpha: Option<f64>,
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: RawHeader,
    ground_truth: Spanned<RawGroundTruth>,
    initial: Option<Spanned<RawInitial>>,
    noise: Option<Spanned<RawNoise>>,
    #[serde(default)]
    events: Vec<Spanned<RawEvent>>,
    monitor: Option<Spanned<RawMonitor>>,
    mpn: Option<Spanned<RawMpn>>,
}

struct Ctx<'a> {
    text: &'a str,
    path: PathBuf,
}

impl Ctx<'_> {
    fn line(&self, span: &Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err(&self, span: &Range<usize>, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line(span),
            msg: msg.into(),
        }
    }

    fn transform(&self, spec: &Spanned<TransformSpec>) -> Result<RigidTransform> {
        spec.get_ref().resolve().map_err(|e| self.err(&spec.span(), e.to_string()))
    }
}

pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioFile> {
    let ctx = Ctx {
        text,
        path: path.to_path_buf(),
    };
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        ctx.err(&span, e.message().trim().to_string())
    })?;

    let gt = raw.ground_truth.get_ref();
    let ground_truth = CalibrationTriple::from_camera_pairs(ctx.transform(&gt.lc)?, ctx.transform(&gt.rc)?);

    let initial = match &raw.initial {
        None => None,
        Some(init) => {
            let i = init.get_ref();
            let lc = ctx.transform(&i.lc)?;
            let rc = ctx.transform(&i.rc)?;
            Some(match &i.rl {
                Some(rl) => CalibrationTriple::new(lc, rc, ctx.transform(rl)?),
                None => CalibrationTriple::from_camera_pairs(lc, rc),
            })
        }
    };

    let mut noise = NoiseModel::default();
    if let Some(n) = &raw.noise {
        let r = n.get_ref();
        noise.rot_sigma_deg = r.rot_sigma_deg.unwrap_or(noise.rot_sigma_deg);
        noise.trans_sigma_m = r.trans_sigma_m.unwrap_or(noise.trans_sigma_m);
        noise.outlier_prob = r.outlier_prob.unwrap_or(noise.outlier_prob);
        noise.outlier_scale = r.outlier_scale.unwrap_or(noise.outlier_scale);
        noise.validate().map_err(|e| ctx.err(&n.span(), e.to_string()))?;
    }

    let mut events = Vec::with_capacity(raw.events.len());
    for ev in &raw.events {
        let r = ev.get_ref();
        let sensor = Sensor::parse(&r.sensor)
            .ok_or_else(|| ctx.err(&ev.span(), format!("unknown sensor {:?}", r.sensor)))?;
        if r.frame >= raw.scenario.frames {
            return Err(ctx.err(
                &ev.span(),
                format!("event frame {} is past the last frame {}", r.frame, raw.scenario.frames.saturating_sub(1)),
            ));
        }
        let [roll, pitch, yaw] = r.rotation_deg.unwrap_or([0.0; 3]);
        let delta = RigidTransform::from_euler_deg(
            EulerAngles::new(roll, pitch, yaw),
            Vec3::from_array(r.translation_m.unwrap_or([0.0; 3])),
        );
        if let Some(prev) = events.last().map(|e: &DriftEvent| e.frame) {
            if r.frame < prev {
                return Err(ctx.err(&ev.span(), "events must be listed in frame order"));
            }
        }
        events.push(DriftEvent {
            frame: r.frame,
            sensor,
            delta,
        });
    }

    let mut monitor = MonitorConfig::default();
    if let Some(m) = &raw.monitor {
        let r = m.get_ref();
        monitor.window = r.window.unwrap_or(monitor.window);
        monitor.alpha = r.alpha.unwrap_or(monitor.alpha);
        monitor.tau_r_deg = r.tau_r_deg.unwrap_or(monitor.tau_r_deg);
        monitor.tau_t_m = r.tau_t_m.unwrap_or(monitor.tau_t_m);
        monitor.tau_cal_r_deg = r.tau_cal_r_deg.unwrap_or(monitor.tau_cal_r_deg);
        monitor.tau_cal_t_m = r.tau_cal_t_m.unwrap_or(monitor.tau_cal_t_m);
        monitor.translation_averaging = r.translation_averaging.unwrap_or(monitor.translation_averaging);
        monitor.validate().map_err(|e| ctx.err(&m.span(), e.to_string()))?;
    }

    let mpn = match &raw.mpn {
        Some(m) if m.get_ref().enabled => {
            let r = m.get_ref();
            let cfg = match (&r.alphas, r.iterations, r.alpha) {
                (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                    return Err(ctx.err(&m.span(), "give either alphas or iterations/alpha, not both"));
                }
                (Some(a), None, None) => MpnConfig::new(a.clone()),
                (None, None, None) => Ok(MpnConfig::default()),
                (None, it, a) => MpnConfig::constant(it.unwrap_or(4), a.unwrap_or(0.5)),
            };
            Some(cfg.map_err(|e| ctx.err(&m.span(), e.to_string()))?)
        }
        _ => None,
    };

    Ok(ScenarioFile {
        scenario: DriftScenario {
            name: raw.scenario.name.unwrap_or_else(|| {
                path.file_stem()
                    .map_or_else(|| "scenario".to_string(), |s| s.to_string_lossy().into_owned())
            }),
            frames: raw.scenario.frames,
            ground_truth,
            initial,
            events,
            noise,
            seed: raw.scenario.seed,
        },
        monitor,
        mpn,
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    parse_scenario(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[scenario]
name = "t"
frames = 100
seed = 3

[ground_truth]
lc = "0.5 -0.5 0.5 -0.5 0.0 -0.08 -0.27"
rc = [1, 0, 0, 0, 0.05, 0.5, -1.2]
"#;

    fn parse(extra: &str) -> Result<ScenarioFile> {
        parse_scenario(&format!("{BASE}{extra}"), Path::new("s.toml"))
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let f = parse("").unwrap();
        assert_eq!(f.scenario.frames, 100);
        assert_eq!(f.scenario.seed, 3);
        assert_eq!(f.scenario.noise, NoiseModel::default());
        assert_eq!(f.monitor, MonitorConfig::default());
        assert!(f.mpn.is_none());
        assert!(f.scenario.initial.is_none());
        let gt = f.scenario.ground_truth;
        assert!(gt.rl.distance(&(gt.rc * gt.lc.inverse())).0 < 1e-12);
    }

    #[test]
    fn full_file() {
        let f = parse(
            r#"
[noise]
rot_sigma_deg = 0.0
outlier_prob = 0.0

[[events]]
frame = 50
sensor = "lidar"
rotation_deg = [0.0, 0.0, 0.2]

[[events]]
frame = 80
sensor = "Radar"
translation_m = [0.02, 0.0, 0.0]

[monitor]
window = 8
translation_averaging = "weighted_sum"

[mpn]
iterations = 3
alpha = 0.4
"#,
        )
        .unwrap();
        assert_eq!(f.scenario.noise.rot_sigma_deg, 0.0);
        assert_eq!(f.scenario.noise.trans_sigma_m, NoiseModel::default().trans_sigma_m);
        assert_eq!(f.scenario.events.len(), 2);
        assert_eq!(f.scenario.events[1].sensor, Sensor::Radar);
        assert!((f.scenario.events[0].delta.rotation.angle_rad().to_degrees() - 0.2).abs() < 1e-12);
        assert_eq!(f.monitor.window, 8);
        assert_eq!(f.monitor.translation_averaging, TranslationAveraging::WeightedSum);
        assert_eq!(f.mpn.unwrap().alphas(), &[0.4; 3]);
    }

    #[test]
    fn syntax_errors_are_line_anchored() {
        let e = parse("\n[noise]\nrot_sigma_deg = = 1\n").unwrap_err();
        assert_eq!(line_of(e), 12);
    }

    #[test]
    fn semantic_errors_are_line_anchored() {
        let e = parse_scenario(&BASE.replace("-0.27\"", "\""), Path::new("s.toml")).unwrap_err();
        assert_eq!(line_of(e), 8);
        let e = parse("\n[[events]]\nframe = 5\nsensor = \"sonar\"\n").unwrap_err();
        assert_eq!(line_of(e), 11);
        let e = parse("\n[monitor]\nalpha = 1.5\n").unwrap_err();
        assert_eq!(line_of(e), 11);
        let e = parse("\n[[events]]\nframe = 500\nsensor = \"lidar\"\n").unwrap_err();
        assert_eq!(line_of(e), 11);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse("\n[noise]\nsigma = 1.0\n").unwrap_err();
        assert_eq!(line_of(e), 12);
    }

    #[test]
    fn disabled_mpn_and_conflicting_keys() {
        assert!(parse("\n[mpn]\nenabled = false\n").unwrap().mpn.is_none());
        assert!(parse("\n[mpn]\nalphas = [0.5]\niterations = 2\n").is_err());
        assert_eq!(parse("\n[mpn]\n").unwrap().mpn, Some(MpnConfig::default()));
    }
}
