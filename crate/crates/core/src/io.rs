//! File formats: calibration triples, point clouds, PGM images and the
//! versioned CSV logs. Every writer goes through [`write_atomic`], so an
//! output file either appears complete or not at all.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mpn::{CalibrationTriple, Pair};
use crate::projection::{BevImage, DepthImage, PointCloud};
use crate::se3::{RigidTransform, Vec3};

pub const FRAME_LOG_VERSION: &str = "# loopcal frame-log v1";
pub const EVENT_LOG_VERSION: &str = "# loopcal event-log v1";
pub const LOSS_REPORT_VERSION: &str = "# loopcal loss-report v1";
pub const RESIDUAL_LOG_VERSION: &str = "# loopcal mpn-residuals v1";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("invalid number {t:?}")))
        .collect()
}

/// Parses `lc`, `rc` and optionally `rl` lines, each followed by a
/// transform record (7 or 16 numbers). A missing `rl` line is filled in from
/// the loop constraint.
pub fn parse_triple(text: &str, path: &Path) -> Result<CalibrationTriple> {
    let err = |line, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut slots: [Option<RigidTransform>; 3] = [None; 3];
    let mut last_line = 0;
    for (line, content) in content_lines(text) {
        last_line = line;
        let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let pair = Pair::parse(key).ok_or_else(|| err(line, format!("unknown pair {key:?}")))?;
        if slots[pair.index()].is_some() {
            return Err(err(line, format!("duplicate entry for {pair}")));
        }
        let values = parse_numbers(rest).map_err(|m| err(line, m))?;
        let t = RigidTransform::from_values(&values).map_err(|e| err(line, e.to_string()))?;
        slots[pair.index()] = Some(t);
    }
    match slots {
        [Some(lc), Some(rc), Some(rl)] => Ok(CalibrationTriple::new(lc, rc, rl)),
        [Some(lc), Some(rc), None] => Ok(CalibrationTriple::from_camera_pairs(lc, rc)),
        _ => Err(err(last_line.max(1), "expected lc and rc entries".into())),
    }
}

pub fn read_triple(path: &Path) -> Result<CalibrationTriple> {
    parse_triple(&read_text(path)?, path)
}

pub fn format_triple(t: &CalibrationTriple) -> String {
    Pair::ALL
        .iter()
        .map(|&p| format!("{p} {}\n", t.get(p)))
        .collect()
}

/// Binary clouds start with the little-endian `u64` point count followed by
/// `x y z` as little-endian `f64`.
pub fn decode_cloud_binary(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    let bad = |m: &str| Error::format(format!("{}: {m}", path.display()));
    let header: [u8; 8] = bytes
        .get(..8)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| bad("truncated header"))?;
    let n = u64::from_le_bytes(header) as usize;
    let body = &bytes[8..];
    if n.checked_mul(24) != Some(body.len()) {
        return Err(bad(&format!("expected {n} points, found {} payload bytes", body.len())));
    }
    let points = body
        .chunks_exact(24)
        .map(|c| {
            let f = |i: usize| f64::from_le_bytes(c[i * 8..i * 8 + 8].try_into().unwrap());
            Vec3::new(f(0), f(1), f(2))
        })
        .collect();
    PointCloud::new(points)
}

pub fn encode_cloud_binary(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + cloud.len() * 24);
    out.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    for p in &cloud.points {
        for v in p.to_array() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// One point per line, coordinates separated by whitespace or commas.
pub fn parse_cloud_text(text: &str, path: &Path) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (line, content) in content_lines(text) {
        let v = parse_numbers(content).map_err(|msg| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        })?;
        if v.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 3 coordinates, found {}", v.len()),
            });
        }
        points.push(Vec3::new(v[0], v[1], v[2]));
    }
    PointCloud::new(points)
}

pub fn format_cloud_text(cloud: &PointCloud) -> String {
    cloud
        .points
        .iter()
        .map(|p| format!("{} {} {}\n", p.x, p.y, p.z))
        .collect()
}

/// Reads `.bin` files as binary clouds and anything else as text.
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    if path.extension().is_some_and(|e| e == "bin") {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        decode_cloud_binary(&bytes, path)
    } else {
        parse_cloud_text(&read_text(path)?, path)
    }
}

/// Plain PGM (`P2`) with values scaled to `0..=255` over `[0, max]`; `None`
/// cells are written as 0.
fn pgm(width: usize, height: usize, values: impl Fn(usize, usize) -> Option<f64>) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in 0..height {
        for u in 0..width {
            if let Some(x) = values(u, v) {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P2\n{width} {height}\n255\n");
    for v in 0..height {
        let row: Vec<String> = (0..width)
            .map(|u| match values(u, v) {
                // occupied cells map to 1..=255 so they stay distinguishable from empty ones
                Some(x) => (1.0 + 254.0 * (x - lo) / span).round().to_string(),
                None => "0".to_string(),
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn depth_pgm(img: &DepthImage) -> String {
    pgm(img.width, img.height, |u, v| {
        let d = img.get(u, v);
        (d > 0.0).then_some(d)
    })
}

pub fn bev_pgm(img: &BevImage) -> String {
    pgm(img.width, img.height, |u, v| img.get(u, v))
}

/// Sparse `u,v,value` listing of occupied cells, for plotting.
pub fn depth_csv(img: &DepthImage) -> String {
    let mut out = String::from("u,v,inverse_depth\n");
    for v in 0..img.height {
        for u in 0..img.width {
            let d = img.get(u, v);
            if d > 0.0 {
                out.push_str(&format!("{u},{v},{d}\n"));
            }
        }
    }
    out
}

pub fn bev_csv(img: &BevImage) -> String {
    let mut out = String::from("u,v,height\n");
    for v in 0..img.height {
        for u in 0..img.width {
            if let Some(h) = img.get(u, v) {
                out.push_str(&format!("{u},{v},{h}\n"));
            }
        }
    }
    out
}
