//! Point-cloud input processing: frame changes, inverse-depth projection
//! images and bird's-eye-view height rasters.
//!
//! BEV geometry: cloud `x` is lateral, `y` longitudinal (forward) and `z` is
//! the stored height. Column `u = scale_x * (x - lateral_min)` and row
//! `v = scale_y * (longitudinal_max - y)`, so the forward direction points up
//! the image and `(lateral_min, longitudinal_max)` lands on pixel `(0, 0)`.
//! With the default ranges and 10 px/m this gives the 600 x 300 grid.

use crate::error::{Error, Result};
use crate::se3::{RigidTransform, Vec3};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::format(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `t` to every point.
    pub fn transform(&self, t: &RigidTransform) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| t.transform_point(*p)).collect(),
        }
    }
}

pub fn transform_cloud(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    cloud.transform(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::Config("focal lengths must be positive".into()));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64) {
            return Err(Error::Config("cx must lie inside the image width".into()));
        }
        if !(self.cy > 0.0 && self.cy < self.height as f64) {
            return Err(Error::Config("cy must lie inside the image height".into()));
        }
        Ok(())
    }
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        }
    }
}

/// Row-major H x W grid of inverse depths (1/m); 0 marks an empty pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl DepthImage {
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.width + u]
    }

    pub fn occupied(&self) -> usize {
        self.data.iter().filter(|&&d| d > 0.0).count()
    }
}

/// Projects a camera-frame cloud. Points behind the camera or outside the
/// frustum are dropped; when two points hit the same pixel the nearer one
/// (larger inverse depth) is kept.
pub fn project_to_depth_image(cloud: &PointCloud, k: &CameraIntrinsics) -> DepthImage {
    let mut data = vec![0.0; k.width * k.height];
    for p in &cloud.points {
        if p.z <= 0.0 {
            continue;
        }
        let u = (k.fx * p.x / p.z + k.cx).floor();
        let v = (k.fy * p.y / p.z + k.cy).floor();
        if u < 0.0 || v < 0.0 || u >= k.width as f64 || v >= k.height as f64 {
            continue;
        }
        let idx = v as usize * k.width + u as usize;
        let inv = 1.0 / p.z;
        if inv > data[idx] {
            data[idx] = inv;
        }
    }
    DepthImage {
        width: k.width,
        height: k.height,
        data,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BevConfig {
    lateral_range: [f64; 2],
    longitudinal_range: [f64; 2],
    scale_x: f64,
    scale_y: f64,
}

impl Default for BevConfig {
    fn default() -> Self {
        Self {
            lateral_range: [-15.0, 15.0],
            longitudinal_range: [0.0, 60.0],
            scale_x: 10.0,
            scale_y: 10.0,
        }
    }
}

impl BevConfig {
    pub fn new(
        lateral_range: [f64; 2],
        longitudinal_range: [f64; 2],
        scale_x: f64,
        scale_y: f64,
    ) -> Result<Self> {
        if !(lateral_range[0] < lateral_range[1]) {
            return Err(Error::Config("lateral range must satisfy min < max".into()));
        }
        if !(longitudinal_range[0] < longitudinal_range[1]) {
            return Err(Error::Config("longitudinal range must satisfy min < max".into()));
        }
        if !(scale_x > 0.0 && scale_y > 0.0) {
            return Err(Error::Config("BEV scales must be positive".into()));
        }
        Ok(Self {
            lateral_range,
            longitudinal_range,
            scale_x,
            scale_y,
        })
    }

    pub fn lateral_range(&self) -> [f64; 2] {
        self.lateral_range
    }

    pub fn longitudinal_range(&self) -> [f64; 2] {
        self.longitudinal_range
    }

    pub fn width(&self) -> usize {
        ((self.lateral_range[1] - self.lateral_range[0]) * self.scale_x).round() as usize
    }

    pub fn height(&self) -> usize {
        ((self.longitudinal_range[1] - self.longitudinal_range[0]) * self.scale_y).round() as usize
    }

    pub fn offset_x(&self) -> f64 {
        -self.lateral_range[0] * self.scale_x
    }

    pub fn offset_y(&self) -> f64 {
        self.longitudinal_range[1] * self.scale_y
    }

    /// Pixel `(u, v)` of an in-range point; `None` when filtered out.
    pub fn pixel(&self, p: Vec3) -> Option<(usize, usize)> {
        let [lat_lo, lat_hi] = self.lateral_range;
        let [lon_lo, lon_hi] = self.longitudinal_range;
        if p.x < lat_lo || p.x > lat_hi || p.y < lon_lo || p.y > lon_hi {
            return None;
        }
        let u = (self.scale_x * p.x + self.offset_x()).floor() as usize;
        let v = (-self.scale_y * p.y + self.offset_y()).floor() as usize;
        // the closed upper bound of each range falls on the last pixel
        Some((u.min(self.width() - 1), v.min(self.height() - 1)))
    }
}

/// Row-major height raster; `None` marks a cell without data.
#[derive(Clone, Debug, PartialEq)]
pub struct BevImage {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Option<f64>>,
}

impl BevImage {
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.cells[v * self.width + u]
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }
}

/// Rasterizes in-range points; a cell hit by several points keeps the
/// largest height.
pub fn rasterize_bev(cloud: &PointCloud, cfg: &BevConfig) -> BevImage {
    let (w, h) = (cfg.width(), cfg.height());
    let mut cells: Vec<Option<f64>> = vec![None; w * h];
    for p in &cloud.points {
        if let Some((u, v)) = cfg.pixel(*p) {
            let cell = &mut cells[v * w + u];
            *cell = Some(cell.map_or(p.z, |z| z.max(p.z)));
        }
    }
    BevImage {
        width: w,
        height: h,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::UnitQuaternion;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(pts.iter().copied().map(Vec3::from_array).collect()).unwrap()
    }

    #[test]
    fn transform_examples() {
        let p = cloud(&[[1.0, 0.0, 0.0], [3.0, -2.0, 5.0]]);
        assert_eq!(p.transform(&RigidTransform::IDENTITY), p);
        let r = RigidTransform::from_rotation(UnitQuaternion::rz_deg(90.0));
        let q = transform_cloud(&cloud(&[[1.0, 0.0, 0.0]]), &r);
        assert!((q.points[0] - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_points() {
        assert!(PointCloud::new(vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn depth_examples() {
        let k = CameraIntrinsics::default();
        let img = project_to_depth_image(&PointCloud::default(), &k);
        assert!(img.data.iter().all(|&d| d == 0.0));
        let img = project_to_depth_image(&cloud(&[[0.0, 0.0, 2.0]]), &k);
        assert_eq!(img.get(320, 240), 0.5);
        assert_eq!(img.occupied(), 1);
        // both on the optical axis: same pixel, nearer wins in either order
        for pts in [[[0.0, 0.0, 2.0], [0.0, 0.0, 4.0]], [[0.0, 0.0, 4.0], [0.0, 0.0, 2.0]]] {
            let img = project_to_depth_image(&cloud(&pts), &k);
            assert_eq!(img.get(320, 240), 0.5);
            assert_eq!(img.occupied(), 1);
        }
    }

    #[test]
    fn depth_drops_out_of_frustum() {
        let k = CameraIntrinsics::default();
        let img = project_to_depth_image(
            &cloud(&[[0.0, 0.0, -1.0], [100.0, 0.0, 1.0], [0.0, 0.0, 0.0]]),
            &k,
        );
        assert_eq!(img.occupied(), 0);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 5.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 2.0, 2.0, 4, 4).is_ok());
    }

    #[test]
    fn bev_default_shape_and_corners() {
        let cfg = BevConfig::default();
        let img = rasterize_bev(&PointCloud::default(), &cfg);
        assert_eq!((img.height, img.width), (600, 300));
        assert_eq!(img.occupied(), 0);
        // lateral min, longitudinal max -> (0, 0)
        assert_eq!(cfg.pixel(Vec3::new(-15.0, 60.0, 0.0)), Some((0, 0)));
        // opposite corner -> last pixel
        assert_eq!(cfg.pixel(Vec3::new(15.0, 0.0, 0.0)), Some((299, 599)));
        // 0.1 m footprint
        assert_eq!(cfg.pixel(Vec3::new(-14.95, 59.95, 0.0)), Some((0, 0)));
        assert_eq!(cfg.pixel(Vec3::new(-14.85, 59.85, 0.0)), Some((1, 1)));
        assert_eq!(cfg.pixel(Vec3::new(0.0, 61.0, 0.0)), None);
        assert_eq!(cfg.pixel(Vec3::new(0.0, -0.5, 0.0)), None);
        assert_eq!(cfg.pixel(Vec3::new(15.5, 10.0, 0.0)), None);
    }

    #[test]
    fn bev_keeps_max_height() {
        let cfg = BevConfig::default();
        let img = rasterize_bev(&cloud(&[[1.0, 10.05, 0.5], [1.01, 10.06, 1.5], [1.02, 10.07, -2.0]]), &cfg);
        assert_eq!(img.occupied(), 1);
        let (u, v) = cfg.pixel(Vec3::new(1.0, 10.05, 0.0)).unwrap();
        assert_eq!(img.get(u, v), Some(1.5));
    }

    #[test]
    fn bev_rejects_inverted_ranges() {
        assert!(BevConfig::new([15.0, -15.0], [0.0, 60.0], 10.0, 10.0).is_err());
        assert!(BevConfig::new([-15.0, 15.0], [60.0, 60.0], 10.0, 10.0).is_err());
        assert!(BevConfig::new([-15.0, 15.0], [0.0, 60.0], 0.0, 10.0).is_err());
    }
}
