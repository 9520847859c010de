//! Correlation cost volumes between feature grids and the deterministic part
//! of feature sharing (direct concatenation and soft-mask reweighting).
//!
//! The cost between pixel `p1` of grid `a` and `p2` of grid `b` is the dot
//! product of their per-pixel feature vectors divided by the channel count.
//! A volume stores one channel per displacement `(dy, dx)` in `[-d, d]^2`,
//! row-major (dy outer, dx inner); displacements that leave the grid read as 0.

use crate::error::{Error, Result};

/// Dense `C x H x W` features, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureGrid {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::Shape("feature grid dimensions must be positive".into()));
        }
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!(
                "expected {} values for {channels}x{height}x{width}, got {}",
                channels * height * width,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::format("feature grid contains non-finite values"));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
    }

    /// Parses a `C H W` header followed by `C*H*W` whitespace-separated values.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut dim = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::format(format!("missing {name} in header")))?
                .parse::<usize>()
                .map_err(|_| Error::format(format!("bad {name} in header")))
        };
        let (c, h, w) = (dim("C")?, dim("H")?, dim("W")?);
        let data = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::format(format!("not a number: `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(c, h, w, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn scaled(&self, s: f64) -> FeatureGrid {
        FeatureGrid {
            data: self.data.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    fn same_shape(&self, o: &FeatureGrid) -> Result<()> {
        if (self.channels, self.height, self.width) != (o.channels, o.height, o.width) {
            return Err(Error::Shape(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.channels, self.height, self.width, o.channels, o.height, o.width
            )));
        }
        Ok(())
    }
}

/// Pixel coordinate `(row, col)`.
pub type Pixel = (usize, usize);

pub fn correlation_cost(a: &FeatureGrid, b: &FeatureGrid, p1: Pixel, p2: Pixel) -> Result<f64> {
    a.same_shape(b)?;
    for (name, (y, x)) in [("p1", p1), ("p2", p2)] {
        if y >= a.height || x >= a.width {
            return Err(Error::Shape(format!("{name} = ({y}, {x}) is out of bounds")));
        }
    }
    let dot: f64 = (0..a.channels)
        .map(|c| a.get(c, p1.0, p1.1) * b.get(c, p2.0, p2.1))
        .sum();
    Ok(dot / a.channels as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostVolume {
    radius: usize,
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl CostVolume {
    pub fn radius(&self) -> usize {
        self.radius
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, channel: usize, y: usize, x: usize) -> f64 {
        self.data[(channel * self.height + y) * self.width + x]
    }

    /// Channel index of displacement `(dy, dx)`.
    pub fn displacement_channel(radius: usize, dy: isize, dx: isize) -> usize {
        let side = 2 * radius as isize + 1;
        ((dy + radius as isize) * side + (dx + radius as isize)) as usize
    }

    /// Raster-order flattening (channel, row, column).
    pub fn flatten(&self) -> FeatureVector {
        FeatureVector(self.data.clone())
    }
}

pub fn build_cost_volume(a: &FeatureGrid, b: &FeatureGrid, radius: usize) -> Result<CostVolume> {
    a.same_shape(b)?;
    let (c, h, w) = (a.channels, a.height, a.width);
    let side = 2 * radius + 1;
    let plane = h * w;
    let mut data = vec![0.0; side * side * plane];
    let norm = 1.0 / c as f64;
    let r = radius as isize;
    for dy in -r..=r {
        for dx in -r..=r {
            let ch = CostVolume::displacement_channel(radius, dy, dx);
            let out = &mut data[ch * plane..(ch + 1) * plane];
            // rows/cols of p1 whose partner p1 + (dy, dx) is in bounds
            let y0 = (-dy).max(0) as usize;
            let y1 = (h as isize - dy.max(0)).max(0) as usize;
            let x0 = (-dx).max(0) as usize;
            let x1 = (w as isize - dx.max(0)).max(0) as usize;
            for k in 0..c {
                let pa = &a.data[k * plane..(k + 1) * plane];
                let pb = &b.data[k * plane..(k + 1) * plane];
                for y in y0..y1 {
                    let yb = (y as isize + dy) as usize;
                    for x in x0..x1 {
                        let xb = (x as isize + dx) as usize;
                        out[y * w + x] += pa[y * w + x] * pb[yb * w + xb];
                    }
                }
            }
            out.iter_mut().for_each(|v| *v *= norm);
        }
    }
    Ok(CostVolume {
        radius,
        channels: side * side,
        height: h,
        width: w,
        data,
    })
}

/// Stacks a projection-image volume and a BEV volume along the channel axis,
/// projection channels first.
pub fn concat_bev_volume(proj: &CostVolume, bev: &CostVolume) -> Result<CostVolume> {
    if (proj.radius, proj.height, proj.width) != (bev.radius, bev.height, bev.width)
        || proj.channels != bev.channels
    {
        return Err(Error::Shape(format!(
            "cannot concatenate {:?} (d={}) with {:?} (d={})",
            proj.shape(),
            proj.radius,
            bev.shape(),
            bev.radius
        )));
    }
    let mut data = Vec::with_capacity(proj.data.len() + bev.data.len());
    data.extend_from_slice(&proj.data);
    data.extend_from_slice(&bev.data);
    Ok(CostVolume {
        radius: proj.radius,
        channels: proj.channels * 2,
        height: proj.height,
        width: proj.width,
        data,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(v: Vec<f64>) -> Self {
        FeatureVector(v)
    }
}

/// `[f_lc; f_rc; f_rl]`.
pub fn fuse_direct(
    f_lc: &FeatureVector,
    f_rc: &FeatureVector,
    f_rl: &FeatureVector,
) -> Result<FeatureVector> {
    if f_lc.len() != f_rc.len() || f_lc.len() != f_rl.len() {
        return Err(Error::Shape(format!(
            "branch lengths differ: {}, {}, {}",
            f_lc.len(),
            f_rc.len(),
            f_rl.len()
        )));
    }
    let mut out = Vec::with_capacity(3 * f_lc.len());
    out.extend_from_slice(&f_lc.0);
    out.extend_from_slice(&f_rc.0);
    out.extend_from_slice(&f_rl.0);
    Ok(FeatureVector(out))
}

/// Per-branch masks in `[0, 1]`, each as long as the fused vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftMaskParams {
    m_lc: Vec<f64>,
    m_rc: Vec<f64>,
    m_rl: Vec<f64>,
}

impl SoftMaskParams {
    pub fn new(m_lc: Vec<f64>, m_rc: Vec<f64>, m_rl: Vec<f64>) -> Result<Self> {
        if m_lc.len() != m_rc.len() || m_lc.len() != m_rl.len() {
            return Err(Error::Shape("mask lengths differ".into()));
        }
        let in_range = |m: &[f64]| m.iter().all(|v| (0.0..=1.0).contains(v));
        if !(in_range(&m_lc) && in_range(&m_rc) && in_range(&m_rl)) {
            return Err(Error::Config("mask values must lie in [0, 1]".into()));
        }
        Ok(Self { m_lc, m_rc, m_rl })
    }

    pub fn uniform(len: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; len], vec![value; len], vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.m_lc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_lc.is_empty()
    }
}

/// Soft-mask fusion outputs for the three branches.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftFused {
    pub lc: FeatureVector,
    pub rc: FeatureVector,
    pub rl: FeatureVector,
}

pub fn fuse_soft(g: &FeatureVector, masks: &SoftMaskParams) -> Result<SoftFused> {
    if masks.len() != g.len() {
        return Err(Error::Shape(format!(
            "mask length {} does not match fused vector length {}",
            masks.len(),
            g.len()
        )));
    }
    let apply = |m: &[f64]| FeatureVector(m.iter().zip(&g.0).map(|(m, v)| m * v).collect());
    Ok(SoftFused {
        lc: apply(&masks.m_lc),
        rc: apply(&masks.m_rc),
        rl: apply(&masks.m_rl),
    })
}
