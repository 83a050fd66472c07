//! Grayscale image model, PNG ingestion and the photometric operations
//! shared by every other stage.

use std::cmp::Ordering;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use crate::livewire::RegionMask;
use crate::{round_half_up, Error, Result};

/// Physical pixel size in millimetres along x and y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelSpacing {
    pub x_mm: f64,
    pub y_mm: f64,
}

impl PixelSpacing {
    pub fn new(x_mm: f64, y_mm: f64) -> Result<Self> {
        if !(x_mm.is_finite() && y_mm.is_finite() && x_mm > 0.0 && y_mm > 0.0) {
            return Err(Error::validation(format!(
                "pixel spacing must be strictly positive, got [{x_mm}, {y_mm}]"
            )));
        }
        Ok(Self { x_mm, y_mm })
    }

    pub fn isotropic(mm: f64) -> Result<Self> {
        Self::new(mm, mm)
    }

    /// Area of one pixel in mm².
    pub fn pixel_area(&self) -> f64 {
        self.x_mm * self.y_mm
    }
}

/// Metadata sidecar stored next to a slice PNG as `<image>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMeta {
    pub patient_id: String,
    pub slice_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel_spacing_mm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquisition_tag: Option<String>,
}

impl SliceMeta {
    pub fn validate(&self) -> Result<()> {
        if self.patient_id.trim().is_empty() {
            return Err(Error::validation("patient_id must be non-empty"));
        }
        self.spacing().map(|_| ())
    }

    pub fn spacing(&self) -> Result<Option<PixelSpacing>> {
        self.pixel_spacing_mm
            .map(|[x, y]| PixelSpacing::new(x, y))
            .transpose()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let meta: SliceMeta = serde_json::from_str(text)?;
        meta.validate()?;
        Ok(meta)
    }

    /// Sidecar path for an image: `slice.png` → `slice.png.meta.json`.
    pub fn sidecar_path(image_path: &Path) -> std::path::PathBuf {
        let mut name = image_path.as_os_str().to_owned();
        name.push(".meta.json");
        name.into()
    }
}

/// Row-major 8-bit grayscale raster with optional physical pixel spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    levels: Vec<u8>,
    spacing: Option<PixelSpacing>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, levels: Vec<u8>) -> Result<Self> {
        if levels.len() != width * height {
            return Err(Error::validation(format!(
                "expected {} levels for a {width}x{height} image, got {}",
                width * height,
                levels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            spacing: None,
        })
    }

    pub fn filled(width: usize, height: usize, level: u8) -> Self {
        Self {
            width,
            height,
            levels: vec![level; width * height],
            spacing: None,
        }
    }

    pub fn with_spacing(mut self, spacing: Option<PixelSpacing>) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn spacing(&self) -> Option<PixelSpacing> {
        self.spacing
    }

    /// Pixel area in mm², when spacing is known.
    pub fn psize(&self) -> Option<f64> {
        self.spacing.map(|s| s.pixel_area())
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.levels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, level: u8) {
        self.levels[y * self.width + x] = level;
    }

    /// Level at signed coordinates with edge replication.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Copy of the `w`×`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<GrayImage> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::validation(format!(
                "crop [{x0},{y0},{w},{h}] exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let mut levels = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            levels.extend_from_slice(&self.levels[y * self.width + x0..y * self.width + x0 + w]);
        }
        Ok(GrayImage {
            width: w,
            height: h,
            levels,
            spacing: self.spacing,
        })
    }

    pub fn flip_horizontal(&self) -> GrayImage {
        let mut out = self.clone();
        for y in 0..self.height {
            out.levels[y * self.width..(y + 1) * self.width].reverse();
        }
        out
    }
}

/// Decode a PNG and attach the sidecar's pixel spacing.
///
/// RGB(A) inputs are converted with the 0.299/0.587/0.114 luma weights,
/// rounded half-up; alpha is ignored.
pub fn load_image(png_bytes: &[u8], sidecar: Option<&SliceMeta>) -> Result<GrayImage> {
    let spacing = match sidecar {
        Some(meta) => {
            meta.validate()?;
            meta.spacing()?
        }
        None => None,
    };
    let decoded = image::load_from_memory_with_format(png_bytes, ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let levels = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0.map(u32::from);
                // integer form of round-half-up(0.299 R + 0.587 G + 0.114 B)
                ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
            })
            .collect(),
    };
    Ok(GrayImage::new(width, height, levels)?.with_spacing(spacing))
}

/// Encode as an 8-bit grayscale PNG.
pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(img.width as u32, img.height as u32, img.levels.clone())
        .ok_or_else(|| Error::validation("image buffer does not match its dimensions"))?;
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageLuma8(buf)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn adjust_brightness(img: &GrayImage, delta: i32) -> GrayImage {
    let mut out = img.clone();
    for level in &mut out.levels {
        *level = (i32::from(*level) + delta).clamp(0, 255) as u8;
    }
    out
}

/// Block-mean downsampling; partial edge blocks average the pixels they have.
pub fn downsample(img: &GrayImage, factor: usize) -> Result<GrayImage> {
    if factor == 0 {
        return Err(Error::validation("downsample factor must be >= 1"));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let out_w = img.width.div_ceil(factor);
    let out_h = img.height.div_ceil(factor);
    let mut levels = Vec::with_capacity(out_w * out_h);
    for by in 0..out_h {
        for bx in 0..out_w {
            let (mut sum, mut count) = (0u64, 0u64);
            for y in by * factor..((by + 1) * factor).min(img.height) {
                for x in bx * factor..((bx + 1) * factor).min(img.width) {
                    sum += u64::from(img.get(x, y));
                    count += 1;
                }
            }
            // round-half-up of sum / count in integers
            levels.push(((2 * sum + count) / (2 * count)) as u8);
        }
    }
    let spacing = img.spacing.map(|s| PixelSpacing {
        x_mm: s.x_mm * factor as f64,
        y_mm: s.y_mm * factor as f64,
    });
    Ok(GrayImage {
        width: out_w,
        height: out_h,
        levels,
        spacing,
    })
}

/// Livewire interaction runs on a halved image once either side exceeds 400 px.
pub fn livewire_factor(img: &GrayImage) -> usize {
    if img.width.max(img.height) > 400 {
        2
    } else {
        1
    }
}

/// Bilinear resampling to `width`×`height`, pixel-centre aligned.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if img.is_empty() || width == 0 || height == 0 {
        return Err(Error::validation("cannot resample an empty image"));
    }
    if width == img.width && height == img.height {
        return Ok(img.clone());
    }
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    let mut levels = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = ((y as f64 + 0.5) * sy - 0.5).max(0.0);
        let y0 = (fy.floor() as usize).min(img.height - 1);
        let y1 = (y0 + 1).min(img.height - 1);
        let ty = fy - y0 as f64;
        for x in 0..width {
            let fx = ((x as f64 + 0.5) * sx - 0.5).max(0.0);
            let x0 = (fx.floor() as usize).min(img.width - 1);
            let x1 = (x0 + 1).min(img.width - 1);
            let tx = fx - x0 as f64;
            let top = f64::from(img.get(x0, y0)) * (1.0 - tx) + f64::from(img.get(x1, y0)) * tx;
            let bottom = f64::from(img.get(x0, y1)) * (1.0 - tx) + f64::from(img.get(x1, y1)) * tx;
            let v = top * (1.0 - ty) + bottom * ty;
            levels.push(round_half_up(v).clamp(0.0, 255.0) as u8);
        }
    }
    let spacing = img.spacing.map(|s| PixelSpacing {
        x_mm: s.x_mm * sx,
        y_mm: s.y_mm * sy,
    });
    Ok(GrayImage {
        width,
        height,
        levels,
        spacing,
    })
}

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
}

impl Default for Histogram256 {
    fn default() -> Self {
        Self { counts: [0; 256] }
    }
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn add(&mut self, level: u8) {
        self.counts[level as usize] += 1;
    }
}

/// Histogram over the whole image or over the interior of `roi`.
pub fn histogram(img: &GrayImage, roi: Option<&RegionMask>) -> Result<Histogram256> {
    let mut hist = Histogram256::default();
    match roi {
        None => img.levels.iter().for_each(|&l| hist.add(l)),
        Some(mask) => {
            mask.check_within(img.width, img.height)?;
            for &(x, y) in mask.interior() {
                hist.add(img.get(x as usize, y as usize));
            }
        }
    }
    Ok(hist)
}

/// Between-class separation of a split, kept as the exact ratio
/// `(s0·n1 − s1·n0)² / (n0·n1)`, proportional to `w0·w1·(μ0 − μ1)²`.
#[derive(Debug, Clone, Copy)]
struct Separation {
    num: u128,
    den: u128,
}

impl Separation {
    const ZERO: Separation = Separation { num: 0, den: 1 };

    fn cmp(&self, other: &Separation) -> Ordering {
        match (
            self.num.checked_mul(other.den),
            other.num.checked_mul(self.den),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            // only reachable for histograms of more than ~2^18 pixels
            _ => {
                let a = self.num as f64 / self.den as f64;
                let b = other.num as f64 / other.den as f64;
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
        }
    }
}

/// Otsu's threshold: the level `k` maximising the between-class variance of
/// the split `{<= k}` / `{> k}`, smallest `k` on ties.
pub fn otsu_threshold(hist: &Histogram256) -> Result<u8> {
    let total_n = hist.total();
    if total_n == 0 {
        return Err(Error::validation("Otsu threshold of an empty histogram"));
    }
    let total_s: u128 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(l, &c)| l as u128 * c as u128)
        .sum();

    let (mut n0, mut s0) = (0u128, 0u128);
    let mut best = (0u8, Separation::ZERO);
    for (level, &count) in hist.counts.iter().enumerate() {
        n0 += count as u128;
        s0 += level as u128 * count as u128;
        let n1 = total_n as u128 - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_s - s0;
        let d = (s0 * n1).abs_diff(s1 * n0);
        let sep = match d.checked_mul(d) {
            Some(num) => Separation { num, den: n0 * n1 },
            None => {
                // scale both terms down; ordering among neighbours is preserved
                // to f64 precision in this regime
                let df = d as f64;
                Separation {
                    num: (df * df / (n0 * n1) as f64) as u128,
                    den: 1,
                }
            }
        };
        if sep.cmp(&best.1) == Ordering::Greater {
            best = (level as u8, sep);
        }
    }
    Ok(best.0)
}
