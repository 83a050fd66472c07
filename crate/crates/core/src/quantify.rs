//! Sigmoid fat membership and the area measures derived from it.

use serde::{Deserialize, Serialize};

use crate::livewire::RegionMask;
use crate::raster::GrayImage;
use crate::{round_to, Error, Result};

pub const DEFAULT_SOFTNESS: f64 = 0.2;
pub const MAX_SOFTNESS: f64 = 0.5;

/// Threshold (logistic centre) and softness of the fat detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    threshold: u8,
    softness: f64,
}

impl QuantParams {
    pub fn new(threshold: u8, softness: f64) -> Result<Self> {
        if !(0.0..=MAX_SOFTNESS).contains(&softness) {
            return Err(Error::validation(format!(
                "softness must lie in [0, {MAX_SOFTNESS}], got {softness}"
            )));
        }
        Ok(Self {
            threshold,
            softness,
        })
    }

    pub fn with_default_softness(threshold: u8) -> Self {
        Self {
            threshold,
            softness: DEFAULT_SOFTNESS,
        }
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }

    pub fn softness(&self) -> f64 {
        self.softness
    }

    /// Logistic slope for the current softness: `1 / (50σ + 0.02)`.
    ///
    /// σ = 0 gives a = 50, a transition narrower than one level;
    /// σ = 0.5 gives a ≈ 0.04, roughly a hundred levels wide.
    pub fn slope(&self) -> f64 {
        1.0 / (self.softness * 50.0 + 0.02)
    }

    /// Fat membership of one intensity level. At zero softness this is the
    /// hard rule `level > threshold`.
    pub fn membership(&self, level: u8) -> f64 {
        if self.softness == 0.0 {
            if level > self.threshold {
                1.0
            } else {
                0.0
            }
        } else {
            sigmoid(f64::from(level), self)
        }
    }
}

/// `1 / (1 + e^{-a(x - c)})`.
pub fn logistic(x: f64, slope: f64, centre: f64) -> f64 {
    1.0 / (1.0 + (-slope * (x - centre)).exp())
}

pub fn sigmoid(x: f64, params: &QuantParams) -> f64 {
    logistic(x, params.slope(), f64::from(params.threshold))
}

/// Fat membership of every interior pixel, in the mask's interior order.
#[derive(Debug, Clone, PartialEq)]
pub struct FatField {
    memberships: Vec<f64>,
}

impl FatField {
    pub fn from_memberships(memberships: Vec<f64>) -> Result<Self> {
        if memberships.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::validation("memberships must lie in [0, 1]"));
        }
        Ok(Self { memberships })
    }

    pub fn memberships(&self) -> &[f64] {
        &self.memberships
    }

    pub fn pixel_count(&self) -> usize {
        self.memberships.len()
    }

    /// Σ p_fat: the soft count of fat pixels.
    pub fn fat_pixel_sum(&self) -> f64 {
        self.memberships.iter().sum()
    }
}

pub fn fat_field(img: &GrayImage, mask: &RegionMask, params: &QuantParams) -> Result<FatField> {
    if mask.pixel_count() == 0 {
        return Err(Error::validation("cannot quantify an empty mask"));
    }
    mask.check_within(img.width(), img.height())?;
    // one sigmoid evaluation per level instead of per pixel
    let lut: Vec<f64> = (0..=255u8).map(|l| params.membership(l)).collect();
    let memberships = mask
        .interior()
        .iter()
        .map(|&(x, y)| lut[img.get(x as usize, y as usize) as usize])
        .collect();
    Ok(FatField { memberships })
}

/// Total fat content: `100 · Σ p_fat / N`. Zero for an empty field.
pub fn fat_percent(field: &FatField) -> f64 {
    if field.pixel_count() == 0 {
        return 0.0;
    }
    100.0 * field.fat_pixel_sum() / field.pixel_count() as f64
}

/// TCSA and FCSA in mm²: `N · psize` and `(N − Σ p_fat) · psize`.
pub fn areas(field: &FatField, psize: Option<f64>) -> Result<(f64, f64)> {
    let psize = psize.ok_or(Error::MissingPixelSpacing)?;
    if !(psize.is_finite() && psize > 0.0) {
        return Err(Error::validation(format!("psize must be positive, got {psize}")));
    }
    let n = field.pixel_count() as f64;
    let fat = field.fat_pixel_sum();
    Ok((n * psize, (n - fat) * psize))
}

/// Outcome of one quantification, with exact (unrounded) values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantResult {
    pub fat_percent: f64,
    pub tcsa_mm2: f64,
    pub fcsa_mm2: f64,
    pub n_pixels: usize,
    #[serde(skip)]
    pub fat_pixel_sum: f64,
    pub threshold: u8,
    pub softness: f64,
}

impl QuantResult {
    /// Fat % to one decimal, as exported.
    pub fn fat_percent_rounded(&self) -> f64 {
        round_to(self.fat_percent, 1)
    }

    pub fn tcsa_rounded(&self) -> i64 {
        self.tcsa_mm2.round() as i64
    }

    pub fn fcsa_rounded(&self) -> i64 {
        self.fcsa_mm2.round() as i64
    }
}

/// Full quantification. `psize` overrides the image's own spacing.
pub fn quantify(
    img: &GrayImage,
    mask: &RegionMask,
    params: &QuantParams,
    psize: Option<f64>,
) -> Result<QuantResult> {
    let field = fat_field(img, mask, params)?;
    let (tcsa_mm2, fcsa_mm2) = areas(&field, psize.or_else(|| img.psize()))?;
    Ok(QuantResult {
        fat_percent: fat_percent(&field),
        tcsa_mm2,
        fcsa_mm2,
        n_pixels: field.pixel_count(),
        fat_pixel_sum: field.fat_pixel_sum(),
        threshold: params.threshold,
        softness: params.softness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub softness: f64,
    pub fat_percent: f64,
    pub fcsa_mm2: f64,
}

/// Fat % and FCSA for σ = 0, 0.1, …, 0.5 at a fixed threshold.
pub fn sensitivity_report(
    img: &GrayImage,
    mask: &RegionMask,
    threshold: u8,
    psize: Option<f64>,
) -> Result<Vec<SensitivityRow>> {
    (0..=5)
        .map(|step| {
            let params = QuantParams::new(threshold, f64::from(step) / 10.0)?;
            let r = quantify(img, mask, &params, psize)?;
            Ok(SensitivityRow {
                softness: params.softness,
                fat_percent: r.fat_percent,
                fcsa_mm2: r.fcsa_mm2,
            })
        })
        .collect()
}
