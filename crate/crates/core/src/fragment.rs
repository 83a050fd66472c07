//! Region-wise fat of an erector spinae mask relative to the spinal column.
//!
//! The mask is turned about the column centre until the line from the centre
//! to the mask centroid is horizontal, then cut into equal-width strips
//! along that axis. Only coordinates rotate; every pixel keeps its level, so
//! strip sums add up exactly to the whole-mask sum.

use serde::{Deserialize, Serialize};

use crate::livewire::RegionMask;
use crate::quantify::QuantParams;
use crate::raster::GrayImage;
use crate::spine::SpineCenter;
use crate::{Error, Result};

pub const DEFAULT_REGIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Angle in degrees between the centre→centroid vector and the horizontal,
/// and the side it implies (right iff θ < 90°).
pub fn side_and_angle(mask: &RegionMask, center: &SpineCenter) -> Result<(f64, Side)> {
    let (mx, my) = mask
        .centroid()
        .ok_or_else(|| Error::validation("cannot fragment an empty mask"))?;
    angle_of(mx - center.x, my - center.y)
}

fn angle_of(vx: f64, vy: f64) -> Result<(f64, Side)> {
    let len = vx.hypot(vy);
    if len == 0.0 {
        return Err(Error::DegenerateGeometry(
            "mask centroid coincides with the spine centre".into(),
        ));
    }
    let theta = (vx / len).clamp(-1.0, 1.0).acos().to_degrees();
    let side = if theta < 90.0 { Side::Right } else { Side::Left };
    Ok((theta, side))
}

/// Interior and contour coordinates after rotation about the spine centre.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedMask {
    pub side: Side,
    pub theta_deg: f64,
    /// Rotated interior coordinates, aligned with the mask's interior order.
    pub interior: Vec<(f64, f64)>,
    pub contour: Vec<(f64, f64)>,
}

/// Rotation of the right side counter-clockwise by θ, the left side
/// clockwise by 180° − θ, as seen on screen (y axis pointing down).
pub fn rotate_mask(mask: &RegionMask, center: &SpineCenter, theta_deg: f64, side: Side) -> RotatedMask {
    // a screen-CCW turn by φ in y-down coordinates is a math-CW turn by φ
    let phi = match side {
        Side::Right => -theta_deg.to_radians(),
        Side::Left => (180.0 - theta_deg).to_radians(),
    };
    let (s, c) = phi.sin_cos();
    let turn = |x: f64, y: f64| {
        let (dx, dy) = (x - center.x, y - center.y);
        (center.x + dx * c - dy * s, center.y + dx * s + dy * c)
    };
    RotatedMask {
        side,
        theta_deg,
        interior: mask
            .interior()
            .iter()
            .map(|&(x, y)| turn(f64::from(x), f64::from(y)))
            .collect(),
        contour: mask
            .contour()
            .iter()
            .map(|&(x, y)| turn(x as f64, y as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFat {
    pub label: String,
    pub pixel_count: usize,
    pub fat_pixel_sum: f64,
    /// Region fat as a share of the whole mask: `100 · Σ_region p_fat / N`.
    pub fat_percent_of_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentResult {
    pub regions: Vec<RegionFat>,
    pub theta_deg: f64,
    pub side: Side,
    /// `(min, max)` of the rotated contour along the radial axis.
    pub rotated_bounds: (f64, f64),
    pub total_fat_percent: f64,
}

impl FragmentResult {
    pub fn region_percents(&self) -> Vec<f64> {
        self.regions.iter().map(|r| r.fat_percent_of_total).collect()
    }

    /// Wire form: side, angle, `{label, fat_percent}` per region and the total.
    /// R1 is the strip nearest the spinal column.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "side": self.side,
            "theta_deg": self.theta_deg,
            "regions": self.regions.iter().map(|r| serde_json::json!({
                "label": r.label,
                "fat_percent": r.fat_percent_of_total,
            })).collect::<Vec<_>>(),
            "total_fat_percent": self.total_fat_percent,
            "r1_position": "nearest_spine",
        })
    }
}

/// Cut the rotated mask into `count` strips of width L/count along the
/// radial axis and sum fat memberships per strip. R1 is nearest the spine;
/// the last strip is closed at the far end.
pub fn subdivide(
    rotated: &RotatedMask,
    img: &GrayImage,
    mask: &RegionMask,
    params: &QuantParams,
    count: usize,
) -> Result<FragmentResult> {
    if count == 0 {
        return Err(Error::validation("region count must be >= 1"));
    }
    if rotated.interior.is_empty() || rotated.interior.len() != mask.pixel_count() {
        return Err(Error::validation("rotated mask does not match the region mask"));
    }
    mask.check_within(img.width(), img.height())?;
    // left-side masks extend towards −x after rotation; mirror so the
    // radial axis always points away from the spine
    let radial = |x: f64| match rotated.side {
        Side::Right => x,
        Side::Left => -x,
    };
    let along: Vec<f64> = if rotated.contour.is_empty() {
        rotated.interior.iter().map(|p| radial(p.0)).collect()
    } else {
        rotated.contour.iter().map(|p| radial(p.0)).collect()
    };
    let min = along.iter().copied().fold(f64::INFINITY, f64::min);
    let max = along.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let length = max - min;
    if length <= 0.0 || !length.is_finite() {
        return Err(Error::DegenerateGeometry("mask has zero radial length".into()));
    }

    let mut counts = vec![0usize; count];
    let mut sums = vec![0.0; count];
    let lut: Vec<f64> = (0..=255u8).map(|l| params.membership(l)).collect();
    // cut planes at min + kL/count; a pixel on a plane starts the next strip
    let cuts: Vec<f64> = (1..count).map(|k| min + k as f64 * length / count as f64).collect();
    for (&(px, py), &(rx, _)) in mask.interior().iter().zip(&rotated.interior) {
        let r = radial(rx);
        let k = cuts.partition_point(|&c| c <= r);
        counts[k] += 1;
        sums[k] += lut[img.get(px as usize, py as usize) as usize];
    }
    let n = mask.pixel_count() as f64;
    let regions = (0..count)
        .map(|k| RegionFat {
            label: format!("R{}", k + 1),
            pixel_count: counts[k],
            fat_pixel_sum: sums[k],
            fat_percent_of_total: 100.0 * sums[k] / n,
        })
        .collect();
    let total: f64 = lut_total(&lut, img, mask);
    Ok(FragmentResult {
        regions,
        theta_deg: rotated.theta_deg,
        side: rotated.side,
        rotated_bounds: (min, max),
        total_fat_percent: 100.0 * total / n,
    })
}

fn lut_total(lut: &[f64], img: &GrayImage, mask: &RegionMask) -> f64 {
    mask.interior()
        .iter()
        .map(|&(x, y)| lut[img.get(x as usize, y as usize) as usize])
        .sum()
}

/// Angle, rotation and subdivision in one call.
pub fn fragment(
    img: &GrayImage,
    mask: &RegionMask,
    center: &SpineCenter,
    params: &QuantParams,
    count: usize,
) -> Result<FragmentResult> {
    let (theta, side) = side_and_angle(mask, center)?;
    let rotated = rotate_mask(mask, center, theta, side);
    subdivide(&rotated, img, mask, params, count)
}
