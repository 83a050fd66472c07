//! Batch and interactive front ends.
//!
//! Both the `analyze` command and the HTTP session service funnel into
//! [`run_analysis`], so the same inputs yield the same exported row through
//! either surface.

pub mod cli;
pub mod http;
pub mod session;

use chrono::{DateTime, Utc};

use crate::fragment::{self, FragmentResult, DEFAULT_REGIONS};
use crate::livewire::RegionMask;
use crate::quantify::{self, QuantParams, QuantResult};
use crate::raster::{GrayImage, SliceMeta};
use crate::spine::{self, LinearSvmModel, SpineCenter};
use crate::store::{AnalysisRecord, MuscleLabel, TrainingPhase};
use crate::{Error, Result};

/// Everything one analysis needs.
#[derive(Debug, Clone)]
pub struct AnalysisInput<'a> {
    pub image: &'a GrayImage,
    pub meta: &'a SliceMeta,
    pub mask: &'a RegionMask,
    pub params: QuantParams,
    pub label: MuscleLabel,
    pub phase: TrainingPhase,
    /// Number of strips to fragment into; `None` skips fragmentation.
    pub regions: Option<usize>,
    /// Manual spine centre; wins over detection.
    pub center: Option<SpineCenter>,
    pub model: Option<&'a LinearSvmModel>,
}

#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub quant: QuantResult,
    pub fragments: Option<FragmentResult>,
    pub spine_center: Option<SpineCenter>,
}

/// Cord detection first, classifier fallback; a manual centre always wins.
pub fn resolve_center(
    image: &GrayImage,
    manual: Option<SpineCenter>,
    model: Option<&LinearSvmModel>,
) -> Result<SpineCenter> {
    match manual {
        Some(c) => {
            if !(c.x.is_finite() && c.y.is_finite() && image.contains(c.x.round() as i64, c.y.round() as i64)) {
                return Err(Error::validation(format!(
                    "manual centre ({}, {}) lies outside the image",
                    c.x, c.y
                )));
            }
            Ok(SpineCenter::manual(c.x, c.y))
        }
        None => spine::detect_spine_center(image, model),
    }
}

pub fn check_regions(label: MuscleLabel, regions: Option<usize>) -> Result<()> {
    match regions {
        None => Ok(()),
        Some(_) if !label.is_erector_spinae() => Err(Error::validation(format!(
            "fragmentation applies to erector spinae only, not {label}"
        ))),
        Some(DEFAULT_REGIONS) => Ok(()),
        Some(k) => Err(Error::validation(format!(
            "records hold {DEFAULT_REGIONS} regions, {k} requested"
        ))),
    }
}

pub fn run_analysis(input: &AnalysisInput<'_>) -> Result<AnalysisOutcome> {
    check_regions(input.label, input.regions)?;
    if input.mask.pixel_count() == 0 {
        return Err(Error::validation("the mask encloses no pixels"));
    }
    let quant = quantify::quantify(input.image, input.mask, &input.params, None)?;
    let (fragments, spine_center) = match input.regions {
        None => (None, None),
        Some(k) => {
            let center = resolve_center(input.image, input.center, input.model)?;
            let f = fragment::fragment(input.image, input.mask, &center, &input.params, k)?;
            (Some(f), Some(center))
        }
    };
    Ok(AnalysisOutcome {
        quant,
        fragments,
        spine_center,
    })
}

pub fn to_record(
    input: &AnalysisInput<'_>,
    outcome: &AnalysisOutcome,
    timestamp: DateTime<Utc>,
) -> Result<AnalysisRecord> {
    AnalysisRecord::from_results(
        &input.meta.patient_id,
        &input.meta.slice_label,
        input.label,
        input.phase,
        timestamp,
        &outcome.quant,
        outcome.fragments.as_ref(),
        input.mask.contour(),
    )
}

/// `{"error": code, "message": text}`.
pub fn error_body(err: &Error) -> serde_json::Value {
    serde_json::json!({ "error": err.code(), "message": err.to_string() })
}
