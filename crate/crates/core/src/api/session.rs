//! Interactive session state behind the HTTP service.
//!
//! Anchors and previews live in the downsampled livewire frame; everything
//! crossing the API boundary is in full-resolution pixel coordinates.

use base64::Engine as _;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{resolve_center, run_analysis, to_record, AnalysisInput, AnalysisOutcome};
use crate::fragment::DEFAULT_REGIONS;
use crate::livewire::{self, Anchor, CostMap, CostTree, LiveContour, PixelPath, RegionMask};
use crate::quantify::{QuantParams, QuantResult};
use crate::raster::{self, GrayImage, SliceMeta};
use crate::spine::{LinearSvmModel, SpineCenter};
use crate::store::{AnalysisRecord, MuscleLabel, RecordStore, TrainingPhase};
use crate::{Error, Result};

pub struct Session {
    image: GrayImage,
    meta: SliceMeta,
    factor: usize,
    costs: CostMap,
    contour: LiveContour,
    /// Shortest-path tree rooted at the last anchor, reused by previews.
    tree: Option<CostTree>,
    mask: Option<RegionMask>,
    params: QuantParams,
    otsu: u8,
    brightness: i32,
    label: Option<MuscleLabel>,
    center: Option<SpineCenter>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionInfo {
    pub width: usize,
    pub height: usize,
    pub downsample_factor: usize,
    pub otsu_threshold: u8,
    pub threshold: u8,
    pub softness: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskStats {
    pub n_pixels: usize,
    pub degenerate: bool,
    /// Whole-image Otsu level, the default threshold.
    pub otsu_threshold: u8,
    /// Otsu level over the mask interior only.
    pub roi_otsu_threshold: Option<u8>,
    pub contour: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ParamsPatch {
    pub threshold: Option<u8>,
    pub softness: Option<f64>,
    pub brightness: Option<i32>,
    pub label: Option<MuscleLabel>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsState {
    pub threshold: u8,
    pub softness: f64,
    pub brightness: i32,
    pub label: Option<MuscleLabel>,
}

#[derive(Debug, Clone)]
pub struct SegmentOutcome {
    pub center: SpineCenter,
    pub fragments: crate::fragment::FragmentResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportOutcome {
    pub record_id: String,
    pub csv_row: String,
}

fn path_json(path: &PixelPath, factor: usize) -> Vec<[i64; 2]> {
    path.points
        .iter()
        .map(|&(x, y)| [(x * factor) as i64, (y * factor) as i64])
        .collect()
}

impl Session {
    pub fn open(png: &[u8], meta: SliceMeta) -> Result<Self> {
        let image = raster::load_image(png, Some(&meta))?;
        Self::from_image(image, meta)
    }

    pub fn from_image(image: GrayImage, meta: SliceMeta) -> Result<Self> {
        meta.validate()?;
        if image.is_empty() {
            return Err(Error::validation("empty image"));
        }
        let factor = raster::livewire_factor(&image);
        let costs = livewire::edge_cost_map(&raster::downsample(&image, factor)?)?;
        let otsu = raster::otsu_threshold(&raster::histogram(&image, None)?)?;
        Ok(Self {
            image,
            meta,
            factor,
            costs,
            contour: LiveContour::default(),
            tree: None,
            mask: None,
            params: QuantParams::with_default_softness(otsu),
            otsu,
            brightness: 0,
            label: None,
            center: None,
        })
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            width: self.image.width(),
            height: self.image.height(),
            downsample_factor: self.factor,
            otsu_threshold: self.otsu,
            threshold: self.params.threshold(),
            softness: self.params.softness(),
        }
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub fn mask(&self) -> Option<&RegionMask> {
        self.mask.as_ref()
    }

    pub fn params(&self) -> QuantParams {
        self.params
    }

    fn to_grid(&self, x: i64, y: i64) -> Result<Anchor> {
        if !self.image.contains(x, y) {
            return Err(Error::validation(format!(
                "point ({x}, {y}) outside {}x{} image",
                self.image.width(),
                self.image.height()
            )));
        }
        Ok(Anchor::new(x as usize / self.factor, y as usize / self.factor))
    }

    /// Commit an anchor; returns the full committed path. An anchor placed
    /// after closing starts a fresh contour.
    pub fn add_anchor(&mut self, x: i64, y: i64) -> Result<Vec<[i64; 2]>> {
        let anchor = self.to_grid(x, y)?;
        if self.mask.is_some() {
            self.mask = None;
            self.center = None;
            self.contour = LiveContour::default();
        }
        self.contour.push(&self.costs, anchor)?;
        self.tree = Some(CostTree::build(&self.costs, anchor)?);
        Ok(path_json(self.contour.path(), self.factor))
    }

    pub fn anchor_count(&self) -> usize {
        self.contour.anchors().len()
    }

    /// Path from the last anchor to the cursor.
    pub fn preview(&self, x: i64, y: i64) -> Result<Vec<[i64; 2]>> {
        let target = self.to_grid(x, y)?;
        let tree = self
            .tree
            .as_ref()
            .ok_or_else(|| Error::Workflow("place an anchor before previewing".into()))?;
        Ok(path_json(&tree.path_to(target)?, self.factor))
    }

    pub fn close(&mut self) -> Result<MaskStats> {
        if self.mask.is_some() {
            return Err(Error::Workflow("contour is already closed".into()));
        }
        if self.contour.anchors().len() < 3 {
            return Err(Error::Workflow(format!(
                "closing needs 3 anchors, have {}",
                self.contour.anchors().len()
            )));
        }
        let mask = livewire::close_and_rasterize(&self.contour, &self.costs, self.factor)?;
        let roi_otsu = if mask.pixel_count() > 0 {
            Some(raster::otsu_threshold(&raster::histogram(&self.image, Some(&mask))?)?)
        } else {
            None
        };
        let stats = MaskStats {
            n_pixels: mask.pixel_count(),
            degenerate: mask.is_degenerate(),
            otsu_threshold: self.otsu,
            roi_otsu_threshold: roi_otsu,
            contour: mask.contour().iter().map(|&(x, y)| [x, y]).collect(),
        };
        self.tree = None;
        self.mask = Some(mask);
        Ok(stats)
    }

    /// Install a mask directly, bypassing the livewire (e.g. a stored contour).
    pub fn set_mask(&mut self, mask: RegionMask) -> Result<()> {
        mask.check_within(self.image.width(), self.image.height())?;
        self.mask = Some(mask);
        self.tree = None;
        Ok(())
    }

    /// Update parameters atomically: nothing changes if any field is invalid.
    pub fn patch_params(&mut self, patch: &ParamsPatch) -> Result<ParamsState> {
        let params = QuantParams::new(
            patch.threshold.unwrap_or(self.params.threshold()),
            patch.softness.unwrap_or(self.params.softness()),
        )?;
        if let Some(b) = patch.brightness {
            if !(-255..=255).contains(&b) {
                return Err(Error::validation(format!("brightness {b} outside [-255, 255]")));
            }
            self.brightness = b;
        }
        self.params = params;
        if patch.label.is_some() {
            self.label = patch.label;
        }
        Ok(self.params_state())
    }

    pub fn params_state(&self) -> ParamsState {
        ParamsState {
            threshold: self.params.threshold(),
            softness: self.params.softness(),
            brightness: self.brightness,
            label: self.label,
        }
    }

    /// View-only rendering with the current brightness, as base64 PNG.
    pub fn rendering_base64(&self) -> Result<String> {
        let shown = raster::adjust_brightness(&self.image, self.brightness);
        Ok(base64::engine::general_purpose::STANDARD.encode(raster::encode_png(&shown)?))
    }

    fn closed_mask(&self) -> Result<&RegionMask> {
        let mask = self
            .mask
            .as_ref()
            .ok_or_else(|| Error::Workflow("close the contour first".into()))?;
        if mask.pixel_count() == 0 {
            return Err(Error::Workflow("the closed contour encloses no pixels".into()));
        }
        Ok(mask)
    }

    fn input<'a>(
        &'a self,
        mask: &'a RegionMask,
        label: MuscleLabel,
        phase: TrainingPhase,
        regions: Option<usize>,
        model: Option<&'a LinearSvmModel>,
    ) -> AnalysisInput<'a> {
        AnalysisInput {
            image: &self.image,
            meta: &self.meta,
            mask,
            params: self.params,
            label,
            phase,
            regions,
            center: self.center,
            model,
        }
    }

    pub fn compute(&self) -> Result<QuantResult> {
        let mask = self.closed_mask()?;
        crate::quantify::quantify(&self.image, mask, &self.params, None)
    }

    /// Locate the spine (unless `manual` is given) and fragment the mask.
    pub fn segment(
        &mut self,
        label: Option<MuscleLabel>,
        manual: Option<SpineCenter>,
        model: Option<&LinearSvmModel>,
    ) -> Result<SegmentOutcome> {
        if label.is_some() {
            self.label = label;
        }
        let label = self
            .label
            .ok_or_else(|| Error::validation("set a muscle label before segmenting"))?;
        let mask = self.closed_mask()?;
        super::check_regions(label, Some(DEFAULT_REGIONS))?;
        let center = resolve_center(&self.image, manual, model)?;
        let fragments = crate::fragment::fragment(&self.image, mask, &center, &self.params, DEFAULT_REGIONS)?;
        self.center = Some(center);
        Ok(SegmentOutcome { center, fragments })
    }

    /// Outcome for the current state; fragments are included once the
    /// session has been segmented.
    pub fn analysis<'a>(
        &'a self,
        label: MuscleLabel,
        phase: TrainingPhase,
        model: Option<&'a LinearSvmModel>,
    ) -> Result<(AnalysisOutcome, AnalysisInput<'a>)> {
        let mask = self.closed_mask()?;
        let regions = (self.center.is_some() && label.is_erector_spinae()).then_some(DEFAULT_REGIONS);
        let input = self.input(mask, label, phase, regions, model);
        Ok((run_analysis(&input)?, input))
    }

    pub fn record(
        &mut self,
        label: Option<MuscleLabel>,
        phase: TrainingPhase,
        timestamp: DateTime<Utc>,
    ) -> Result<AnalysisRecord> {
        if label.is_some() {
            self.label = label;
        }
        let label = self
            .label
            .ok_or_else(|| Error::validation("set a muscle label before exporting"))?;
        let (outcome, input) = self.analysis(label, phase, None)?;
        to_record(&input, &outcome, timestamp)
    }

    pub fn export(
        &mut self,
        store: &mut RecordStore,
        label: Option<MuscleLabel>,
        phase: TrainingPhase,
    ) -> Result<ExportOutcome> {
        let record = self.record(label, phase, Utc::now())?;
        let record_id = store.append(&record)?;
        Ok(ExportOutcome {
            record_id,
            csv_row: record.to_csv_row(),
        })
    }
}

