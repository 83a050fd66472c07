//! Spinal-column centre localisation.
//!
//! Two detectors are provided. [`locate_by_cord`] finds the spinal cord as
//! the largest bright blob in a central crop and offsets its centroid
//! anteriorly. [`locate_by_classifier`] slides a 50×50 window over the middle
//! of the slice and scores each patch's HOG descriptor with a linear SVM.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::raster::{self, GrayImage};
use crate::{Error, Result};

/// Side of the square frame the detectors are calibrated for.
pub const NORMALIZED_SIZE: usize = 512;
/// Cord-to-column offset in the normalized frame, in pixels.
pub const CORD_OFFSET_PX: f64 = 55.0;
/// Offset added to Otsu's level before cord binarization (0.2 on the unit scale).
pub const CORD_THRESHOLD_OFFSET: u8 = 51;

pub const PATCH_SIZE: usize = 50;
pub const CELL_SIZE: usize = 2;
pub const ORIENTATION_BINS: usize = 9;
pub const CELLS_PER_SIDE: usize = PATCH_SIZE / CELL_SIZE;
pub const HOG_LEN: usize = CELLS_PER_SIDE * CELLS_PER_SIDE * ORIENTATION_BINS;
pub const HOG_DESCRIPTOR_TAG: &str = "hog-2x2-9bin-1x1block";
pub const WINDOW_STRIDE: usize = 5;

const HOG_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    Manual,
    CordRef,
    Classifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineCenter {
    pub x: f64,
    pub y: f64,
    pub method: DetectionMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl SpineCenter {
    pub fn manual(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            method: DetectionMethod::Manual,
            score: None,
        }
    }
}

/// Pixels of one 8-connected component.
pub type Component = Vec<(usize, usize)>;

/// 8-connected components of the pixels where `on` is true, in raster
/// order of their first pixel.
pub fn connected_components(on: &[bool], width: usize, height: usize) -> Vec<Component> {
    let mut seen = vec![false; on.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..on.len() {
        if !on[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % width, i / width);
            comp.push((x, y));
            for ny in y.saturating_sub(1)..=(y + 1).min(height - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(width - 1) {
                    let j = ny * width + nx;
                    if on[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Bounds `(x0, y0, x1, y1)` (exclusive end) of the crop searched for the cord:
/// the central 40 % of the width and 35–75 % of the height.
pub fn cord_search_patch(width: usize, height: usize) -> (usize, usize, usize, usize) {
    let x0 = (width as f64 * 0.3).floor() as usize;
    let x1 = (width as f64 * 0.7).ceil() as usize;
    let y0 = (height as f64 * 0.35).floor() as usize;
    let y1 = (height as f64 * 0.75).ceil() as usize;
    (x0, y0, x1.min(width), y1.min(height))
}

/// Column centre from the spinal-cord centroid.
///
/// The cord is the largest 8-connected component brighter than the global
/// Otsu level + 51 inside the central crop; the column centre lies 55 px
/// (scaled by `height / 512`) above its centroid.
pub fn locate_by_cord(img: &GrayImage) -> Result<SpineCenter> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::validation("image too small for cord detection"));
    }
    let otsu = raster::otsu_threshold(&raster::histogram(img, None)?)?;
    let cut = otsu.saturating_add(CORD_THRESHOLD_OFFSET);
    let (x0, y0, x1, y1) = cord_search_patch(img.width(), img.height());
    let (pw, ph) = (x1 - x0, y1 - y0);
    let mut on = vec![false; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            on[y * pw + x] = img.get(x0 + x, y0 + y) > cut;
        }
    }
    let cord = connected_components(&on, pw, ph)
        .into_iter()
        .reduce(|best, c| if c.len() > best.len() { c } else { best })
        .ok_or_else(|| Error::DetectionFailed {
            reason: format!("no pixel above level {cut} in the central patch"),
            best_score: None,
        })?;
    let n = cord.len() as f64;
    let cx = cord.iter().map(|p| p.0 as f64).sum::<f64>() / n + x0 as f64;
    let cy = cord.iter().map(|p| p.1 as f64).sum::<f64>() / n + y0 as f64;
    let offset = CORD_OFFSET_PX * img.height() as f64 / NORMALIZED_SIZE as f64;
    Ok(SpineCenter {
        x: cx,
        y: (cy - offset).max(0.0),
        method: DetectionMethod::CordRef,
        score: None,
    })
}

/// HOG descriptor of a 50×50 patch: 25×25 cells of 9 unsigned orientation
/// bins, each cell L2-normalised on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct HogDescriptor(Vec<f64>);

impl HogDescriptor {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn extract_hog(patch: &GrayImage) -> Result<HogDescriptor> {
    if patch.width() != PATCH_SIZE || patch.height() != PATCH_SIZE {
        return Err(Error::validation(format!(
            "HOG expects a {PATCH_SIZE}x{PATCH_SIZE} patch, got {}x{}",
            patch.width(),
            patch.height()
        )));
    }
    Ok(hog_at(patch, 0, 0))
}

/// HOG of the 50×50 window at `(x0, y0)`, with edge replication at the
/// window border.
fn hog_at(img: &GrayImage, x0: usize, y0: usize) -> HogDescriptor {
    let mut hist = vec![0.0; HOG_LEN];
    let last = PATCH_SIZE as isize - 1;
    let at = |x: isize, y: isize| {
        f64::from(img.get(x0 + x.clamp(0, last) as usize, y0 + y.clamp(0, last) as usize))
    };
    for y in 0..PATCH_SIZE as isize {
        for x in 0..PATCH_SIZE as isize {
            let gx = at(x + 1, y) - at(x - 1, y);
            let gy = at(x, y + 1) - at(x, y - 1);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            if angle >= 180.0 {
                angle -= 180.0;
            }
            // bin k is centred on 20k + 10 degrees; votes wrap around 180
            let pos = angle / 20.0 - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo_bin = (lo as isize).rem_euclid(ORIENTATION_BINS as isize) as usize;
            let hi_bin = (lo_bin + 1) % ORIENTATION_BINS;
            let cell = (y as usize / CELL_SIZE) * CELLS_PER_SIDE + x as usize / CELL_SIZE;
            hist[cell * ORIENTATION_BINS + lo_bin] += mag * (1.0 - frac);
            hist[cell * ORIENTATION_BINS + hi_bin] += mag * frac;
        }
    }
    for block in hist.chunks_exact_mut(ORIENTATION_BINS) {
        let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > HOG_EPS {
            block.iter_mut().for_each(|v| *v /= norm);
        } else {
            block.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    HogDescriptor(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchLabel {
    Positive,
    Negative,
}

impl PatchLabel {
    fn sign(self) -> f64 {
        match self {
            PatchLabel::Positive => 1.0,
            PatchLabel::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSample {
    patch: GrayImage,
    label: PatchLabel,
}

impl PatchSample {
    pub fn new(patch: GrayImage, label: PatchLabel) -> Result<Self> {
        if patch.width() != PATCH_SIZE || patch.height() != PATCH_SIZE {
            return Err(Error::validation(format!(
                "training patches must be {PATCH_SIZE}x{PATCH_SIZE}"
            )));
        }
        Ok(Self { patch, label })
    }

    pub fn patch(&self) -> &GrayImage {
        &self.patch
    }

    pub fn label(&self) -> PatchLabel {
        self.label
    }
}

/// Appends a left–right mirrored copy of every positive sample.
pub fn augment_with_flips(samples: &[PatchSample]) -> Vec<PatchSample> {
    let mut out = samples.to_vec();
    out.extend(
        samples
            .iter()
            .filter(|s| s.label == PatchLabel::Positive)
            .map(|s| PatchSample {
                patch: s.patch.flip_horizontal(),
                label: PatchLabel::Positive,
            }),
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Regularisation constant the model was trained with.
    pub c: f64,
    pub descriptor: String,
    #[serde(default)]
    pub iterations: usize,
}

impl LinearSvmModel {
    /// Signed decision value `w·h + b`.
    pub fn decision(&self, h: &[f64]) -> f64 {
        self.weights.iter().zip(h).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn predict(&self, h: &[f64]) -> PatchLabel {
        if self.decision(h) > 0.0 {
            PatchLabel::Positive
        } else {
            PatchLabel::Negative
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.descriptor == HOG_DESCRIPTOR_TAG && self.weights.len() != HOG_LEN {
            return Err(Error::validation(format!(
                "{HOG_DESCRIPTOR_TAG} model needs {HOG_LEN} weights, has {}",
                self.weights.len()
            )));
        }
        if self.weights.iter().chain([&self.bias]).any(|v| !v.is_finite()) {
            return Err(Error::validation("model weights must be finite"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite model serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Soft-margin linear SVM trained by dual coordinate descent.
///
/// Minimises `½(‖w‖² + b²) + C Σ max(0, 1 − yᵢ(w·xᵢ + b))`; the bias is
/// learned as the weight of a constant feature. Training stops once the
/// relative duality gap of the best primal iterate drops below `tolerance`
/// or after `max_epochs` passes.
#[derive(Debug, Clone)]
pub struct SvmTrainer {
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmTrainer {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-4,
            max_epochs: 100_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Primal objective of the retained iterate after each epoch.
    pub objective_history: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
}

impl SvmTrainer {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn train(
        &self,
        features: &[Vec<f64>],
        labels: &[PatchLabel],
        descriptor: &str,
    ) -> Result<(LinearSvmModel, TrainReport)> {
        if features.len() != labels.len() {
            return Err(Error::validation("features and labels differ in length"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::validation("C must be positive"));
        }
        let has = |l| labels.contains(&l);
        if !has(PatchLabel::Positive) || !has(PatchLabel::Negative) {
            return Err(Error::validation("training needs both positive and negative samples"));
        }
        let dim = features[0].len();
        if features.iter().any(|f| f.len() != dim) {
            return Err(Error::validation("all feature vectors must share one length"));
        }

        let n = features.len();
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        // last weight is the bias, fed by a constant feature of 1
        let mut w = vec![0.0; dim + 1];
        let mut alpha = vec![0.0; n];
        let q_diag: Vec<f64> = features
            .iter()
            .map(|f| f.iter().map(|v| v * v).sum::<f64>() + 1.0)
            .collect();
        let dot = |w: &[f64], f: &[f64]| -> f64 {
            w[..dim].iter().zip(f).map(|(a, b)| a * b).sum::<f64>() + w[dim]
        };

        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut best_w = w.clone();
        let mut best_obj = f64::INFINITY;
        let mut history = Vec::new();
        let mut converged = false;
        let mut epochs = 0;

        while epochs < self.max_epochs {
            epochs += 1;
            order.shuffle(&mut rng);
            for &i in &order {
                let g = y[i] * dot(&w, &features[i]) - 1.0;
                let projected = if alpha[i] <= 0.0 {
                    g.min(0.0)
                } else if alpha[i] >= self.c {
                    g.max(0.0)
                } else {
                    g
                };
                if projected.abs() <= 1e-12 {
                    continue;
                }
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, self.c);
                let step = (alpha[i] - old) * y[i];
                for (wj, xj) in w[..dim].iter_mut().zip(&features[i]) {
                    *wj += step * xj;
                }
                w[dim] += step;
            }

            let norm2 = w.iter().map(|v| v * v).sum::<f64>();
            let hinge: f64 = features
                .iter()
                .zip(&y)
                .map(|(f, yi)| (1.0 - yi * dot(&w, f)).max(0.0))
                .sum();
            let primal = 0.5 * norm2 + self.c * hinge;
            let dual = alpha.iter().sum::<f64>() - 0.5 * norm2;
            if primal < best_obj {
                best_obj = primal;
                best_w.clone_from(&w);
            }
            history.push(best_obj);
            if (best_obj - dual) <= self.tolerance * best_obj.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }

        let bias = best_w.pop().unwrap_or(0.0);
        let model = LinearSvmModel {
            weights: best_w,
            bias,
            c: self.c,
            descriptor: descriptor.to_string(),
            iterations: epochs,
        };
        Ok((
            model,
            TrainReport {
                objective_history: history,
                epochs,
                converged,
            },
        ))
    }
}

fn describe(samples: &[PatchSample]) -> (Vec<Vec<f64>>, Vec<PatchLabel>) {
    samples
        .iter()
        .map(|s| (hog_at(&s.patch, 0, 0).into_vec(), s.label))
        .unzip()
}

/// Train a HOG + linear SVM patch classifier. Flip augmentation is the
/// caller's job (see [`augment_with_flips`]).
pub fn train_svm(samples: &[PatchSample], c: f64) -> Result<LinearSvmModel> {
    let (features, labels) = describe(samples);
    SvmTrainer::with_c(c)
        .train(&features, &labels, HOG_DESCRIPTOR_TAG)
        .map(|(m, _)| m)
}

/// Sliding-window search area `(x0, y0, x1, y1)`: the central third of the
/// width and the middle half of the height.
pub fn window_search_region(width: usize, height: usize) -> (usize, usize, usize, usize) {
    (width / 3, height / 4, (2 * width).div_ceil(3), (3 * height).div_ceil(4))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowScore {
    /// Top-left corner of the window.
    pub x: usize,
    pub y: usize,
    pub score: f64,
}

impl WindowScore {
    pub fn center(&self) -> (f64, f64) {
        let half = (PATCH_SIZE as f64 - 1.0) / 2.0;
        (self.x as f64 + half, self.y as f64 + half)
    }
}

/// Scores of every 50×50 window lying inside `region`, row by row.
pub fn scan_windows(
    img: &GrayImage,
    model: &LinearSvmModel,
    region: (usize, usize, usize, usize),
    stride: usize,
) -> Result<Vec<WindowScore>> {
    if model.weights.len() != HOG_LEN {
        return Err(Error::validation("model is not a HOG patch model"));
    }
    if stride == 0 {
        return Err(Error::validation("stride must be >= 1"));
    }
    let (x0, y0, x1, y1) = region;
    let (x1, y1) = (x1.min(img.width()), y1.min(img.height()));
    if x1 < x0 + PATCH_SIZE || y1 < y0 + PATCH_SIZE {
        return Err(Error::validation("search region smaller than one window"));
    }
    let mut out = Vec::new();
    for y in (y0..=y1 - PATCH_SIZE).step_by(stride) {
        for x in (x0..=x1 - PATCH_SIZE).step_by(stride) {
            let h = hog_at(img, x, y);
            out.push(WindowScore {
                x,
                y,
                score: model.decision(h.as_slice()),
            });
        }
    }
    Ok(out)
}

/// Highest-scoring window; earlier windows win ties.
pub fn best_window(scores: &[WindowScore]) -> Option<WindowScore> {
    scores
        .iter()
        .copied()
        .reduce(|best, s| if s.score > best.score { s } else { best })
}

/// Column centre as the centre of the best-scoring window (stride 5).
pub fn locate_by_classifier(img: &GrayImage, model: &LinearSvmModel) -> Result<SpineCenter> {
    let region = window_search_region(img.width(), img.height());
    let scores = scan_windows(img, model, region, WINDOW_STRIDE)?;
    let best = best_window(&scores).ok_or_else(|| Error::DetectionFailed {
        reason: "no window scanned".into(),
        best_score: None,
    })?;
    if best.score <= 0.0 {
        return Err(Error::DetectionFailed {
            reason: "no window scored on the positive side".into(),
            best_score: Some(best.score),
        });
    }
    let (x, y) = best.center();
    Ok(SpineCenter {
        x,
        y,
        method: DetectionMethod::Classifier,
        score: Some(best.score),
    })
}

/// Detection on the 512×512 normalised frame, cord first with classifier
/// fallback; the centre is mapped back to `img` coordinates.
pub fn detect_spine_center(img: &GrayImage, model: Option<&LinearSvmModel>) -> Result<SpineCenter> {
    let norm = raster::resize_bilinear(img, NORMALIZED_SIZE, NORMALIZED_SIZE)?;
    let sx = img.width() as f64 / NORMALIZED_SIZE as f64;
    let sy = img.height() as f64 / NORMALIZED_SIZE as f64;
    let found = match (locate_by_cord(&norm), model) {
        (Ok(c), _) => Ok(c),
        (Err(_), Some(m)) => locate_by_classifier(&norm, m),
        (Err(e), None) => Err(e),
    }?;
    // pixel-centre aligned mapping, matching resize_bilinear
    Ok(SpineCenter {
        x: (found.x + 0.5) * sx - 0.5,
        y: (found.y + 0.5) * sy - 0.5,
        ..found
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub fold_sizes: Vec<usize>,
}

impl CvReport {
    pub fn mean_accuracy(&self) -> f64 {
        self.fold_accuracies.iter().sum::<f64>() / self.fold_accuracies.len() as f64
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin,
/// the second class continuing where the first stopped, so fold sizes differ
/// by at most one.
pub fn stratified_folds(labels: &[PatchLabel], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::validation("need at least 2 folds"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in [PatchLabel::Positive, PatchLabel::Negative] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::validation(format!(
                "{} {class:?} samples cannot fill {folds} stratified folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok(assignment)
}

/// k-fold cross-validated accuracy of [`SvmTrainer`] on precomputed features.
pub fn cross_validate_features(
    features: &[Vec<f64>],
    labels: &[PatchLabel],
    folds: usize,
    trainer: &SvmTrainer,
) -> Result<CvReport> {
    let assignment = stratified_folds(labels, folds, trainer.seed)?;
    let mut report = CvReport {
        fold_accuracies: Vec::with_capacity(folds),
        fold_sizes: Vec::with_capacity(folds),
    };
    for fold in 0..folds {
        let (mut train_x, mut train_y) = (Vec::new(), Vec::new());
        let mut test = Vec::new();
        for (i, &f) in assignment.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train_x.push(features[i].clone());
                train_y.push(labels[i]);
            }
        }
        let (model, _) = trainer.train(&train_x, &train_y, "cv")?;
        let correct = test
            .iter()
            .filter(|&&i| model.predict(&features[i]) == labels[i])
            .count();
        report.fold_accuracies.push(correct as f64 / test.len() as f64);
        report.fold_sizes.push(test.len());
    }
    Ok(report)
}

pub fn cross_validate(samples: &[PatchSample], folds: usize, c: f64) -> Result<CvReport> {
    if samples.len() < folds {
        return Err(Error::validation(format!(
            "{} samples are too few for {folds} folds",
            samples.len()
        )));
    }
    let (features, labels) = describe(samples);
    cross_validate_features(&features, &labels, folds, &SvmTrainer::with_c(c))
}

/// One entry of a training manifest. `rect` is `[x, y, w, h]` in the
/// image's own pixel grid; crops that are not 50×50 are resampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub rect: [usize; 4],
    pub label: PatchLabel,
}

/// Read a JSON training manifest; image paths resolve against its directory.
pub fn load_training_manifest(path: &Path) -> Result<Vec<PatchSample>> {
    let entries: Vec<ManifestEntry> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cache: Vec<(PathBuf, GrayImage)> = Vec::new();
    let mut samples = Vec::with_capacity(entries.len());
    for entry in entries {
        let full = base.join(&entry.image);
        let img = match cache.iter().find(|(p, _)| *p == full) {
            Some((_, img)) => img.clone(),
            None => {
                let img = raster::load_image(&std::fs::read(&full)?, None)?;
                cache.push((full, img.clone()));
                img
            }
        };
        let [x, y, w, h] = entry.rect;
        let crop = img.crop(x, y, w, h)?;
        let patch = raster::resize_bilinear(&crop, PATCH_SIZE, PATCH_SIZE)?;
        samples.push(PatchSample::new(patch, entry.label)?);
    }
    Ok(samples)
}
