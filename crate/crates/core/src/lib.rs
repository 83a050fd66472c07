//! Fat infiltration quantification for lumbar muscles on axial MRI slices.
//!
//! The crate is organised as a pipeline of small, pure stages:
//!
//! 1. [`raster`]: grayscale image model, PNG ingestion with a metadata
//!    sidecar, brightness, block downsampling, histograms and Otsu's threshold.
//! 2. [`livewire`]: edge-cost field, Dijkstra lowest-cost paths between
//!    anchors and even–odd rasterization of the closed contour.
//! 3. [`quantify`]: sigmoid fat membership, total fat percentage, TCSA and FCSA.
//! 4. [`spine`]: spinal-column localisation, either from the spinal cord
//!    centroid or with a HOG descriptor and a linear SVM sliding window.
//! 5. [`fragment`]: six-region subdivision of an erector spinae mask about
//!    the spinal-column centre.
//! 6. [`store`]: append-only CSV record store with contour sidecars and
//!    pre/post comparison.
//! 7. [`api`]: the batch `analyze` pipeline and the HTTP session service.
//!
//! [`synth`] builds deterministic synthetic slices used by the examples and
//! test suites.
//!
//! ```
//! use lumbarfat::livewire::RegionMask;
//! use lumbarfat::quantify::{fat_field, fat_percent, QuantParams};
//! use lumbarfat::raster::GrayImage;
//!
//! let mut img = GrayImage::filled(12, 12, 40);
//! for x in 1..6 {
//!     for y in 1..11 {
//!         img.set(x, y, 200);
//!     }
//! }
//! let mask = RegionMask::from_polygon(&[(0, 0), (11, 0), (11, 11), (0, 11)]);
//! let params = QuantParams::new(120, 0.0).unwrap();
//! let field = fat_field(&img, &mask, &params).unwrap();
//! assert_eq!(mask.pixel_count(), 100);
//! assert!((fat_percent(&field) - 50.0).abs() < 1e-12);
//! ```

pub mod api;
pub mod error;
pub mod fragment;
pub mod livewire;
pub mod quantify;
pub mod raster;
pub mod spine;
pub mod store;
pub mod synth;

pub use error::{Error, Result};

/// Round half-up to the nearest integer, the single rounding rule used for
/// every fractional intensity level.
pub(crate) fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Round to a fixed number of decimals for exported values.
pub fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}
