//! Deterministic synthetic axial slices.
//!
//! The phantom is a crude T2-like lumbar cross-section: dark background,
//! an elliptical body with a bright subcutaneous fat ring, a vertebral body,
//! a bright spinal cord below it and two erector spinae muscles carrying
//! small fat streaks. Ground truth is known for every structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{GrayImage, PixelSpacing};

pub const BACKGROUND: u8 = 15;
pub const MUSCLE: u8 = 68;
pub const VERTEBRA: u8 = 80;
pub const FAT: u8 = 205;
pub const CORD: u8 = 240;

#[derive(Debug, Clone)]
pub struct PhantomSpec {
    pub size: usize,
    /// Centre of the vertebral body (the spinal column).
    pub column_center: (f64, f64),
    /// Vertical distance from column centre down to the cord centre.
    pub cord_offset: f64,
    pub cord_radius: f64,
    /// Uniform noise amplitude in levels.
    pub noise: u8,
    /// Number of intramuscular fat streaks per erector spinae.
    pub streaks: usize,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            size: 512,
            column_center: (256.0, 235.0),
            cord_offset: 55.0,
            cord_radius: 6.0,
            noise: 6,
            streaks: 5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: GrayImage,
    pub column_center: (f64, f64),
    pub cord_center: (f64, f64),
    /// Polygon outlining the erector spinae on the image's right half.
    pub es_right: Vec<(i64, i64)>,
    pub es_left: Vec<(i64, i64)>,
}

fn inside_ellipse(x: f64, y: f64, c: (f64, f64), a: f64, b: f64) -> bool {
    let (dx, dy) = ((x - c.0) / a, (y - c.1) / b);
    dx * dx + dy * dy <= 1.0
}

/// Integer polygon tracing an ellipse with `n` vertices.
pub fn ellipse_polygon(c: (f64, f64), a: f64, b: f64, n: usize) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            ((c.0 + a * t.cos()).round() as i64, (c.1 + b * t.sin()).round() as i64)
        })
        .collect();
    out.dedup();
    out
}

pub fn axial_phantom(spec: &PhantomSpec) -> Phantom {
    let s = spec.size as f64;
    let k = s / 512.0;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (cx, cy) = spec.column_center;
    let cord = (cx, cy + spec.cord_offset * k);
    let body_c = (s / 2.0, s / 2.0);
    let (body_a, body_b) = (0.44 * s, 0.37 * s);
    let es_r = (cx + 58.0 * k, cy + 95.0 * k);
    let es_l = (cx - 58.0 * k, cy + 95.0 * k);
    let (es_a, es_b) = (36.0 * k, 26.0 * k);

    let mut streaks = Vec::new();
    for centre in [es_r, es_l] {
        for _ in 0..spec.streaks {
            let sx = centre.0 + rng.random_range(-0.6..0.6) * es_a;
            let sy = centre.1 + rng.random_range(-0.5..0.5) * es_b;
            let len = rng.random_range(3.0..6.0) * k;
            streaks.push(((sx, sy), len, 1.6 * k));
        }
    }

    let mut levels = Vec::with_capacity(spec.size * spec.size);
    for y in 0..spec.size {
        for x in 0..spec.size {
            let (fx, fy) = (x as f64, y as f64);
            let mut level = if !inside_ellipse(fx, fy, body_c, body_a, body_b) {
                BACKGROUND
            } else if !inside_ellipse(fx, fy, body_c, body_a * 0.93, body_b * 0.9) {
                FAT
            } else {
                MUSCLE
            };
            if inside_ellipse(fx, fy, (cx, cy), 28.0 * k, 22.0 * k) {
                level = VERTEBRA;
            }
            if inside_ellipse(fx, fy, cord, spec.cord_radius * k, spec.cord_radius * k) {
                level = CORD;
            }
            for &(c, a, b) in &streaks {
                if inside_ellipse(fx, fy, c, a, b) {
                    level = 165;
                }
            }
            let noise = if spec.noise > 0 {
                rng.random_range(-(spec.noise as i32)..=spec.noise as i32)
            } else {
                0
            };
            levels.push((i32::from(level) + noise).clamp(0, 255) as u8);
        }
    }
    let spacing = PixelSpacing::isotropic(200.0 / s).ok();
    Phantom {
        image: GrayImage::new(spec.size, spec.size, levels)
            .expect("dimensions match")
            .with_spacing(spacing),
        column_center: (cx, cy),
        cord_center: cord,
        es_right: ellipse_polygon(es_r, es_a + 2.0, es_b + 2.0, 40),
        es_left: ellipse_polygon(es_l, es_a + 2.0, es_b + 2.0, 40),
    }
}

/// Dark noisy frame with `patch` pasted at `(x0, y0)`.
pub fn embed_patch(size: usize, patch: &GrayImage, x0: usize, y0: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = (0..size * size)
        .map(|_| BACKGROUND + rng.random_range(0..6u8))
        .collect();
    let mut img = GrayImage::new(size, size, levels).expect("dimensions match");
    for y in 0..patch.height() {
        for x in 0..patch.width() {
            img.set(x0 + x, y0 + y, patch.get(x, y));
        }
    }
    img
}

/// Square region of bimodal tissue: muscle around level 40, fat around
/// 200 (±12 uniform), `fat_fraction` of the pixels fat. Returns the image and the
/// polygon enclosing the region.
pub fn bimodal_region(side: usize, fat_fraction: f64, seed: u64) -> (GrayImage, Vec<(i64, i64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = side + 4;
    let mut img = GrayImage::filled(size, size, BACKGROUND);
    for y in 2..2 + side {
        for x in 2..2 + side {
            let fat = rng.random_bool(fat_fraction.clamp(0.0, 1.0));
            let level = if fat {
                200 + rng.random_range(-12..=12)
            } else {
                40 + rng.random_range(-12..=12)
            };
            img.set(x, y, level as u8);
        }
    }
    let (lo, hi) = (1i64, (side + 2) as i64);
    (img, vec![(lo, lo), (hi, lo), (hi, hi), (lo, hi)])
}
