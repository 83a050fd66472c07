//! Train the HOG + linear SVM column detector and run the sliding window.

use lumbarfat::raster::GrayImage;
use lumbarfat::spine::{self, PatchLabel, PatchSample};
use lumbarfat::synth::{axial_phantom, embed_patch, Phantom, PhantomSpec};

fn patch_at(p: &Phantom, dx: i64, dy: i64) -> GrayImage {
    let x0 = p.column_center.0.round() as i64 - 25 + dx;
    let y0 = p.column_center.1.round() as i64 - 25 + dy;
    p.image.crop(x0 as usize, y0 as usize, 50, 50).expect("inside the slice")
}

fn main() -> lumbarfat::Result<()> {
    let mut samples = Vec::new();
    for seed in 0..20u64 {
        let p = axial_phantom(&PhantomSpec {
            column_center: (246.0 + seed as f64, 230.0 + (seed % 7) as f64),
            seed,
            ..PhantomSpec::default()
        });
        samples.push(PatchSample::new(patch_at(&p, 0, 0), PatchLabel::Positive)?);
        for (dx, dy) in [(-40, 0), (40, 10), (0, -35), (20, 45)] {
            samples.push(PatchSample::new(patch_at(&p, dx, dy), PatchLabel::Negative)?);
        }
        samples.push(PatchSample::new(p.image.crop(5, 5, 50, 50)?, PatchLabel::Negative)?);
    }
    let samples = spine::augment_with_flips(&samples);
    let model = spine::train_svm(&samples, 1.0)?;
    let cv = spine::cross_validate(&samples, 10, 1.0)?;
    println!("{} samples, 10-fold mean accuracy {:.3}", samples.len(), cv.mean_accuracy());

    let held_out = axial_phantom(&PhantomSpec { seed: 99, ..PhantomSpec::default() });
    let frame = embed_patch(512, &patch_at(&held_out, 0, 0), 220, 200, 7);
    let c = spine::locate_by_classifier(&frame, &model)?;
    println!("embedded patch centre (244.5, 224.5), detected ({:.1}, {:.1}), score {:.3}", c.x, c.y, c.score.unwrap_or(0.0));

    let path = std::env::temp_dir().join("lumbarfat_model.json");
    model.save(&path)?;
    println!("model written to {}", path.display());
    Ok(())
}
