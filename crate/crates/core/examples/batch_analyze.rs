//! The batch pipeline: PNG, metadata sidecar and mask file in, CSV row out.
//! Equivalent to `lumbarfat analyze`.

use std::path::PathBuf;

use lumbarfat::api::cli::{analyze, AnalyzeArgs};
use lumbarfat::livewire::contour_to_json;
use lumbarfat::raster::{self, SliceMeta};
use lumbarfat::store::{MuscleLabel, TrainingPhase};
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    let dir = std::env::temp_dir().join(format!("lumbarfat_batch_{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let phantom = axial_phantom(&PhantomSpec::default());

    let image: PathBuf = dir.join("slice.png");
    std::fs::write(&image, raster::encode_png(&phantom.image)?)?;
    let meta = SliceMeta {
        patient_id: "P07".into(),
        slice_label: "L4L5".into(),
        pixel_spacing_mm: Some([0.7, 0.7]),
        acquisition_tag: None,
    };
    std::fs::write(SliceMeta::sidecar_path(&image), serde_json::to_string_pretty(&meta)?)?;
    let mask = dir.join("es_left.json");
    std::fs::write(&mask, contour_to_json(&phantom.es_left))?;

    let out = analyze(&AnalyzeArgs {
        image,
        sidecar: None,
        mask,
        threshold: None,
        softness: 0.2,
        regions: Some(6),
        center: None,
        model: None,
        label: MuscleLabel::EsLeft,
        phase: TrainingPhase::Pre,
        out_csv: dir.join("results.csv"),
    })?;
    println!("{}", serde_json::to_string_pretty(&out)?);
    print!("{}", std::fs::read_to_string(dir.join("results.csv"))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
