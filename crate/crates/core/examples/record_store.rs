//! Export pre and post records and compare the phases of one patient.

use chrono::{TimeZone, Utc};
use lumbarfat::fragment::fragment;
use lumbarfat::livewire::RegionMask;
use lumbarfat::quantify::{quantify, QuantParams};
use lumbarfat::spine::detect_spine_center;
use lumbarfat::store::{AnalysisRecord, MuscleLabel, RecordStore, TrainingPhase};
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    let dir = std::env::temp_dir().join(format!("lumbarfat_store_{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let mut store = RecordStore::open(dir.join("results.csv"))?;

    // the post scan has fewer fat streaks
    for (phase, streaks, hour) in [(TrainingPhase::Pre, 8, 9), (TrainingPhase::Post, 3, 10)] {
        let phantom = axial_phantom(&PhantomSpec { streaks, ..PhantomSpec::default() });
        let mask = RegionMask::from_polygon(&phantom.es_right);
        let params = QuantParams::new(120, 0.2)?;
        let center = detect_spine_center(&phantom.image, None)?;
        let quant = quantify(&phantom.image, &mask, &params, Some(0.49))?;
        let regions = fragment(&phantom.image, &mask, &center, &params, 6)?;
        let when = Utc.with_ymd_and_hms(2024, 3, 1, hour, 0, 0).unwrap();
        let record = AnalysisRecord::from_results(
            "P01", "L4L5", MuscleLabel::EsRight, phase, when, &quant, Some(&regions), mask.contour(),
        )?;
        let id = store.append(&record)?;
        println!("{id}: {}", record.to_csv_row());
    }

    let cmp = store.compare_phases("P01")?;
    for row in &cmp.rows {
        println!(
            "{} {}: {:.1} -> {:.1} (Δ {:+.1}), regions Δ {:?}",
            row.slice_label,
            row.muscle_label,
            row.total_pre,
            row.total_post,
            row.total_delta(),
            row.region_deltas()
        );
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
