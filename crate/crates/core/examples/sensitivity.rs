//! Fat % and FCSA against the sigmoid softness at a fixed threshold.

use lumbarfat::livewire::RegionMask;
use lumbarfat::quantify::sensitivity_report;
use lumbarfat::synth::bimodal_region;

fn main() -> lumbarfat::Result<()> {
    let (image, outline) = bimodal_region(60, 0.258, 9);
    let mask = RegionMask::from_polygon(&outline);
    let psize = 33.0 / mask.pixel_count() as f64;
    println!("sigma  fat %   FCSA mm²");
    for row in sensitivity_report(&image, &mask, 120, Some(psize))? {
        println!("{:.1}    {:6.2}  {:6.2}", row.softness, row.fat_percent, row.fcsa_mm2);
    }
    Ok(())
}
