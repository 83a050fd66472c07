//! Six-region fat distribution of both erector spinae about the column.

use lumbarfat::fragment::fragment;
use lumbarfat::livewire::RegionMask;
use lumbarfat::quantify::QuantParams;
use lumbarfat::raster;
use lumbarfat::spine::detect_spine_center;
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    let phantom = axial_phantom(&PhantomSpec::default());
    let center = detect_spine_center(&phantom.image, None)?;
    println!("spine centre ({:.1}, {:.1})", center.x, center.y);
    for (name, outline) in [("right", &phantom.es_right), ("left", &phantom.es_left)] {
        let mask = RegionMask::from_polygon(outline);
        let threshold = raster::otsu_threshold(&raster::histogram(&phantom.image, Some(&mask))?)?;
        let f = fragment(&phantom.image, &mask, &center, &QuantParams::with_default_softness(threshold), 6)?;
        let parts: Vec<String> = f.regions.iter().map(|r| format!("{} {:.1}", r.label, r.fat_percent_of_total)).collect();
        println!(
            "{name:<5} theta {:6.1}°  {}  total {:.1}",
            f.theta_deg,
            parts.join("  "),
            f.total_fat_percent
        );
    }
    Ok(())
}
