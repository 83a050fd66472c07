//! Fat percentage, TCSA and FCSA of an erector spinae outline on a phantom.

use lumbarfat::livewire::RegionMask;
use lumbarfat::quantify::{quantify, QuantParams};
use lumbarfat::raster::{self, PixelSpacing};
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    let phantom = axial_phantom(&PhantomSpec::default());
    let image = phantom.image.with_spacing(Some(PixelSpacing::isotropic(0.7)?));
    let mask = RegionMask::from_polygon(&phantom.es_right);

    // the default threshold is the whole-slice Otsu level; the ROI level is
    // shown for reference
    let otsu = raster::otsu_threshold(&raster::histogram(&image, None)?)?;
    let roi = raster::otsu_threshold(&raster::histogram(&image, Some(&mask))?)?;
    println!("slice Otsu threshold {otsu}, ROI Otsu threshold {roi}");
    for softness in [0.0, 0.2, 0.5] {
        let q = quantify(&image, &mask, &QuantParams::new(otsu, softness)?, None)?;
        println!(
            "sigma {softness:.1}: N={} fat {:.1}% TCSA {} mm² FCSA {} mm²",
            q.n_pixels,
            q.fat_percent_rounded(),
            q.tcsa_rounded(),
            q.fcsa_rounded()
        );
    }
    Ok(())
}
