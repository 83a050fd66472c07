//! Otsu's threshold on a whole slice and inside one muscle.

use lumbarfat::livewire::RegionMask;
use lumbarfat::raster::{self, Histogram256};
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    let phantom = axial_phantom(&PhantomSpec::default());
    let whole = raster::histogram(&phantom.image, None)?;
    let mask = RegionMask::from_polygon(&phantom.es_left);
    let roi = raster::histogram(&phantom.image, Some(&mask))?;
    println!("whole slice: {} pixels, threshold {}", whole.total(), raster::otsu_threshold(&whole)?);
    println!("left ES:     {} pixels, threshold {}", roi.total(), raster::otsu_threshold(&roi)?);

    let mut counts = [0u64; 256];
    counts[40] = 700;
    counts[200] = 300;
    let two_levels = Histogram256::from_counts(counts);
    println!("levels 40 and 200: threshold {}", raster::otsu_threshold(&two_levels)?);
    Ok(())
}
