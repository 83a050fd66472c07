//! Spinal-column centre from the bright cord, on phantoms of several sizes.

use lumbarfat::spine::detect_spine_center;
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    for (size, seed) in [(512, 1), (384, 2), (640, 3)] {
        let k = size as f64 / 512.0;
        let phantom = axial_phantom(&PhantomSpec {
            size,
            column_center: (250.0 * k, 240.0 * k),
            seed,
            ..PhantomSpec::default()
        });
        let c = detect_spine_center(&phantom.image, None)?;
        println!(
            "{size}×{size}: found ({:.1}, {:.1}) via {:?}, true ({:.1}, {:.1})",
            c.x, c.y, c.method, phantom.column_center.0, phantom.column_center.1
        );
    }
    Ok(())
}
