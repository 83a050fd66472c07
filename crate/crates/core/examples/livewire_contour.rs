//! Trace a muscle outline from a few anchors, preview a segment and close it.

use lumbarfat::livewire::{close_and_rasterize, edge_cost_map, Anchor, CostTree, LiveContour, RegionMask};
use lumbarfat::raster;
use lumbarfat::synth::{axial_phantom, PhantomSpec};

fn main() -> lumbarfat::Result<()> {
    let phantom = axial_phantom(&PhantomSpec::default());
    let factor = raster::livewire_factor(&phantom.image);
    let small = raster::downsample(&phantom.image, factor)?;
    let costs = edge_cost_map(&small)?;

    let step = phantom.es_right.len() / 8;
    let anchors: Vec<Anchor> = (0..8)
        .map(|i| {
            let (x, y) = phantom.es_right[i * step];
            Anchor::new(x as usize / factor, y as usize / factor)
        })
        .collect();

    let mut contour = LiveContour::default();
    for &a in &anchors {
        let path = contour.push(&costs, a)?;
        println!("anchor ({:>3}, {:>3}) -> path of {} pixels", a.x, a.y, path.len());
    }

    let last = *anchors.last().expect("anchors");
    let tree = CostTree::build(&costs, last)?;
    let preview = tree.path_to(anchors[0])?;
    println!("preview back to the first anchor: {} pixels, cost {:.3}", preview.len(), tree.distance(anchors[0]));

    let traced = close_and_rasterize(&contour, &costs, factor)?;
    let drawn = RegionMask::from_polygon(&phantom.es_right);
    println!(
        "traced mask {} pixels at factor {factor}, hand outline {} pixels",
        traced.pixel_count(),
        drawn.pixel_count()
    );
    Ok(())
}
