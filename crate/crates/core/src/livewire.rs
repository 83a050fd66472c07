//! Livewire contour machinery.
//!
//! Anchors are joined by Dijkstra lowest-cost paths over an 8-connected
//! pixel grid whose node costs fall on strong gradients. The closed contour
//! is scaled back to full resolution and filled with the even–odd rule,
//! excluding the contour itself.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::raster::GrayImage;
use crate::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// 8-neighbourhood offsets in (y, x) order, the relaxation tie-break order.
const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Per-pixel traversal cost in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMap {
    width: usize,
    height: usize,
    costs: Vec<f64>,
}

impl CostMap {
    pub fn new(width: usize, height: usize, costs: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || costs.len() != width * height {
            return Err(Error::validation(format!(
                "cost field of {} values does not fit {width}x{height}",
                costs.len()
            )));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::validation("costs must be finite and non-negative"));
        }
        Ok(Self {
            width,
            height,
            costs,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.costs[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.costs
    }

    fn check(&self, a: Anchor) -> Result<()> {
        if a.x < self.width && a.y < self.height {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "anchor ({}, {}) outside {}x{} grid",
                a.x, a.y, self.width, self.height
            )))
        }
    }

    /// Cost of stepping onto `to` from an adjacent pixel.
    #[inline]
    fn step(&self, from: (usize, usize), to: (usize, usize)) -> f64 {
        let c = self.get(to.0, to.1);
        if from.0 != to.0 && from.1 != to.1 {
            SQRT2 * c
        } else {
            c
        }
    }

    /// Sum of step costs along `path`, accumulated from its first point.
    pub fn path_cost(&self, path: &PixelPath) -> f64 {
        path.points
            .windows(2)
            .fold(0.0, |acc, w| acc + self.step(w[0], w[1]))
    }
}

/// Static edge cost `1 − G/Gmax` with `G` the Sobel gradient magnitude
/// (edge-replicated borders). A flat image costs 1 everywhere.
pub fn edge_cost_map(img: &GrayImage) -> Result<CostMap> {
    if img.is_empty() {
        return Err(Error::validation("edge cost of an empty image"));
    }
    let (w, h) = (img.width(), img.height());
    let mut grad = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| f64::from(img.get_clamped(x + dx, y + dy));
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            grad.push(gx.hypot(gy));
        }
    }
    let gmax = grad.iter().copied().fold(0.0, f64::max);
    let costs = if gmax > 0.0 {
        grad.iter().map(|g| 1.0 - g / gmax).collect()
    } else {
        vec![1.0; w * h]
    };
    CostMap::new(w, h, costs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Anchor {
    pub x: usize,
    pub y: usize,
}

impl Anchor {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Ordered 8-connected pixel chain.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PixelPath {
    pub points: Vec<(usize, usize)>,
}

impl PixelPath {
    pub fn single(a: Anchor) -> Self {
        Self {
            points: vec![(a.x, a.y)],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Option<Anchor> {
        self.points.first().map(|&(x, y)| Anchor::new(x, y))
    }

    pub fn last(&self) -> Option<Anchor> {
        self.points.last().map(|&(x, y)| Anchor::new(x, y))
    }

    /// Consecutive points are distinct 8-neighbours.
    pub fn is_connected(&self) -> bool {
        self.points.windows(2).all(|w| {
            let dx = w[0].0.abs_diff(w[1].0);
            let dy = w[0].1.abs_diff(w[1].1);
            dx <= 1 && dy <= 1 && dx + dy > 0
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    idx: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // reversed: BinaryHeap pops the smallest (dist, y, x) first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree over a [`CostMap`].
///
/// Built once per anchor; every cursor preview is then a parent walk.
#[derive(Debug, Clone)]
pub struct CostTree {
    width: usize,
    source: Anchor,
    dist: Vec<f64>,
    parent: Vec<usize>,
}

impl CostTree {
    pub fn build(costs: &CostMap, source: Anchor) -> Result<Self> {
        costs.check(source)?;
        Ok(dijkstra(costs, source, None))
    }

    pub fn source(&self) -> Anchor {
        self.source
    }

    pub fn distance(&self, to: Anchor) -> f64 {
        self.dist[to.y * self.width + to.x]
    }

    pub fn path_to(&self, to: Anchor) -> Result<PixelPath> {
        let height = self.dist.len() / self.width;
        if to.x >= self.width || to.y >= height {
            return Err(Error::validation(format!(
                "target ({}, {}) outside {}x{height} grid",
                to.x, to.y, self.width
            )));
        }
        let mut idx = to.y * self.width + to.x;
        let src = self.source.y * self.width + self.source.x;
        let mut points = vec![(to.x, to.y)];
        while idx != src {
            idx = self.parent[idx];
            points.push((idx % self.width, idx / self.width));
        }
        points.reverse();
        Ok(PixelPath { points })
    }
}

fn dijkstra(costs: &CostMap, source: Anchor, target: Option<Anchor>) -> CostTree {
    let (w, h) = (costs.width, costs.height);
    let mut dist = vec![f64::INFINITY; w * h];
    let mut parent = vec![usize::MAX; w * h];
    let mut settled = vec![false; w * h];
    let mut heap = BinaryHeap::new();
    let src = source.y * w + source.x;
    let goal = target.map(|t| t.y * w + t.x);
    dist[src] = 0.0;
    parent[src] = src;
    heap.push(Frontier { dist: 0.0, idx: src });

    while let Some(Frontier { dist: d, idx }) = heap.pop() {
        if settled[idx] {
            continue;
        }
        settled[idx] = true;
        if Some(idx) == goal {
            break;
        }
        let (x, y) = (idx % w, idx / w);
        for (dy, dx) in NEIGHBOURS {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let n = ny * w + nx;
            if settled[n] {
                continue;
            }
            let nd = d + costs.step((x, y), (nx, ny));
            if nd < dist[n] {
                dist[n] = nd;
                parent[n] = idx;
                heap.push(Frontier { dist: nd, idx: n });
            }
        }
    }
    CostTree {
        width: w,
        source,
        dist,
        parent,
    }
}

/// Path from `from` to `to` minimising the summed cost of entered pixels,
/// diagonal steps weighted by √2.
pub fn lowest_cost_path(costs: &CostMap, from: Anchor, to: Anchor) -> Result<PixelPath> {
    costs.check(from)?;
    costs.check(to)?;
    dijkstra(costs, from, Some(to)).path_to(to)
}

/// Extend `contour` with the lowest-cost path from its last point to
/// `anchor`, without repeating the joint.
pub fn append_anchor(contour: &PixelPath, costs: &CostMap, anchor: Anchor) -> Result<PixelPath> {
    let last = contour
        .last()
        .ok_or_else(|| Error::validation("cannot append to an empty contour"))?;
    let segment = lowest_cost_path(costs, last, anchor)?;
    let mut out = contour.clone();
    out.points.extend_from_slice(&segment.points[1..]);
    Ok(out)
}

/// Anchors placed so far together with the committed path through them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LiveContour {
    anchors: Vec<Anchor>,
    path: PixelPath,
}

impl LiveContour {
    pub fn start(costs: &CostMap, anchor: Anchor) -> Result<Self> {
        costs.check(anchor)?;
        Ok(Self {
            anchors: vec![anchor],
            path: PixelPath::single(anchor),
        })
    }

    pub fn push(&mut self, costs: &CostMap, anchor: Anchor) -> Result<&PixelPath> {
        if self.anchors.is_empty() {
            *self = Self::start(costs, anchor)?;
        } else {
            self.path = append_anchor(&self.path, costs, anchor)?;
            self.anchors.push(anchor);
        }
        Ok(&self.path)
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn path(&self) -> &PixelPath {
        &self.path
    }
}

/// Close the contour back to its first anchor, scale it to full resolution
/// and fill it.
pub fn close_and_rasterize(
    contour: &LiveContour,
    costs: &CostMap,
    full_res_scale: usize,
) -> Result<RegionMask> {
    if contour.anchors.len() < 3 {
        return Err(Error::validation(format!(
            "closing needs at least 3 anchors, have {}",
            contour.anchors.len()
        )));
    }
    if full_res_scale == 0 {
        return Err(Error::validation("scale factor must be >= 1"));
    }
    let first = contour.anchors[0];
    let closed = append_anchor(&contour.path, costs, first)?;
    let s = full_res_scale as i64;
    let polygon: Vec<(i64, i64)> = closed
        .points
        .iter()
        .map(|&(x, y)| (x as i64 * s, y as i64 * s))
        .collect();
    Ok(RegionMask::from_polygon(&polygon))
}

/// Closed contour plus the pixels strictly inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMask {
    contour: Vec<(i64, i64)>,
    interior: Vec<(u32, u32)>,
    degenerate: bool,
}

impl RegionMask {
    /// Fill `contour` under the even–odd rule. Lattice points on the contour
    /// are never part of the interior. The stored contour is closed.
    pub fn from_polygon(contour: &[(i64, i64)]) -> Self {
        let mut closed = contour.to_vec();
        if let (Some(&a), Some(&b)) = (closed.first(), closed.last()) {
            if a != b {
                closed.push(a);
            }
        }
        let interior = fill_even_odd(&closed);
        let degenerate = interior.is_empty();
        Self {
            contour: closed,
            interior,
            degenerate,
        }
    }

    /// Mask from an explicit pixel set; used for hand-built regions.
    pub fn from_interior(contour: Vec<(i64, i64)>, mut interior: Vec<(u32, u32)>) -> Self {
        interior.sort_unstable_by_key(|&(x, y)| (y, x));
        interior.dedup();
        let degenerate = interior.is_empty();
        Self {
            contour,
            interior,
            degenerate,
        }
    }

    pub fn contour(&self) -> &[(i64, i64)] {
        &self.contour
    }

    /// Interior pixels in row-major order.
    pub fn interior(&self) -> &[(u32, u32)] {
        &self.interior
    }

    pub fn pixel_count(&self) -> usize {
        self.interior.len()
    }

    /// Set when the contour encloses no pixel.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        match self
            .interior
            .iter()
            .find(|&&(x, y)| x as usize >= width || y as usize >= height)
        {
            Some(&(x, y)) => Err(Error::validation(format!(
                "mask pixel ({x}, {y}) outside {width}x{height} image"
            ))),
            None => Ok(()),
        }
    }

    pub fn centroid(&self) -> Option<(f64, f64)> {
        if self.interior.is_empty() {
            return None;
        }
        let n = self.interior.len() as f64;
        let (sx, sy) = self
            .interior
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + f64::from(x), sy + f64::from(y)));
        Some((sx / n, sy / n))
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn boundary_points(closed: &[(i64, i64)]) -> HashSet<(i64, i64)> {
    let mut out = HashSet::new();
    for w in closed.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let g = gcd(dx, dy).max(1);
        for t in 0..=g {
            out.insert((x0 + t * dx / g, y0 + t * dy / g));
        }
    }
    out
}

/// Crossing `x = num / den` (den > 0) of an edge with a scanline.
#[derive(Debug, Clone, Copy)]
struct Crossing {
    num: i128,
    den: i128,
}

impl Crossing {
    fn cmp(&self, o: &Crossing) -> Ordering {
        (self.num * o.den).cmp(&(o.num * self.den))
    }

    fn floor(&self) -> i64 {
        self.num.div_euclid(self.den) as i64
    }

    fn ceil(&self) -> i64 {
        -((-self.num).div_euclid(self.den)) as i64
    }
}

fn fill_even_odd(closed: &[(i64, i64)]) -> Vec<(u32, u32)> {
    if closed.len() < 4 {
        return Vec::new();
    }
    let ymin = closed.iter().map(|p| p.1).min().unwrap_or(0);
    let ymax = closed.iter().map(|p| p.1).max().unwrap_or(0);
    let boundary = boundary_points(closed);
    let mut interior = Vec::new();
    let mut crossings = Vec::new();
    for y in (ymin + 1).max(0)..ymax {
        crossings.clear();
        for w in closed.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y0 == y1 || y < y0.min(y1) || y >= y0.max(y1) {
                continue;
            }
            let (x0, y0, x1, y1) = (x0 as i128, y0 as i128, x1 as i128, y1 as i128);
            let mut num = x0 * (y1 - y0) + (y as i128 - y0) * (x1 - x0);
            let mut den = y1 - y0;
            if den < 0 {
                num = -num;
                den = -den;
            }
            crossings.push(Crossing { num, den });
        }
        crossings.sort_by(Crossing::cmp);
        for pair in crossings.chunks_exact(2) {
            let lo = (pair[0].floor() + 1).max(0);
            let hi = pair[1].ceil() - 1;
            for x in lo..=hi {
                if !boundary.contains(&(x, y)) {
                    interior.push((x as u32, y as u32));
                }
            }
        }
    }
    interior
}

/// Parse the contour exchange format: a JSON array of `[x, y]` pairs.
pub fn contour_from_json(text: &str) -> Result<Vec<(i64, i64)>> {
    let pairs: Vec<[i64; 2]> = serde_json::from_str(text)?;
    Ok(pairs.into_iter().map(|[x, y]| (x, y)).collect())
}

pub fn contour_to_json(contour: &[(i64, i64)]) -> String {
    let pairs: Vec<[i64; 2]> = contour.iter().map(|&(x, y)| [x, y]).collect();
    serde_json::to_string(&pairs).expect("integer pairs always serialize")
}
