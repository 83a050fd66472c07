//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use num::{BigInt, BigRational, Zero};

use lumbarfat::livewire::CostMap;
use lumbarfat::raster::GrayImage;

/// Otsu by exact rational evaluation of `w0 w1 (mu0 - mu1)^2` at every
/// split; smallest level wins ties.
pub fn otsu_exact(counts: &[u64; 256]) -> u8 {
    let total: u64 = counts.iter().sum();
    let n = BigRational::from_integer(BigInt::from(total));
    let mut best_k = 0u8;
    let mut best = BigRational::zero();
    for k in 0..256usize {
        let n0: u64 = counts[..=k].iter().sum();
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: u64 = (0..=k).map(|l| l as u64 * counts[l]).sum();
        let s1: u64 = (k + 1..256).map(|l| l as u64 * counts[l]).sum();
        let r = |v: u64| BigRational::from_integer(BigInt::from(v));
        let (w0, w1) = (r(n0) / &n, r(n1) / &n);
        let (mu0, mu1) = (r(s0) / r(n0), r(s1) / r(n1));
        let diff = mu0 - mu1;
        let var = w0 * w1 * &diff * &diff;
        if var > best {
            best = var;
            best_k = k as u8;
        }
    }
    best_k
}

/// Minimum path cost by Bellman–Ford relaxation to a fixed point. Distances
/// accumulate from the source one step at a time, matching the path-cost
/// summation order, so the result is the exact minimum over all paths.
pub fn min_cost_bellman_ford(costs: &CostMap, from: (usize, usize), to: (usize, usize)) -> f64 {
    let (w, h) = (costs.width(), costs.height());
    let mut dist = vec![f64::INFINITY; w * h];
    dist[from.1 * w + from.0] = 0.0;
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let d = dist[y * w + x];
                if !d.is_finite() {
                    continue;
                }
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        let c = costs.get(nx, ny);
                        let step = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 * c } else { c };
                        let nd = d + step;
                        if nd < dist[ny * w + nx] {
                            dist[ny * w + nx] = nd;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return dist[to.1 * w + to.0];
        }
    }
}

/// Minimum over every simple path, by exhaustive depth-first enumeration.
/// Only feasible on tiny grids.
pub fn min_cost_enumerate(costs: &CostMap, from: (usize, usize), to: (usize, usize)) -> f64 {
    fn go(
        costs: &CostMap,
        at: (usize, usize),
        to: (usize, usize),
        acc: f64,
        seen: &mut Vec<bool>,
        best: &mut f64,
    ) {
        if at == to {
            *best = best.min(acc);
            return;
        }
        let w = costs.width();
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (nx, ny) = (at.0 as i64 + dx, at.1 as i64 + dy);
                if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= costs.height() as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if seen[ny * w + nx] {
                    continue;
                }
                let c = costs.get(nx, ny);
                let step = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 * c } else { c };
                seen[ny * w + nx] = true;
                go(costs, (nx, ny), to, acc + step, seen, best);
                seen[ny * w + nx] = false;
            }
        }
    }
    let mut seen = vec![false; costs.width() * costs.height()];
    seen[from.1 * costs.width() + from.0] = true;
    let mut best = f64::INFINITY;
    go(costs, from, to, 0.0, &mut seen, &mut best);
    best
}

fn on_segment(p: (i64, i64), a: (i64, i64), b: (i64, i64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    cross == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Even–odd point-in-polygon by ray casting towards +x; points on an edge
/// count as outside.
pub fn inside_polygon(p: (i64, i64), poly: &[(i64, i64)]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if on_segment(p, a, b) {
            return false;
        }
        if (a.1 > p.1) != (b.1 > p.1) {
            // crossing x > p.x  <=>  sign test on the cross product
            let lhs = (p.0 - a.0) as i128 * (b.1 - a.1) as i128;
            let rhs = (b.0 - a.0) as i128 * (p.1 - a.1) as i128;
            let right_of_p = if b.1 > a.1 { rhs > lhs } else { rhs < lhs };
            if right_of_p {
                inside = !inside;
            }
        }
    }
    inside
}

/// Every non-negative lattice point strictly inside `poly`, row-major.
pub fn fill_brute_force(poly: &[(i64, i64)]) -> Vec<(u32, u32)> {
    let (x0, x1) = (poly.iter().map(|p| p.0).min().unwrap(), poly.iter().map(|p| p.0).max().unwrap());
    let (y0, y1) = (poly.iter().map(|p| p.1).min().unwrap(), poly.iter().map(|p| p.1).max().unwrap());
    let mut out = Vec::new();
    for y in y0.max(0)..=y1 {
        for x in x0.max(0)..=x1 {
            if inside_polygon((x, y), poly) {
                out.push((x as u32, y as u32));
            }
        }
    }
    out
}

/// Straightforward HOG: per-pixel central-difference gradients with edge
/// replication, unsigned orientation with linear voting between the two
/// nearest of nine 20° bins, 2×2-pixel cells, L2 normalisation per cell.
pub fn hog_reference(patch: &GrayImage) -> Vec<f64> {
    let (w, h) = (patch.width(), patch.height());
    let at = |x: i64, y: i64| f64::from(patch.get(x.clamp(0, w as i64 - 1) as usize, y.clamp(0, h as i64 - 1) as usize));
    let (cw, ch) = (w / 2, h / 2);
    let mut hist = vec![[0.0f64; 9]; cw * ch];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = at(x + 1, y) - at(x - 1, y);
            let gy = at(x, y + 1) - at(x, y - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut ang = gy.atan2(gx).to_degrees();
            while ang < 0.0 {
                ang += 180.0;
            }
            while ang >= 180.0 {
                ang -= 180.0;
            }
            // bin k centred at 20k + 10
            let pos = ang / 20.0 - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = (lo as i64).rem_euclid(9) as usize;
            let b1 = (b0 + 1) % 9;
            let cell = &mut hist[(y as usize / 2) * cw + x as usize / 2];
            cell[b0] += mag * (1.0 - frac);
            cell[b1] += mag * frac;
        }
    }
    let mut out = Vec::with_capacity(cw * ch * 9);
    for cell in hist {
        let norm = cell.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in cell {
            out.push(if norm > 1e-6 { v / norm } else { 0.0 });
        }
    }
    out
}

/// Index map of a horizontal flip on the 25×25×9 descriptor: cell column
/// `cx` goes to `24 - cx`, orientation bin `k` to `8 - k`.
pub fn hog_flip_permutation() -> Vec<usize> {
    let mut perm = vec![0; 25 * 25 * 9];
    for cy in 0..25 {
        for cx in 0..25 {
            for k in 0..9 {
                perm[(cy * 25 + cx) * 9 + k] = (cy * 25 + (24 - cx)) * 9 + (8 - k);
            }
        }
    }
    perm
}

/// Fat % by the hard rule: share of mask pixels above the threshold.
pub fn hard_fat_percent(levels: &[u8], threshold: u8) -> f64 {
    let fat = levels.iter().filter(|&&l| l > threshold).count();
    100.0 * fat as f64 / levels.len() as f64
}

/// Soft-margin hinge objective `½(‖w‖² + b²) + C Σ max(0, 1 − y(w·x + b))`.
pub fn svm_primal(w: &[f64], b: f64, c: f64, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let f = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            (1.0 - y * f).max(0.0)
        })
        .sum();
    reg + c * loss
}

pub fn image_from_fn(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> u8) -> GrayImage {
    let mut levels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            levels.push(f(x, y));
        }
    }
    GrayImage::new(w, h, levels).unwrap()
}
