//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use chrono::Utc;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lumbarfat::fragment::fragment;
use lumbarfat::livewire::{lowest_cost_path, Anchor, CostMap, RegionMask};
use lumbarfat::quantify::{self, QuantParams};
use lumbarfat::raster::{self, GrayImage, Histogram256, PixelSpacing};
use lumbarfat::spine::{self, PatchLabel, PatchSample, SpineCenter};
use lumbarfat::synth::{self, PhantomSpec};
use lumbarfat::round_to;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rect_mask(w: i64, h: i64) -> RegionMask {
    // interior is exactly w × h pixels, from (1, 1)
    RegionMask::from_polygon(&[(0, 0), (w + 1, 0), (w + 1, h + 1), (0, h + 1)])
}

/// Image of `w × h` interior pixels (plus a one-pixel rim) with exactly
/// `fat` of them bright, scattered deterministically.
fn scattered_fixture(w: usize, h: usize, fat: usize, seed: u64) -> GrayImage {
    let mut levels = vec![200u8; fat];
    levels.resize(w * h, 50);
    levels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut img = GrayImage::filled(w + 2, h + 2, 0);
    for (i, l) in levels.into_iter().enumerate() {
        img.set(1 + i % w, 1 + i / w, l);
    }
    img
}

fn hard_rule_fixture() -> Outcome {
    let img = scattered_fixture(172, 123, 3733, 1);
    let mask = rect_mask(172, 123);
    let t0 = Instant::now();
    let q = quantify::quantify(&img, &mask, &QuantParams::new(70, 0.0).unwrap(), Some(1.0)).unwrap();
    let dt = t0.elapsed();
    let levels: Vec<u8> = mask.interior().iter().map(|&(x, y)| img.get(x as usize, y as usize)).collect();
    let oracle = common::hard_fat_percent(&levels, 70);
    let pass = q.n_pixels == 21_156
        && (q.fat_percent - 17.6).abs() <= 0.05
        && (q.fat_percent - oracle).abs() < 1e-12
        && dt < Duration::from_secs(1);
    outcome(pass, format!("N={} fat={:.4}% (oracle {:.4}%) in {:?}", q.n_pixels, q.fat_percent, oracle, dt))
}

fn reference_areas() -> Outcome {
    // 1000-pixel masks; pixel area chosen so TCSA is 33 and 25 mm²
    let mut lines = Vec::new();
    let mut pass = true;
    for (fat_px, tcsa, want_fcsa, want_fat) in [(258usize, 33.0, 24i64, 25.8), (174, 25.0, 21, 17.4)] {
        let side = (tcsa / 1000.0f64).sqrt();
        let img = scattered_fixture(40, 25, fat_px, 2).with_spacing(Some(PixelSpacing::isotropic(side).unwrap()));
        let q = quantify::quantify(&img, &rect_mask(40, 25), &QuantParams::new(70, 0.0).unwrap(), None).unwrap();
        let ok = q.fat_percent_rounded() == want_fat && q.tcsa_rounded() == tcsa as i64 && q.fcsa_rounded() == want_fcsa;
        // FCSA = TCSA · (1 − fat %), independent of the pixel model
        let relation = (tcsa * (1.0 - want_fat / 100.0)).round() as i64 == want_fcsa;
        pass &= ok && relation;
        lines.push(format!("fat {} TCSA {} FCSA {} ({:.3})", q.fat_percent_rounded(), q.tcsa_rounded(), q.fcsa_rounded(), q.fcsa_mm2));
    }
    outcome(pass, lines.join("; "))
}

fn otsu_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut spent = Duration::ZERO;
    for i in 0..200 {
        let mut counts = [0u64; 256];
        match i % 4 {
            0 => counts.iter_mut().for_each(|c| *c = rng.random_range(0..1000)),
            1 => {
                for _ in 0..rng.random_range(1..6) {
                    counts[rng.random_range(0..256)] += rng.random_range(1..5000);
                }
            }
            2 => {
                // two noisy modes, like muscle and fat
                let (m0, m1) = (rng.random_range(20..100), rng.random_range(140..240));
                for _ in 0..4096 {
                    let m = if rng.random_bool(0.7) { m0 } else { m1 };
                    counts[(m + rng.random_range(-20i32..=20)).clamp(0, 255) as usize] += 1;
                }
            }
            _ => {
                // a random 64×64 image
                for _ in 0..64 * 64 {
                    counts[rng.random_range(0..256)] += 1;
                }
            }
        }
        if counts.iter().all(|&c| c == 0) {
            counts[0] = 1;
        }
        let t0 = Instant::now();
        let got = raster::otsu_threshold(&Histogram256::from_counts(counts)).unwrap();
        spent += t0.elapsed();
        if got != common::otsu_exact(&counts) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0 && spent < Duration::from_secs(5), format!("{mismatches} mismatches / 200, {spent:?}"))
}

fn livewire_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut spent = Duration::ZERO;
    for i in 0..50 {
        let (w, h) = if i < 5 { (12, 12) } else { (rng.random_range(1..=12), rng.random_range(1..=12)) };
        let values = (0..w * h)
            .map(|_| if rng.random_bool(0.2) { 1.0 } else { rng.random::<f64>() })
            .collect();
        let costs = CostMap::new(w, h, values).unwrap();
        let a = Anchor::new(rng.random_range(0..w), rng.random_range(0..h));
        let b = Anchor::new(rng.random_range(0..w), rng.random_range(0..h));
        let t0 = Instant::now();
        let path = lowest_cost_path(&costs, a, b).unwrap();
        spent += t0.elapsed();
        let oracle = common::min_cost_bellman_ford(&costs, (a.x, a.y), (b.x, b.y));
        let exact = if w * h <= 12 { common::min_cost_enumerate(&costs, (a.x, a.y), (b.x, b.y)) } else { oracle };
        if costs.path_cost(&path) != oracle || oracle != exact || !path.is_connected() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0 && spent < Duration::from_secs(30), format!("{mismatches} mismatches / 50, {spent:?}"))
}

fn fragment_additivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut worst_rounded = 0.0f64;
    let mut cases = 0;
    while cases < 100 {
        let levels: Vec<u8> = (0..80 * 80).map(|_| rng.random()).collect();
        let img = GrayImage::new(80, 80, levels).unwrap();
        let c = (rng.random_range(10.0..70.0), rng.random_range(10.0..70.0));
        let n = rng.random_range(5..14);
        let poly: Vec<(i64, i64)> = (0..n)
            .map(|k| {
                let t = k as f64 / n as f64 * std::f64::consts::TAU;
                let r = rng.random_range(4.0..10.0);
                ((c.0 + r * t.cos()).round() as i64, (c.1 + r * t.sin()).round() as i64)
            })
            .collect();
        let mask = RegionMask::from_polygon(&poly);
        if mask.pixel_count() == 0 {
            continue;
        }
        let params = QuantParams::new(rng.random(), rng.random_range(0.0..=0.5)).unwrap();
        let centre = SpineCenter::manual(rng.random_range(0.0..80.0), rng.random_range(0.0..80.0));
        let Ok(f) = fragment(&img, &mask, &centre, &params, 6) else { continue };
        let total = quantify::quantify(&img, &mask, &params, Some(1.0)).unwrap().fat_percent;
        let parts = f.region_percents();
        worst = worst.max((parts.iter().sum::<f64>() - total).abs());
        let rounded: f64 = parts.iter().map(|&p| round_to(p, 1)).sum();
        worst_rounded = worst_rounded.max((rounded - round_to(total, 1)).abs());
        cases += 1;
    }
    // reported region values, rounded to one decimal, against their total
    let reported = [5.1, 3.8, 1.4, 0.9, 0.6, 0.4].iter().sum::<f64>();
    let rounded_gap = (reported - 12.1f64).abs();
    let pass = worst < 1e-9 && rounded_gap <= 0.3 + 1e-12 && worst_rounded <= 0.3 + 1e-9;
    outcome(
        pass,
        format!("max |ΣR - total| = {worst:.2e}; rounded gap max {worst_rounded:.2} over 100 cases; example {reported:.1} vs 12.1"),
    )
}

fn hog_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let perm = common::hog_flip_permutation();
    let mut worst = 0.0f64;
    let mut lengths_ok = true;
    for i in 0..50 {
        let patch = if i % 2 == 0 {
            GrayImage::new(50, 50, (0..2500).map(|_| rng.random()).collect()).unwrap()
        } else {
            // smooth structure with strong, varied orientations
            let (a, b, p) = (rng.random_range(0.05..0.5), rng.random_range(0.05..0.5), rng.random_range(0.0..6.0));
            common::image_from_fn(50, 50, |x, y| (128.0 + 100.0 * (a * x as f64 + b * (y as f64) * (y as f64) * 0.05 + p).sin()).round() as u8)
        };
        let h = spine::extract_hog(&patch).unwrap();
        let hf = spine::extract_hog(&patch.flip_horizontal()).unwrap();
        lengths_ok &= h.len() == 5625 && hf.len() == 5625;
        for (i, &j) in perm.iter().enumerate() {
            worst = worst.max((h.as_slice()[i] - hf.as_slice()[j]).abs());
        }
    }
    outcome(lengths_ok && worst <= 1e-9, format!("length 5625, max flip deviation {worst:.2e} over 50 patches"))
}

fn cord_phantoms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut within2, mut worst_x, mut worst_y, mut failures) = (0, 0.0f64, 0.0f64, 0);
    for i in 0..30u64 {
        let size = [512usize, 512, 448, 384, 640][i as usize % 5];
        let k = size as f64 / 512.0;
        let spec = PhantomSpec {
            size,
            column_center: (
                (256.0 + rng.random_range(-25.0..25.0)) * k,
                (235.0 + rng.random_range(-15.0..15.0)) * k,
            ),
            cord_radius: rng.random_range(5.0..8.0),
            noise: rng.random_range(3..10),
            streaks: rng.random_range(3..8),
            seed: 100 + i,
            ..PhantomSpec::default()
        };
        let p = synth::axial_phantom(&spec);
        match spine::detect_spine_center(&p.image, None) {
            Ok(c) => {
                let (dx, dy) = ((c.x - p.column_center.0).abs(), (c.y - p.column_center.1).abs());
                worst_x = worst_x.max(dx);
                worst_y = worst_y.max(dy);
                if dx <= 2.0 && dy <= 2.0 {
                    within2 += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let pass = failures == 0 && worst_x <= 7.0 && worst_y <= 15.0 && within2 >= 28;
    outcome(pass, format!("{within2}/30 within ±2 px, max |Δx| {worst_x:.2}, max |Δy| {worst_y:.2}, {failures} failed"))
}

fn column_patch(p: &synth::Phantom, dx: i64, dy: i64) -> Option<GrayImage> {
    let x0 = p.column_center.0.round() as i64 - 25 + dx;
    let y0 = p.column_center.1.round() as i64 - 25 + dy;
    if x0 < 0 || y0 < 0 {
        return None;
    }
    p.image.crop(x0 as usize, y0 as usize, 50, 50).ok()
}

fn column_phantom(seed: u64, rng: &mut ChaCha8Rng) -> synth::Phantom {
    synth::axial_phantom(&PhantomSpec {
        column_center: (256.0 + rng.random_range(-20.0..20.0), 235.0 + rng.random_range(-12.0..12.0)),
        seed,
        ..PhantomSpec::default()
    })
}

fn offset(rng: &mut ChaCha8Rng, reach: i64, min: i64) -> (i64, i64) {
    loop {
        let d = (rng.random_range(-reach..=reach), rng.random_range(-reach..=reach));
        if d.0.abs().max(d.1.abs()) >= min {
            return d;
        }
    }
}

/// Column patches (plus `jitter` shifted copies, since a stride-5 scan lands up
/// to 2 px off) against off-column crops, background and half-overlapping
/// windows on a dark frame.
fn training_set(seeds: std::ops::Range<u64>, jitter: usize, rng: &mut ChaCha8Rng) -> Vec<PatchSample> {
    let mut out = Vec::new();
    let mut push = |patch: GrayImage, label| out.push(PatchSample::new(patch, label).unwrap());
    for seed in seeds {
        let p = column_phantom(seed, rng);
        push(column_patch(&p, 0, 0).unwrap(), PatchLabel::Positive);
        for _ in 0..jitter {
            push(column_patch(&p, rng.random_range(-2..=2), rng.random_range(-2..=2)).unwrap(), PatchLabel::Positive);
        }
        for _ in 0..3 {
            let (dx, dy) = offset(rng, 60, 15);
            push(column_patch(&p, dx, dy).unwrap(), PatchLabel::Negative);
        }
        let bg = p.image.crop(rng.random_range(0..60), rng.random_range(0..60), 50, 50).unwrap();
        push(bg, PatchLabel::Negative);
        let frame = synth::embed_patch(160, &column_patch(&p, 0, 0).unwrap(), 55, 55, seed);
        for _ in 0..2 {
            let (dx, dy) = offset(rng, 30, 10);
            push(frame.crop((55 + dx) as usize, (55 + dy) as usize, 50, 50).unwrap(), PatchLabel::Negative);
        }
    }
    spine::augment_with_flips(&out)
}

/// Embeds each patch in a dark 512 frame at a random spot of the search
/// region and counts detections within one stride of its centre.
fn embedded_hits(patches: &[GrayImage], model: &spine::LinearSvmModel, rng: &mut ChaCha8Rng) -> usize {
    let mut hits = 0;
    for (i, patch) in patches.iter().enumerate() {
        let (x0, y0) = (rng.random_range(175..290), rng.random_range(135..325));
        let frame = synth::embed_patch(512, patch, x0, y0, 2000 + i as u64);
        if let Ok(c) = spine::locate_by_classifier(&frame, model) {
            if (c.x - (x0 as f64 + 24.5)).abs() <= 5.0 && (c.y - (y0 as f64 + 24.5)).abs() <= 5.0 {
                hits += 1;
            }
        }
    }
    hits
}

fn classifier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples = training_set(0..40, 2, &mut rng);
    let model = spine::train_svm(&samples, 1.0).unwrap();
    let correct = samples
        .iter()
        .filter(|s| model.predict(spine::extract_hog(s.patch()).unwrap().as_slice()) == s.label())
        .count();
    let train_acc = correct as f64 / samples.len() as f64;

    let trained: Vec<GrayImage> = samples
        .iter()
        .filter(|s| s.label() == PatchLabel::Positive)
        .step_by(4)
        .take(30)
        .map(|s| s.patch().clone())
        .collect();
    let hits = embedded_hits(&trained, &model, &mut rng);
    let held_out: Vec<GrayImage> =
        (1000..1030).map(|seed| column_patch(&column_phantom(seed, &mut rng), 0, 0).unwrap()).collect();
    let held_hits = embedded_hits(&held_out, &model, &mut rng);

    // the jittered positives sit within 2 px of each other, so folds are
    // scored on the unjittered, linearly separable set
    let separable = training_set(0..40, 0, &mut ChaCha8Rng::seed_from_u64(9));
    let cv = spine::cross_validate(&separable, 10, 1.0).unwrap();
    let cv_all = cv.fold_accuracies.iter().all(|&a| a == 1.0);
    let pass = train_acc == 1.0 && trained.len() == 30 && hits >= 29 && cv_all;
    outcome(
        pass,
        format!(
            "train accuracy {:.3} on {} samples, {hits}/30 embedded training patches within 5 px \
             (held-out {held_hits}/30), CV folds on {} separable samples {:?}",
            train_acc,
            samples.len(),
            separable.len(),
            cv.fold_accuracies
        ),
    )
}

fn sensitivity_band() -> Outcome {
    // reference-scale fixture: 25.8 % fat, TCSA 33 mm²
    let sweep = |fraction: f64| {
        let (img, poly) = synth::bimodal_region(60, fraction, 9);
        let mask = RegionMask::from_polygon(&poly);
        let psize = 33.0 / mask.pixel_count() as f64;
        let rows = quantify::sensitivity_report(&img, &mask, 120, Some(psize)).unwrap();
        let span = |v: Vec<f64>| v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min);
        (
            span(rows.iter().map(|r| r.fat_percent).collect()),
            span(rows.iter().map(|r| r.fcsa_mm2).collect()),
        )
    };
    let (fat_span, fcsa_span) = sweep(0.258);
    let others: Vec<String> = [0.1, 0.174, 0.4]
        .iter()
        .map(|&f| {
            let (a, b) = sweep(f);
            format!("{:.0}% fat: {a:.2}/{b:.2}", f * 100.0)
        })
        .collect();
    outcome(
        fat_span <= 2.5 && fcsa_span <= 3.0,
        format!("fat % span {fat_span:.2}, FCSA span {fcsa_span:.2} mm² (other fractions: {})", others.join(", ")),
    )
}

fn cli_api_equivalence() -> Outcome {
    use lumbarfat::api::cli::{analyze, AnalyzeArgs};
    use lumbarfat::api::session::Session;
    use lumbarfat::raster::SliceMeta;
    use lumbarfat::store::{MuscleLabel, RecordStore, TrainingPhase};

    let dir = tempfile::tempdir().unwrap();
    let p = synth::axial_phantom(&PhantomSpec { seed: 31, ..PhantomSpec::default() });
    let meta = SliceMeta {
        patient_id: "P02".into(),
        slice_label: "L3L4".into(),
        pixel_spacing_mm: Some([0.4, 0.4]),
        acquisition_tag: None,
    };
    let png = raster::encode_png(&p.image).unwrap();
    let run = || -> lumbarfat::Result<(String, String)> {
        let mut s = Session::open(&png, meta.clone())?;
        let step = p.es_left.len() / 6;
        for i in 0..6 {
            let (x, y) = p.es_left[i * step];
            s.add_anchor(x, y)?;
        }
        let stats = s.close()?;
        s.patch_params(&lumbarfat::api::session::ParamsPatch { softness: Some(0.1), threshold: Some(90), ..Default::default() })?;
        s.segment(Some(MuscleLabel::EsLeft), None, None)?;
        let mut api_store = RecordStore::open(dir.path().join("api.csv"))?;
        let api = s.export(&mut api_store, None, TrainingPhase::Post)?;

        let img_path = dir.path().join("slice.png");
        std::fs::write(&img_path, &png)?;
        std::fs::write(SliceMeta::sidecar_path(&img_path), serde_json::to_string(&meta)?)?;
        let mask_path = dir.path().join("mask.json");
        std::fs::write(&mask_path, serde_json::to_string(&stats.contour)?)?;
        analyze(&AnalyzeArgs {
            image: img_path,
            sidecar: None,
            mask: mask_path,
            threshold: Some(90),
            softness: 0.1,
            regions: Some(6),
            center: None,
            model: None,
            label: MuscleLabel::EsLeft,
            phase: TrainingPhase::Post,
            out_csv: dir.path().join("cli.csv"),
        })?;
        let cli = RecordStore::open(dir.path().join("cli.csv"))?.records()?[0].to_csv_row();
        Ok((api.csv_row, cli))
    };
    match run() {
        Ok((api, cli)) => {
            let strip = |row: &str| {
                let mut f: Vec<&str> = row.split(',').collect();
                f[4] = "";
                f.join(",")
            };
            let same = strip(&api) == strip(&cli);
            outcome(same, format!("rows {} modulo timestamp: {}", if same { "identical" } else { "differ" }, strip(&api)))
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("hard-rule-fixture", hard_rule_fixture),
        ("fcsa-reference-rows", reference_areas),
        ("otsu-oracle", otsu_oracle),
        ("livewire-oracle", livewire_oracle),
        ("fragment-additivity", fragment_additivity),
        ("hog-contract", hog_contract),
        ("spine-cord-phantoms", cord_phantoms),
        ("classifier-detection", classifier),
        ("sensitivity-band", sensitivity_band),
        ("cli-api-equivalence", cli_api_equivalence),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let started = Utc::now();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = run();
        println!("acceptance {name:<22} {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance finished in {} ms, {failed} failed", (Utc::now() - started).num_milliseconds());
    if failed > 0 {
        std::process::exit(1);
    }
}
