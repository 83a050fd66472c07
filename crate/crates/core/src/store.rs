//! Append-only analysis record store.
//!
//! Records go to a CSV file with a fixed column order; each record's contour
//! is written once to `contours/<ref>.json` next to the CSV, where `<ref>`
//! is a hash of the contour. A second hash over the whole row rejects
//! re-appending an identical record.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fragment::{FragmentResult, Side};
use crate::livewire::{contour_from_json, contour_to_json};
use crate::quantify::QuantResult;
use crate::{round_to, Error, Result};

pub const CSV_HEADER: [&str; 17] = [
    "patient_id",
    "slice_label",
    "muscle_label",
    "training_phase",
    "timestamp",
    "threshold",
    "softness",
    "fat_percent",
    "tcsa_mm2",
    "fcsa_mm2",
    "r1_percent",
    "r2_percent",
    "r3_percent",
    "r4_percent",
    "r5_percent",
    "r6_percent",
    "contour_ref",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MuscleLabel {
    #[serde(rename = "ES-left")]
    EsLeft,
    #[serde(rename = "ES-right")]
    EsRight,
    #[serde(rename = "LMM-left")]
    LmmLeft,
    #[serde(rename = "LMM-right")]
    LmmRight,
    #[serde(rename = "Psoas-left")]
    PsoasLeft,
    #[serde(rename = "Psoas-right")]
    PsoasRight,
}

impl MuscleLabel {
    pub const ALL: [MuscleLabel; 6] = [
        MuscleLabel::EsLeft,
        MuscleLabel::EsRight,
        MuscleLabel::LmmLeft,
        MuscleLabel::LmmRight,
        MuscleLabel::PsoasLeft,
        MuscleLabel::PsoasRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MuscleLabel::EsLeft => "ES-left",
            MuscleLabel::EsRight => "ES-right",
            MuscleLabel::LmmLeft => "LMM-left",
            MuscleLabel::LmmRight => "LMM-right",
            MuscleLabel::PsoasLeft => "Psoas-left",
            MuscleLabel::PsoasRight => "Psoas-right",
        }
    }

    /// Only erector spinae masks are fragmented.
    pub fn is_erector_spinae(self) -> bool {
        matches!(self, MuscleLabel::EsLeft | MuscleLabel::EsRight)
    }

    pub fn side(self) -> Side {
        match self {
            MuscleLabel::EsLeft | MuscleLabel::LmmLeft | MuscleLabel::PsoasLeft => Side::Left,
            _ => Side::Right,
        }
    }
}

impl fmt::Display for MuscleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MuscleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MuscleLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown muscle label {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingPhase {
    Pre,
    Post,
    #[default]
    Unspecified,
}

impl TrainingPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainingPhase::Pre => "pre",
            TrainingPhase::Post => "post",
            TrainingPhase::Unspecified => "unspecified",
        }
    }
}

impl FromStr for TrainingPhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pre" => Ok(TrainingPhase::Pre),
            "post" => Ok(TrainingPhase::Post),
            "unspecified" | "" => Ok(TrainingPhase::Unspecified),
            _ => Err(Error::validation(format!("unknown training phase {s:?}"))),
        }
    }
}

/// One exported analysis, holding the values at export precision:
/// fat percentages to one decimal and areas in whole mm².
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRecord {
    pub patient_id: String,
    pub slice_label: String,
    pub muscle_label: MuscleLabel,
    pub training_phase: TrainingPhase,
    pub timestamp: DateTime<Utc>,
    pub threshold: u8,
    pub softness: f64,
    pub fat_percent: f64,
    pub tcsa_mm2: i64,
    pub fcsa_mm2: i64,
    pub regions: Option<[f64; 6]>,
    pub contour: Vec<(i64, i64)>,
}

impl AnalysisRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn from_results(
        patient_id: &str,
        slice_label: &str,
        muscle_label: MuscleLabel,
        training_phase: TrainingPhase,
        timestamp: DateTime<Utc>,
        quant: &QuantResult,
        fragments: Option<&FragmentResult>,
        contour: &[(i64, i64)],
    ) -> Result<Self> {
        let regions = match fragments {
            None => None,
            Some(f) => {
                let values: Vec<f64> = f.region_percents().iter().map(|&p| round_to(p, 1)).collect();
                Some(<[f64; 6]>::try_from(values).map_err(|v| {
                    Error::validation(format!("records hold six regions, got {}", v.len()))
                })?)
            }
        };
        let record = Self {
            patient_id: patient_id.to_string(),
            slice_label: slice_label.to_string(),
            muscle_label,
            training_phase,
            timestamp: truncate_millis(timestamp),
            threshold: quant.threshold,
            softness: quant.softness,
            fat_percent: quant.fat_percent_rounded(),
            tcsa_mm2: quant.tcsa_rounded(),
            fcsa_mm2: quant.fcsa_rounded(),
            regions,
            contour: contour.to_vec(),
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if self.patient_id.trim().is_empty() {
            return Err(Error::validation("patient_id must be non-empty"));
        }
        if !(0.0..=100.0).contains(&self.fat_percent) {
            return Err(Error::validation("fat_percent must lie in [0, 100]"));
        }
        if self.fcsa_mm2 > self.tcsa_mm2 || self.fcsa_mm2 < 0 {
            return Err(Error::validation("FCSA must lie in [0, TCSA]"));
        }
        if self.regions.is_some() && !self.muscle_label.is_erector_spinae() {
            return Err(Error::validation("region values are only recorded for ES muscles"));
        }
        Ok(())
    }

    /// Hash of the contour, naming its sidecar file.
    pub fn contour_ref(&self) -> String {
        short_hash(contour_to_json(&self.contour).as_bytes())
    }

    /// CSV fields in [`CSV_HEADER`] order.
    pub fn to_fields(&self) -> Vec<String> {
        let mut f = vec![
            self.patient_id.clone(),
            self.slice_label.clone(),
            self.muscle_label.to_string(),
            self.training_phase.as_str().to_string(),
            self.timestamp.to_rfc3339_opts(SecondsFormat::Millis, true),
            self.threshold.to_string(),
            self.softness.to_string(),
            self.fat_percent.to_string(),
            self.tcsa_mm2.to_string(),
            self.fcsa_mm2.to_string(),
        ];
        match &self.regions {
            Some(r) => f.extend(r.iter().map(|v| v.to_string())),
            None => f.extend(std::iter::repeat_n(String::new(), 6)),
        }
        f.push(self.contour_ref());
        f
    }

    /// One CSV line (no trailing newline), quoted as the store writes it.
    pub fn to_csv_row(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.to_fields()).expect("in-memory write");
        let bytes = w.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("utf-8 fields").trim_end().to_string()
    }

    /// Inverse of [`to_fields`](Self::to_fields); the contour comes from its sidecar.
    pub fn from_fields(fields: &[String], contour: Vec<(i64, i64)>) -> Result<Self> {
        if fields.len() != CSV_HEADER.len() {
            return Err(Error::Serialization(format!(
                "expected {} columns, found {}",
                CSV_HEADER.len(),
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Serialization(format!("{}: bad number {:?}", CSV_HEADER[i], fields[i])))
        };
        let int = |i: usize| -> Result<i64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Serialization(format!("{}: bad integer {:?}", CSV_HEADER[i], fields[i])))
        };
        let regions = if fields[10..16].iter().all(|s| s.is_empty()) {
            None
        } else {
            let mut r = [0.0; 6];
            for (k, slot) in r.iter_mut().enumerate() {
                *slot = num(10 + k)?;
            }
            Some(r)
        };
        let timestamp = DateTime::parse_from_rfc3339(&fields[4])
            .map_err(|e| Error::Serialization(format!("timestamp: {e}")))?
            .with_timezone(&Utc);
        let record = Self {
            patient_id: fields[0].clone(),
            slice_label: fields[1].clone(),
            muscle_label: fields[2].parse()?,
            training_phase: fields[3].parse()?,
            timestamp,
            threshold: u8::try_from(int(5)?)
                .map_err(|_| Error::Serialization("threshold out of range".into()))?,
            softness: num(6)?,
            fat_percent: num(7)?,
            tcsa_mm2: int(8)?,
            fcsa_mm2: int(9)?,
            regions,
            contour,
        };
        if record.contour_ref() != fields[16] {
            return Err(Error::Serialization(format!(
                "contour sidecar does not match reference {}",
                fields[16]
            )));
        }
        Ok(record)
    }

    /// Identity used for duplicate detection.
    pub fn content_hash(&self) -> String {
        short_hash(self.to_fields().join("\u{1f}").as_bytes())
    }
}

fn truncate_millis(t: DateTime<Utc>) -> DateTime<Utc> {
    DateTime::from_timestamp_millis(t.timestamp_millis()).unwrap_or(t)
}

fn short_hash(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..12])
}

/// Single-writer append-only store rooted at a CSV path.
#[derive(Debug)]
pub struct RecordStore {
    csv_path: PathBuf,
    contour_dir: PathBuf,
    hashes: HashSet<String>,
    count: usize,
}

impl RecordStore {
    /// Open or create the store; the contour directory sits next to the CSV.
    pub fn open(csv_path: impl AsRef<Path>) -> Result<Self> {
        let csv_path = csv_path.as_ref().to_path_buf();
        let parent = csv_path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();
        fs::create_dir_all(&parent)?;
        let contour_dir = parent.join("contours");
        fs::create_dir_all(&contour_dir)?;
        if !csv_path.exists() || fs::metadata(&csv_path)?.len() == 0 {
            let mut w = csv::Writer::from_path(&csv_path)?;
            w.write_record(CSV_HEADER)?;
            w.flush()?;
        }
        let mut store = Self {
            csv_path,
            contour_dir,
            hashes: HashSet::new(),
            count: 0,
        };
        for record in store.records()? {
            store.hashes.insert(record.content_hash());
            store.count += 1;
        }
        Ok(store)
    }

    pub fn csv_path(&self) -> &Path {
        &self.csv_path
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Append `record`, returning its id (the content hash).
    pub fn append(&mut self, record: &AnalysisRecord) -> Result<String> {
        record.validate()?;
        let id = record.content_hash();
        if self.hashes.contains(&id) {
            return Err(Error::Duplicate(id));
        }
        let contour_path = self.contour_dir.join(format!("{}.json", record.contour_ref()));
        if !contour_path.exists() {
            fs::write(&contour_path, contour_to_json(&record.contour))?;
        }
        let mut file = OpenOptions::new().append(true).open(&self.csv_path)?;
        let mut line = record.to_csv_row();
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        self.hashes.insert(id.clone());
        self.count += 1;
        Ok(id)
    }

    /// All stored records in append order.
    pub fn records(&self) -> Result<Vec<AnalysisRecord>> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(File::open(&self.csv_path)?);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Serialization(format!(
                "unexpected CSV header in {}",
                self.csv_path.display()
            )));
        }
        let mut out = Vec::new();
        for row in reader.records() {
            let fields: Vec<String> = row?.iter().map(str::to_string).collect();
            let reference = fields.get(16).cloned().unwrap_or_default();
            let contour_text = fs::read_to_string(self.contour_dir.join(format!("{reference}.json")))?;
            out.push(AnalysisRecord::from_fields(&fields, contour_from_json(&contour_text)?)?);
        }
        Ok(out)
    }

    pub fn compare_phases(&self, patient_id: &str) -> Result<PhaseComparison> {
        Ok(compare_phases(&self.records()?, patient_id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub slice_label: String,
    pub side: Side,
    pub muscle_label: MuscleLabel,
    pub total_pre: f64,
    pub total_post: f64,
    pub regions_pre: Option<[f64; 6]>,
    pub regions_post: Option<[f64; 6]>,
}

impl ComparisonRow {
    /// Post minus pre total fat, at one decimal.
    pub fn total_delta(&self) -> f64 {
        round_to(self.total_post - self.total_pre, 1)
    }

    pub fn region_deltas(&self) -> Option<[f64; 6]> {
        let (pre, post) = (self.regions_pre?, self.regions_post?);
        Some(std::array::from_fn(|k| round_to(post[k] - pre[k], 1)))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PhaseComparison {
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

/// Join a patient's pre and post records on (slice, side, muscle). The most
/// recent record of each phase is used; incomplete pairs become warnings.
pub fn compare_phases(records: &[AnalysisRecord], patient_id: &str) -> PhaseComparison {
    type Key = (String, MuscleLabel);
    let mut pairs: BTreeMap<Key, (Option<&AnalysisRecord>, Option<&AnalysisRecord>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.patient_id == patient_id) {
        let slot = pairs.entry((r.slice_label.clone(), r.muscle_label)).or_default();
        let target = match r.training_phase {
            TrainingPhase::Pre => &mut slot.0,
            TrainingPhase::Post => &mut slot.1,
            TrainingPhase::Unspecified => continue,
        };
        if target.is_none_or(|t| t.timestamp <= r.timestamp) {
            *target = Some(r);
        }
    }
    let mut out = PhaseComparison::default();
    for ((slice, muscle), pair) in pairs {
        match pair {
            (Some(pre), Some(post)) => out.rows.push(ComparisonRow {
                slice_label: slice,
                side: muscle.side(),
                muscle_label: muscle,
                total_pre: pre.fat_percent,
                total_post: post.fat_percent,
                regions_pre: pre.regions,
                regions_post: post.regions,
            }),
            (pre, _) => {
                let missing = if pre.is_some() { "post" } else { "pre" };
                out.warnings
                    .push(format!("{slice} {muscle}: no {missing}-training record"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn record(phase: TrainingPhase, fat: f64, regions: Option<[f64; 6]>) -> AnalysisRecord {
        AnalysisRecord {
            patient_id: "P07".into(),
            slice_label: "L5S1".into(),
            muscle_label: MuscleLabel::EsRight,
            training_phase: phase,
            timestamp: Utc.with_ymd_and_hms(2026, 3, 1, 9, 30, 0).unwrap(),
            threshold: 70,
            softness: 0.2,
            fat_percent: fat,
            tcsa_mm2: 33,
            fcsa_mm2: 24,
            regions,
            contour: vec![(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)],
        }
    }

    #[test]
    fn append_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = RecordStore::open(dir.path().join("results.csv")).unwrap();
        let r = record(TrainingPhase::Pre, 18.3, Some([5.1, 3.8, 1.4, 0.9, 0.6, 0.4]));
        store.append(&r).unwrap();
        assert_eq!(store.records().unwrap(), vec![r.clone()]);
        assert!(matches!(store.append(&r), Err(Error::Duplicate(_))));
        assert_eq!(store.len(), 1);

        // reopening sees the same content and still rejects the duplicate
        let mut again = RecordStore::open(dir.path().join("results.csv")).unwrap();
        assert_eq!(again.len(), 1);
        assert!(matches!(again.append(&r), Err(Error::Duplicate(_))));
    }

    #[test]
    fn header_and_column_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.csv");
        let mut store = RecordStore::open(&path).unwrap();
        store.append(&record(TrainingPhase::Post, 10.1, None)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row = lines.next().unwrap();
        assert!(row.starts_with("P07,L5S1,ES-right,post,2026-03-01T09:30:00.000Z,70,0.2,10.1,33,24,,,,,,,"));
    }

    #[test]
    fn muscle_vocabulary() {
        assert!("Quadriceps".parse::<MuscleLabel>().is_err());
        for l in MuscleLabel::ALL {
            assert_eq!(l.as_str().parse::<MuscleLabel>().unwrap(), l);
        }
        let bad = AnalysisRecord {
            muscle_label: MuscleLabel::LmmLeft,
            ..record(TrainingPhase::Pre, 10.0, Some([1.0; 6]))
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn phase_comparison() {
        let pre = record(TrainingPhase::Pre, 18.3, None);
        let post = AnalysisRecord {
            timestamp: pre.timestamp + chrono::Duration::days(60),
            ..record(TrainingPhase::Post, 10.1, None)
        };
        let cmp = compare_phases(&[pre.clone(), post], "P07");
        assert_eq!(cmp.rows.len(), 1);
        assert_eq!(cmp.rows[0].total_delta(), -8.2);
        assert_eq!(cmp.rows[0].total_pre, 18.3);
        assert_eq!(cmp.rows[0].side, Side::Right);

        let cmp = compare_phases(std::slice::from_ref(&pre), "P07");
        assert!(cmp.rows.is_empty());
        assert_eq!(cmp.warnings.len(), 1);

        let same = AnalysisRecord {
            training_phase: TrainingPhase::Post,
            ..pre.clone()
        };
        let pre = AnalysisRecord {
            regions: Some([2.0; 6]),
            ..pre
        };
        let same = AnalysisRecord {
            regions: Some([2.0; 6]),
            ..same
        };
        let cmp = compare_phases(&[pre, same], "P07");
        assert_eq!(cmp.rows[0].total_delta(), 0.0);
        assert_eq!(cmp.rows[0].region_deltas(), Some([0.0; 6]));
        assert!(compare_phases(&[], "P07").rows.is_empty());
    }
}
