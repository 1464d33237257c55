//! Readers and writers for pose JSONL, metric tables and pitcher metadata.
//!
//! Pose JSONL holds one frame per line:
//! `{"t_ms": 12, "joints": [[x, y, z, c], ...17 entries in JointId order]}`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::metrics::registry::{Event, MetricName};
use crate::metrics::MetricsOutput;
use crate::pose::{Frame, Joint, PoseError, PoseSequence, Space, NUM_JOINTS};

pub const FEET_PER_METER: f64 = 3.28084;
pub const MIN_FPS: f64 = 30.0;
/// Pelvis distance under which a loaded file is treated as pelvis-rooted (file units).
pub const PELVIS_ROOTED_DETECT: f64 = 1e-6;

pub const NUM_WORKLOAD: usize = 24;

/// Workload feature names `w01..w24`, in registry order.
pub fn workload_names() -> Vec<String> {
    (1..=NUM_WORKLOAD).map(|i| format!("w{i:02}")).collect()
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema error at frame {frame}: {msg}")]
    Schema { frame: usize, msg: String },
    #[error("range error at frame {frame}: {msg}")]
    Range { frame: usize, msg: String },
    #[error("sequence has {0} frames, need at least 2")]
    Length(usize),
    #[error("fps {0} not supported (need finite fps >= 30)")]
    BadFps(f64),
    #[error("unknown metric {name:?} at line {line}")]
    UnknownMetric { line: usize, name: String },
    #[error("duplicate pitcher id {0:?}")]
    DuplicatePitcherId(String),
    #[error("invalid pose sequence: {0}")]
    Pose(#[from] PoseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthUnit {
    Feet,
    Meters,
}

impl LengthUnit {
    pub fn to_feet(self) -> f64 {
        match self {
            LengthUnit::Feet => 1.0,
            LengthUnit::Meters => FEET_PER_METER,
        }
    }
}

impl std::str::FromStr for LengthUnit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ft" | "feet" => Ok(LengthUnit::Feet),
            "m" | "meters" => Ok(LengthUnit::Meters),
            _ => Err(format!("unknown unit {s:?} (expected ft or m)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FrameLine {
    t_ms: i64,
    joints: Vec<Vec<f64>>,
}

pub fn load_pose_sequence(path: &Path, unit: LengthUnit, fps: f64) -> Result<PoseSequence, IngestError> {
    read_pose_jsonl(BufReader::new(File::open(path)?), unit, fps)
}

pub fn read_pose_jsonl<R: BufRead>(reader: R, unit: LengthUnit, fps: f64) -> Result<PoseSequence, IngestError> {
    if !(fps.is_finite() && fps >= MIN_FPS) {
        return Err(IngestError::BadFps(fps));
    }
    let scale = unit.to_feet();
    let mut frames = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: FrameLine = serde_json::from_str(&line)
            .map_err(|e| IngestError::Parse { line: lineno + 1, msg: e.to_string() })?;
        let frame = frames.len();
        if parsed.joints.len() != NUM_JOINTS {
            return Err(IngestError::Schema {
                frame,
                msg: format!("expected {NUM_JOINTS} joints, found {}", parsed.joints.len()),
            });
        }
        let mut joints = [Joint::default(); NUM_JOINTS];
        for (j, (dst, src)) in joints.iter_mut().zip(&parsed.joints).enumerate() {
            if src.len() != 4 {
                return Err(IngestError::Schema {
                    frame,
                    msg: format!("joint {j} has {} fields, expected [x, y, z, c]", src.len()),
                });
            }
            if src.iter().any(|v| !v.is_finite()) {
                return Err(IngestError::Range { frame, msg: format!("joint {j} has a non-finite value") });
            }
            if !(0.0..=1.0).contains(&src[3]) {
                return Err(IngestError::Range {
                    frame,
                    msg: format!("joint {j} confidence {} outside [0, 1]", src[3]),
                });
            }
            *dst = Joint { pos: Vec3::new(src[0], src[1], src[2]) * scale, c: src[3] };
        }
        frames.push(Frame { t_ms: parsed.t_ms, joints });
    }
    if frames.len() < 2 {
        return Err(IngestError::Length(frames.len()));
    }
    let rooted = frames.iter().all(|f| {
        let p = f.pos(crate::pose::JointId::Pelvis) / scale;
        p.x.abs() <= PELVIS_ROOTED_DETECT && p.y.abs() <= PELVIS_ROOTED_DETECT && p.z.abs() <= PELVIS_ROOTED_DETECT
    });
    if rooted {
        for f in frames.iter_mut() {
            let p = f.pos(crate::pose::JointId::Pelvis);
            if p != Vec3::zero() {
                *f = f.translated(-p);
                f.set_pos(crate::pose::JointId::Pelvis, Vec3::zero());
            }
        }
    }
    let space = if rooted { Space::PelvisRooted } else { Space::Global };
    Ok(PoseSequence::new(frames, fps, space)?)
}

/// Writes a sequence as pose JSONL in feet.
pub fn write_pose_jsonl<W: Write>(seq: &PoseSequence, mut w: W) -> Result<(), IngestError> {
    for f in seq.frames() {
        let line = FrameLine {
            t_ms: f.t_ms,
            joints: f.joints.iter().map(|j| vec![j.pos.x, j.pos.y, j.pos.z, j.c]).collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// One reference (or measured) metric value at a delivery event.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRecord {
    pub pitch_id: String,
    pub metric: MetricName,
    pub event: Event,
    pub value: f64,
}

/// A measured event-sampled metric tagged with the pitcher it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchSample {
    pub pitcher_id: String,
    pub record: ReferenceRecord,
}

#[derive(Debug, Deserialize)]
struct RecordRow {
    pitch_id: String,
    metric_name: String,
    event: String,
    value: f64,
    #[serde(default)]
    pitcher_id: Option<String>,
}

fn read_records<R: Read>(reader: R) -> Result<Vec<(ReferenceRecord, Option<String>)>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RecordRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| IngestError::Parse { line, msg: e.to_string() })?;
        let metric = row
            .metric_name
            .parse::<MetricName>()
            .map_err(|_| IngestError::UnknownMetric { line, name: row.metric_name.clone() })?;
        let event = row.event.parse::<Event>().map_err(|msg| IngestError::Parse { line, msg })?;
        if !row.value.is_finite() {
            return Err(IngestError::Parse { line, msg: "non-finite value".into() });
        }
        out.push((
            ReferenceRecord { pitch_id: row.pitch_id, metric, event, value: row.value },
            row.pitcher_id.filter(|s| !s.is_empty()),
        ));
    }
    Ok(out)
}

/// Reads `pitch_id,metric_name,event,value` rows; extra columns are ignored.
pub fn read_reference_table<R: Read>(reader: R) -> Result<Vec<ReferenceRecord>, IngestError> {
    Ok(read_records(reader)?.into_iter().map(|(r, _)| r).collect())
}

pub fn load_reference_table(path: &Path) -> Result<Vec<ReferenceRecord>, IngestError> {
    read_reference_table(File::open(path)?)
}

/// Reads the reference columns plus a mandatory `pitcher_id` column.
pub fn read_pitch_samples<R: Read>(reader: R) -> Result<Vec<PitchSample>, IngestError> {
    read_records(reader)?
        .into_iter()
        .enumerate()
        .map(|(i, (record, pid))| match pid {
            Some(pitcher_id) => Ok(PitchSample { pitcher_id, record }),
            None => Err(IngestError::Parse { line: i + 2, msg: "missing pitcher_id".into() }),
        })
        .collect()
}

pub fn load_pitch_samples(path: &Path) -> Result<Vec<PitchSample>, IngestError> {
    read_pitch_samples(File::open(path)?)
}

/// Writes records in the reference-table layout, with an optional trailing
/// `pitcher_id` column.
pub fn write_records<W: Write>(w: W, records: &[ReferenceRecord], pitcher_id: Option<&str>) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| IngestError::Io(io::Error::other(e));
    match pitcher_id {
        Some(_) => wtr.write_record(["pitch_id", "metric_name", "event", "value", "pitcher_id"]),
        None => wtr.write_record(["pitch_id", "metric_name", "event", "value"]),
    }
    .map_err(io_err)?;
    for r in records {
        let value = format!("{}", r.value);
        let mut row = vec![r.pitch_id.as_str(), r.metric.name(), r.event.name(), value.as_str()];
        if let Some(p) = pitcher_id {
            row.push(p);
        }
        wtr.write_record(&row).map_err(io_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes tagged samples with a `pitcher_id` column.
pub fn write_pitch_samples<W: Write>(w: W, samples: &[PitchSample]) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| IngestError::Io(io::Error::other(e));
    wtr.write_record(["pitch_id", "metric_name", "event", "value", "pitcher_id"]).map_err(io_err)?;
    for s in samples {
        let r = &s.record;
        let value = format!("{}", r.value);
        wtr.write_record([r.pitch_id.as_str(), r.metric.name(), r.event.name(), value.as_str(), s.pitcher_id.as_str()])
            .map_err(io_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-frame metrics table: `frame,t_ms`, the 18 metrics, then the
/// derivative columns.
pub fn write_metrics_csv<W: Write>(w: W, out: &MetricsOutput, t_ms: &[i64]) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| IngestError::Io(io::Error::other(e));
    let mut header = vec!["frame".to_string(), "t_ms".to_string()];
    header.extend(out.series.iter().chain(&out.derivatives).map(|s| s.name.clone()));
    wtr.write_record(&header).map_err(io_err)?;
    for (t, ms) in t_ms.iter().enumerate() {
        let mut row = vec![t.to_string(), ms.to_string()];
        row.extend(out.series.iter().chain(&out.derivatives).map(|s| format!("{}", s.values[t])));
        wtr.write_record(&row).map_err(io_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-pitcher metadata: demographics, workload, history and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitcherMeta {
    pub pitcher_id: String,
    pub age: f64,
    pub prior_tj: bool,
    pub prior_injuries: u32,
    pub il_years: u32,
    /// Workload features keyed `w01..w24`; absent entries are `None`.
    pub workload: BTreeMap<String, Option<f64>>,
    pub n_pitches: u32,
    pub label_tj: bool,
    pub label_arm_injury: bool,
}

impl PitcherMeta {
    pub fn present_workload(&self) -> usize {
        self.workload.values().filter(|v| v.is_some()).count()
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

pub fn read_pitcher_meta<R: Read>(reader: R) -> Result<Vec<PitcherMeta>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| IngestError::Parse { line: 1, msg: e.to_string() })?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = ["pitcher_id", "age", "prior_tj", "prior_injuries", "il_years", "n_pitches", "label_tj", "label_arm_injury"];
    let mut idx = BTreeMap::new();
    for name in required {
        let c = col(name).ok_or_else(|| IngestError::Parse { line: 1, msg: format!("missing column {name}") })?;
        idx.insert(name, c);
    }
    let wnames = workload_names();
    let wcols: Vec<Option<usize>> = wnames.iter().map(|n| col(n)).collect();

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| IngestError::Parse { line, msg: e.to_string() })?;
        let field = |name: &str| rec.get(idx[name]).unwrap_or("");
        let perr = |name: &str| IngestError::Parse { line, msg: format!("bad value for {name}: {:?}", field(name)) };
        let count = |name: &str| field(name).parse::<u32>().map_err(|_| perr(name));
        let flag = |name: &str| parse_bool(field(name)).ok_or_else(|| perr(name));

        let pitcher_id = field("pitcher_id").to_string();
        if !seen.insert(pitcher_id.clone()) {
            return Err(IngestError::DuplicatePitcherId(pitcher_id));
        }
        let age: f64 = field("age").parse().map_err(|_| perr("age"))?;
        if !age.is_finite() || age < 0.0 {
            return Err(perr("age"));
        }
        let mut workload = BTreeMap::new();
        for (name, c) in wnames.iter().zip(&wcols) {
            let raw = c.and_then(|c| rec.get(c)).unwrap_or("");
            let v = if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
                None
            } else {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| IngestError::Parse { line, msg: format!("bad value for {name}: {raw:?}") })?;
                v.is_finite().then_some(v)
            };
            workload.insert(name.clone(), v);
        }
        out.push(PitcherMeta {
            pitcher_id,
            age,
            prior_tj: flag("prior_tj")?,
            prior_injuries: count("prior_injuries")?,
            il_years: count("il_years")?,
            workload,
            n_pitches: count("n_pitches")?,
            label_tj: flag("label_tj")?,
            label_arm_injury: flag("label_arm_injury")?,
        });
    }
    Ok(out)
}

pub fn load_pitcher_meta(path: &Path) -> Result<Vec<PitcherMeta>, IngestError> {
    read_pitcher_meta(File::open(path)?)
}

pub fn write_pitcher_meta<W: Write>(w: W, metas: &[PitcherMeta]) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| IngestError::Io(io::Error::other(e));
    let mut header: Vec<String> = ["pitcher_id", "age", "prior_tj", "prior_injuries", "il_years", "n_pitches", "label_tj", "label_arm_injury"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(workload_names());
    wtr.write_record(&header).map_err(io_err)?;
    for m in metas {
        let b = |v: bool| if v { "1".to_string() } else { "0".to_string() };
        let mut row = vec![
            m.pitcher_id.clone(),
            format!("{}", m.age),
            b(m.prior_tj),
            m.prior_injuries.to_string(),
            m.il_years.to_string(),
            m.n_pitches.to_string(),
            b(m.label_tj),
            b(m.label_arm_injury),
        ];
        for name in workload_names() {
            row.push(m.workload.get(&name).copied().flatten().map(|v| format!("{v}")).unwrap_or_default());
        }
        wtr.write_record(&row).map_err(io_err)?;
    }
    wtr.flush()?;
    Ok(())
}
