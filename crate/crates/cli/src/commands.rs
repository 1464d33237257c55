use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use pitchkin::analytics::aggregate::tables_from_samples;
use pitchkin::analytics::logistic::stream_seed;
use pitchkin::analytics::{aggregate_pitcher, impute_median, screen as run_screen, static_flags, validation_stats};
use pitchkin::analytics::{FeatureRegistry, PitcherProfile, RuleSet, Target, ValidationStats};
use pitchkin::handedness::{assign_roles, classify_handedness, handedness_signals, Handedness, HandednessError};
use pitchkin::ingest::{self, PitchSample, PitcherMeta, ReferenceRecord};
use pitchkin::lifting::{lift_sequence, LiftConfig, PredictorSpec};
use pitchkin::metrics::{compute_all, detect_events, DeliveryEvents, Event, MetricName, Unit};
use pitchkin::refine::{refine_pipeline, RefineReport, SkeletonConfig};
use pitchkin::synth::{cohort, corpus_config, corrupt, generate, CorruptConfig, GroundTruth, SynthConfig, SynthError};
use pitchkin::{PoseSequence, Space};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{fail, input_err, to_json, write_atomic, write_json, CliError, CliResult, ExitCode};
use crate::{
    Context, FeaturesArgs, HandArg, HandednessArgs, LiftArgs, MetricsArgs, RefineArgs, ScreenArgs, SynthArgs, TargetArg,
    ValidateArgs,
};

/// Ground truth as written by `synth`; the trajectory sits at the top level
/// so the file doubles as an oracle predictor source.
#[derive(Debug, Serialize, Deserialize)]
pub struct TruthFile {
    pub pitch_id: String,
    pub config: SynthConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<CorruptConfig>,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

/// Pitch id of a pose file: the name without `.jsonl` and any
/// `.rooted`/`.global`/`.refined` tag.
pub fn pose_id(path: &Path) -> String {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut id = name.strip_suffix(".jsonl").unwrap_or(&name);
    for tag in [".rooted", ".global", ".refined"] {
        if let Some(s) = id.strip_suffix(tag) {
            id = s;
            break;
        }
    }
    id.to_string()
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), ingest::IngestError>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(input_err("io"))?;
    Ok(buf)
}

/// Runs `f` on every input in parallel. Failures are logged and the first
/// one (in input order) is returned after all inputs have been tried.
fn for_each_input<T: Send>(inputs: &[PathBuf], f: impl Fn(&Path) -> CliResult<T> + Sync) -> CliResult<Vec<T>> {
    let results: Vec<CliResult<T>> = inputs.par_iter().map(|p| f(p)).collect();
    let failed = results.iter().filter(|r| r.is_err()).count();
    let mut out = Vec::with_capacity(results.len());
    let mut first = None;
    for (p, r) in inputs.iter().zip(results) {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                log::error!("{}: {e}", p.display());
                first.get_or_insert(e);
            }
        }
    }
    match first {
        Some(mut e) if inputs.len() > 1 => {
            e.source = e.source.context(format!("{failed} of {} inputs failed; first failure", inputs.len()));
            Err(e)
        }
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn synth_err(e: SynthError) -> CliError {
    input_err("synth")(e)
}

fn corruption(ctx: &Context, a: &SynthArgs) -> Option<CorruptConfig> {
    let mut c = ctx.cfg.corrupt;
    c.sigma = a.sigma.unwrap_or(c.sigma);
    c.outlier_rate = a.outlier_rate.unwrap_or(c.outlier_rate);
    c.bone_jitter = a.bone_jitter.unwrap_or(c.bone_jitter);
    (c.sigma > 0.0 || c.outlier_rate > 0.0 || c.bone_jitter > 0.0).then_some(c)
}

pub fn synth(ctx: &Context, a: &SynthArgs) -> CliResult<()> {
    if a.cohort {
        return synth_cohort(ctx, a);
    }
    let mut base = ctx.cfg.synth.clone();
    base.seed = ctx.seed;
    if let Some(f) = ctx.fps {
        base.fps = f;
    }
    if let Some(n) = a.frames {
        base.frames = n;
    }
    if let Some(k) = a.knee_fp {
        base.targets.knee_flexion_lead_fp = Some(k);
    }
    if let Some(t) = a.trunk_tilt_br {
        base.targets.trunk_forward_tilt_br = Some(t);
    }
    match a.handedness {
        HandArg::Right | HandArg::Alternate => base.handedness = Handedness::Right,
        HandArg::Left => base.handedness = Handedness::Left,
    }
    let noise = corruption(ctx, a);
    if let Some(c) = &noise {
        if !(c.sigma >= 0.0 && (0.0..=1.0).contains(&c.outlier_rate) && (0.0..1.0).contains(&c.bone_jitter)) {
            return Err(fail(ExitCode::Input, "synth", format!("invalid corruption settings {c:?}")));
        }
    }
    let width = (a.count.max(1) - 1).to_string().len().max(3);
    (0..a.count).into_par_iter().try_for_each(|i| {
        let mut cfg = if a.count == 1 { base.clone() } else { corpus_config(&base, i, a.knee_fp.is_some()) };
        if a.handedness != HandArg::Alternate {
            cfg.handedness = base.handedness;
        }
        let s = generate(&cfg).map_err(synth_err)?;
        let (global, rooted, used) = match noise {
            Some(mut c) => {
                c.seed = stream_seed(cfg.seed, 1);
                let g = corrupt(&s.global, &c);
                let r = g.to_pelvis_rooted();
                (g, r, Some(c))
            }
            None => (s.global, s.rooted, None),
        };
        let id = format!("{}_{i:0width$}", a.prefix);
        let pose = |seq: &PoseSequence| csv_bytes(|b| ingest::write_pose_jsonl(seq, b));
        write_atomic(&a.out.join(format!("{id}.global.jsonl")), &pose(&global)?)?;
        write_atomic(&a.out.join(format!("{id}.rooted.jsonl")), &pose(&rooted)?)?;
        let truth = TruthFile { pitch_id: id.clone(), config: cfg, corruption: used, truth: s.truth };
        write_json(&a.out.join(format!("{id}.truth.json")), &truth)
    })
}

fn synth_cohort(ctx: &Context, a: &SynthArgs) -> CliResult<()> {
    let mut cfg = ctx.cfg.cohort;
    cfg.seed = ctx.seed;
    if let Some(n) = a.pitchers {
        cfg.pitchers = n;
    }
    if cfg.pitchers < 2 || cfg.pitches_per_pitcher == 0 || !(0.0..1.0).contains(&cfg.positive_rate) {
        return Err(fail(ExitCode::Input, "synth", format!("invalid cohort settings {cfg:?}")));
    }
    let c = cohort(&cfg);
    let mut samples = Vec::new();
    for (pitcher, tables) in &c.tables {
        for (k, t) in tables.iter().enumerate() {
            let pitch_id = format!("{pitcher}_{k:02}");
            for m in MetricName::ALL {
                for e in Event::ALL {
                    let record = ReferenceRecord { pitch_id: pitch_id.clone(), metric: m, event: e, value: t.get(m, e) };
                    samples.push(PitchSample { pitcher_id: pitcher.clone(), record });
                }
            }
        }
    }
    write_atomic(&a.out.join("samples.csv"), &csv_bytes(|b| ingest::write_pitch_samples(b, &samples))?)?;
    write_atomic(&a.out.join("meta.csv"), &csv_bytes(|b| ingest::write_pitcher_meta(b, &c.metas))?)
}

fn load_pose(ctx: &Context, path: &Path) -> CliResult<PoseSequence> {
    ingest::load_pose_sequence(path, ctx.unit, ctx.input_fps()).map_err(|e| input_err("ingest")(anyhow::Error::new(e).context(path.display().to_string())))
}

/// Lifts pelvis-rooted input when a predictor is configured. `{id}` in an
/// oracle path is replaced by the pitch id.
fn maybe_lift(ctx: &Context, lift: &LiftArgs, id: &str, seq: PoseSequence) -> CliResult<PoseSequence> {
    let Some(spec) = lift.predictor.as_ref().or(ctx.cfg.lift.predictor.as_ref()) else { return Ok(seq) };
    if seq.space() != Space::PelvisRooted {
        log::warn!("{id}: input is already global, predictor ignored");
        return Ok(seq);
    }
    let spec = PredictorSpec::parse(&spec.replace("{id}", id)).map_err(input_err("lifting"))?;
    let cfg = LiftConfig { initial_anchor: spec.initial_anchor(), ..ctx.cfg.lift.lift_config() };
    lift_sequence(&seq, spec.predictor(), &cfg).map_err(input_err("lifting"))
}

pub fn refine(ctx: &Context, a: &RefineArgs) -> CliResult<()> {
    let mut rc = ctx.cfg.refine.clone();
    if let Some(p) = a.passes {
        rc.bone_passes = p;
    }
    if let Some(n) = a.ik_max_iter {
        rc.ik.max_iters = n;
    }
    rc.smoothing &= !a.no_smooth;
    rc.use_ik &= !a.no_ik;
    rc.despike |= a.despike;
    if let Some(p) = &a.skeleton {
        let text = std::fs::read_to_string(p).map_err(input_err("refine"))?;
        rc.skeleton = toml::from_str::<SkeletonConfig>(&text).map_err(input_err("refine"))?;
    }
    let reports: Vec<RefineReport> = for_each_input(&a.inputs, |path| {
        let id = pose_id(path);
        let seq = maybe_lift(ctx, &a.lift, &id, load_pose(ctx, path)?)?;
        let out = refine_pipeline(&seq, &rc).map_err(input_err("refine"))?;
        let pose = csv_bytes(|b| ingest::write_pose_jsonl(&out.sequence, b))?;
        write_atomic(&a.out.join(format!("{id}.refined.jsonl")), &pose)?;
        write_json(&a.out.join(format!("{id}.refine.json")), &out.report)?;
        Ok(out.report)
    })?;
    let stalled: usize = reports.iter().filter_map(|r| r.ik.as_ref()).map(|s| s.non_converged).sum();
    if stalled > 0 && a.strict {
        return Err(fail(ExitCode::NonConvergence, "refine", format!("IK stopped at the iteration cap on {stalled} frames")));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct HandednessEntry {
    file: String,
    side: Option<Handedness>,
    delta_ankle: f64,
    pelvis_angle: f64,
    agree: bool,
}

pub fn handedness(ctx: &Context, a: &HandednessArgs) -> CliResult<()> {
    let entries: Vec<HandednessEntry> = for_each_input(&a.inputs, |path| {
        let seq = load_pose(ctx, path)?;
        let file = path.display().to_string();
        match classify_handedness(&seq) {
            Ok(r) => Ok(HandednessEntry { file, side: Some(r.side), delta_ankle: r.delta_ankle, pelvis_angle: r.pelvis_angle, agree: true }),
            Err(HandednessError::Disagreement { .. }) => {
                let (delta_ankle, pelvis_angle) = handedness_signals(&seq).map_err(input_err("handedness"))?;
                Ok(HandednessEntry { file, side: None, delta_ankle, pelvis_angle, agree: false })
            }
            Err(e) => Err(input_err("handedness")(e)),
        }
    })?;
    match &a.out {
        Some(p) => write_json(p, &entries)?,
        None => print!("{}", String::from_utf8(to_json(&entries)).expect("JSON is UTF-8")),
    }
    let undecided = entries.iter().filter(|e| !e.agree).count();
    if undecided > 0 {
        return Err(fail(ExitCode::Validation, "handedness", format!("signals disagree on {undecided} file(s)")));
    }
    Ok(())
}

/// Reads event frames from an events file or from a synth truth file.
fn load_events(path: &Path) -> CliResult<DeliveryEvents> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum EventsFile {
        Plain(DeliveryEvents),
        Nested { events: DeliveryEvents },
    }
    let ctx_err = |e: anyhow::Error| input_err("ingest")(e.context(path.display().to_string()));
    let text = std::fs::read_to_string(path).map_err(|e| ctx_err(e.into()))?;
    match serde_json::from_str(&text).map_err(|e| ctx_err(e.into()))? {
        EventsFile::Plain(e) | EventsFile::Nested { events: e } => Ok(e),
    }
}

pub fn metrics(ctx: &Context, a: &MetricsArgs) -> CliResult<()> {
    for_each_input(&a.inputs, |path| {
        let id = pose_id(path);
        let seq = maybe_lift(ctx, &a.lift, &id, load_pose(ctx, path)?)?;
        let side = match a.handedness {
            Some(s) => s,
            None => classify_handedness(&seq)
                .map_err(|e| match e {
                    HandednessError::Disagreement { .. } => fail(ExitCode::Validation, "handedness", format!("{id}: {e}")),
                    e => input_err("handedness")(e),
                })?
                .side,
        };
        let roles = assign_roles(side);
        let events = match &a.events {
            Some(p) => load_events(Path::new(&p.replace("{id}", &id)))?,
            None => detect_events(&seq, &roles).map_err(input_err("metrics"))?,
        };
        let out = compute_all(&seq, &roles, &events, &ctx.cfg.metrics).map_err(input_err("metrics"))?;
        let t_ms: Vec<i64> = seq.frames().iter().map(|f| f.t_ms).collect();
        write_atomic(&a.out.join(format!("{id}.metrics.csv")), &csv_bytes(|b| ingest::write_metrics_csv(b, &out, &t_ms))?)?;
        write_json(&a.out.join(format!("{id}.events.json")), &out.events)?;
        let records: Vec<ReferenceRecord> = MetricName::ALL
            .iter()
            .flat_map(|&m| Event::ALL.map(|e| ReferenceRecord { pitch_id: id.clone(), metric: m, event: e, value: out.table.get(m, e) }))
            .collect();
        let samples = csv_bytes(|b| ingest::write_records(b, &records, a.pitcher.as_deref()))?;
        write_atomic(&a.out.join(format!("{id}.samples.csv")), &samples)
    })?;
    Ok(())
}

fn registry(ctx: &Context) -> CliResult<FeatureRegistry> {
    match &ctx.cfg.registry {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(input_err("analytics"))?;
            FeatureRegistry::from_toml(&text).map_err(input_err("analytics"))
        }
        None => Ok(FeatureRegistry::default()),
    }
}

fn rules(ctx: &Context) -> CliResult<RuleSet> {
    match &ctx.cfg.rules {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(input_err("analytics"))?;
            RuleSet::from_toml(&text).map_err(input_err("analytics"))
        }
        None => Ok(RuleSet::default()),
    }
}

/// Aggregated and imputed profiles, one per metadata row.
fn profiles(samples: &[PathBuf], meta: &Path, reg: &FeatureRegistry) -> CliResult<Vec<PitcherProfile>> {
    let mut all = Vec::new();
    for p in samples {
        all.extend(ingest::load_pitch_samples(p).map_err(|e| input_err("ingest")(anyhow::Error::new(e).context(p.display().to_string())))?);
    }
    let metas: Vec<PitcherMeta> = ingest::load_pitcher_meta(meta).map_err(input_err("ingest"))?;
    let tables = tables_from_samples(&all);
    let known: BTreeSet<&str> = metas.iter().map(|m| m.pitcher_id.as_str()).collect();
    if let Some(stray) = tables.keys().find(|k| !known.contains(k.as_str())) {
        return Err(fail(ExitCode::Input, "analytics", format!("samples reference pitcher {stray:?} missing from metadata")));
    }
    let mut out = metas
        .iter()
        .map(|m| {
            let t = tables.get(&m.pitcher_id).map(Vec::as_slice).unwrap_or(&[]);
            aggregate_pitcher(t, m, reg).map_err(|e| input_err("analytics")(anyhow::Error::new(e).context(m.pitcher_id.clone())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    impute_median(&mut out);
    Ok(out)
}

#[derive(Debug, Serialize)]
struct FeatureRow {
    pitcher_id: String,
    flags: Vec<String>,
    /// Registry indices filled by imputation.
    imputed: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct FeaturesReport {
    features: Vec<String>,
    pitchers: Vec<FeatureRow>,
}

pub fn features(ctx: &Context, a: &FeaturesArgs) -> CliResult<()> {
    let reg = registry(ctx)?;
    let rules = rules(ctx)?;
    let profiles = profiles(&a.samples, &a.meta, &reg)?;
    let pitchers = profiles
        .into_iter()
        .map(|p| {
            let flags = static_flags(&p, &reg, &rules.rules).map_err(input_err("analytics"))?;
            Ok(FeatureRow { pitcher_id: p.meta.pitcher_id, flags, imputed: p.absent, values: p.feature_vector })
        })
        .collect::<CliResult<_>>()?;
    write_json(&a.out, &FeaturesReport { features: reg.features.clone(), pitchers })
}

#[derive(Debug, Serialize)]
struct MetricValidation {
    metric: MetricName,
    unit: Unit,
    /// Event sampled, or `all` when events are pooled.
    event: String,
    #[serde(flatten)]
    stats: Option<ValidationStats>,
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    metrics: Vec<MetricValidation>,
    validated: usize,
    /// Reference entries with no measured counterpart.
    missing: usize,
    min_validated: usize,
    pass: bool,
}

fn load_reference(path: &Path) -> CliResult<Vec<ReferenceRecord>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).map_err(input_err("ingest"))?;
        let t: TruthFile = serde_json::from_str(&text).map_err(|e| input_err("ingest")(anyhow::Error::new(e).context(path.display().to_string())))?;
        Ok(t.truth.records(&t.pitch_id))
    } else {
        ingest::load_reference_table(path).map_err(|e| input_err("ingest")(anyhow::Error::new(e).context(path.display().to_string())))
    }
}

pub fn validate(_ctx: &Context, a: &ValidateArgs) -> CliResult<()> {
    let mut measured: BTreeMap<(String, MetricName, Event), f64> = BTreeMap::new();
    for p in &a.predicted {
        for r in load_reference(p)? {
            measured.insert((r.pitch_id, r.metric, r.event), r.value);
        }
    }
    let mut pairs: BTreeMap<MetricName, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut missing = 0;
    for p in &a.reference {
        for r in load_reference(p)? {
            if !a.all_events && r.event != r.metric.default_event() {
                continue;
            }
            match measured.get(&(r.pitch_id.clone(), r.metric, r.event)) {
                Some(&v) => {
                    let e = pairs.entry(r.metric).or_default();
                    e.0.push(v);
                    e.1.push(r.value);
                }
                None => missing += 1,
            }
        }
    }
    let metrics: Vec<MetricValidation> = MetricName::ALL
        .iter()
        .map(|&m| {
            let stats = pairs.get(&m).and_then(|(p, r)| validation_stats(p, r, m.is_positional()).ok());
            let event = if a.all_events { "all".to_string() } else { m.default_event().name().to_string() };
            MetricValidation { metric: m, unit: m.unit(), event, stats }
        })
        .collect();
    let validated = metrics.iter().filter(|m| m.stats.is_some_and(|s| s.validated)).count();
    let report = ValidateReport { metrics, validated, missing, min_validated: a.min_validated, pass: validated >= a.min_validated };
    write_json(&a.out, &report)?;
    if !report.pass {
        return Err(fail(ExitCode::Validation, "validate", format!("{validated} of 18 metrics validated, need {}", a.min_validated)));
    }
    Ok(())
}

pub fn screen(ctx: &Context, a: &ScreenArgs) -> CliResult<()> {
    let reg = registry(ctx)?;
    let rules = rules(ctx)?;
    let profiles = profiles(&a.samples, &a.meta, &reg)?;
    let mut cv = ctx.cfg.cv;
    cv.seed = ctx.seed;
    if let Some(l) = a.lambda {
        cv.lambda = l;
    }
    if let Some(k) = a.folds {
        cv.folds = k;
    }
    cv.smote &= !a.no_smote;
    let target = match a.target {
        TargetArg::Tj => Target::TommyJohn,
        TargetArg::Arm => Target::ArmInjury,
    };
    let report = run_screen(&profiles, &reg, &rules.rules, target, &cv).map_err(input_err("analytics"))?;
    write_json(&a.out, &report)?;
    if report.non_converged_folds > 0 {
        return Err(fail(ExitCode::NonConvergence, "analytics", format!("{} fold fits hit the iteration cap", report.non_converged_folds)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pose_ids_drop_tags() {
        assert_eq!(pose_id(Path::new("out/pitch_003.rooted.jsonl")), "pitch_003");
        assert_eq!(pose_id(Path::new("a.refined.jsonl")), "a");
        assert_eq!(pose_id(Path::new("b.jsonl")), "b");
        assert_eq!(pose_id(Path::new("c.txt")), "c.txt");
    }

    #[test]
    fn events_from_plain_and_nested_json() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("e.json");
        std::fs::write(&plain, r#"{"foot_plant": 10, "mer": 20, "ball_release": 25, "confidence_flags": []}"#).unwrap();
        let nested = dir.path().join("t.json");
        std::fs::write(&nested, r#"{"pitch_id": "x", "events": {"foot_plant": 1, "mer": 2, "ball_release": 3}}"#).unwrap();
        assert_eq!(load_events(&plain).unwrap().mer, 20);
        assert_eq!(load_events(&nested).unwrap().ball_release, 3);
    }
}
