use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use seacat_core::evaluation::{
    activity_signal, evaluate_images, score_activity, smooth_and_segment, DEFAULT_IOU_THRESHOLD,
    DEFAULT_SCORE_THRESHOLD, DEFAULT_WINDOW_S,
};
use seacat_core::geometry::Bbox;
use seacat_core::taxonomy::{supercategory_of, SupercategoryMap};
use seacat_core::{Detection, Frame, GroundTruth, Segment};
use serde::{Deserialize, Serialize};

use crate::config::Settings;
use crate::error::CliError;
use crate::{print_json, store, Io};

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Confusion matrix of detections against annotated boxes
    Boxes(BoxesArgs),
    /// Temporal overlap of detected activity against annotated segments
    Activity(ActivityArgs),
}

#[derive(Debug, Args)]
pub struct BoxesArgs {
    /// Detections CSV: frame_time_s,x,y,width,height,label,score
    #[arg(long)]
    pred: PathBuf,
    /// Annotations CSV with the same columns; score may be empty
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    /// Tab-separated label and root concepts; rolls labels up before printing
    #[arg(long)]
    rollup: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ActivityArgs {
    /// Per-frame detections CSV; a row with empty label and score marks a frame with none
    #[arg(long)]
    pred: PathBuf,
    /// Annotated segments CSV: start_s,end_s
    #[arg(long)]
    truth: PathBuf,
    /// Gap-closing window in seconds
    #[arg(long, default_value_t = DEFAULT_WINDOW_S)]
    window: f64,
    /// Minimum detection score for an active frame
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD)]
    threshold: f64,
    /// Video length in seconds; defaults to the span of the frames
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct DetectionRow {
    frame_time_s: f64,
    #[serde(default)]
    x: Option<f64>,
    #[serde(default)]
    y: Option<f64>,
    #[serde(default)]
    width: Option<f64>,
    #[serde(default)]
    height: Option<f64>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    score: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct SegmentRow {
    start_s: f64,
    end_s: f64,
}

fn read_rows<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, R)>, CliError> {
    let err = |e: csv::Error| {
        if e.is_io_error() {
            CliError::io(format!("{}: {e}", path.display()))
        } else {
            CliError::validation(format!("{}: {e}", path.display()))
        }
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(err)?;
    let mut rows = Vec::new();
    for (i, r) in reader.deserialize::<R>().enumerate() {
        rows.push((i as u64 + 2, r.map_err(err)?));
    }
    Ok(rows)
}

/// One row of a detections file: `None` for a bare frame marker.
fn detection(path: &Path, row: u64, r: DetectionRow, need_score: bool) -> Result<(f64, Option<Detection>), CliError> {
    let bad = |what: &str| CliError::validation(format!("{} row {row}: {what}", path.display()));
    if !r.frame_time_s.is_finite() {
        return Err(bad("frame_time_s must be finite"));
    }
    let label = r.label.filter(|l| !l.is_empty());
    let Some(label) = label else {
        if r.score.is_some() || r.x.is_some() {
            return Err(bad("a box needs a label"));
        }
        return Ok((r.frame_time_s, None));
    };
    let (Some(x), Some(y), Some(width), Some(height)) = (r.x, r.y, r.width, r.height) else {
        return Err(bad("x, y, width and height are required"));
    };
    if !(width > 0.0 && height > 0.0 && x.is_finite() && y.is_finite() && width.is_finite() && height.is_finite()) {
        return Err(bad("box must be finite with positive width and height"));
    }
    let score = match (r.score, need_score) {
        (Some(s), _) => s,
        (None, false) => 1.0,
        (None, true) => return Err(bad("score is required")),
    };
    Ok((r.frame_time_s, Some(Detection { bbox: Bbox { x, y, width, height }, label, score })))
}

/// Frame times keyed by their shortest round-trip decimal form.
fn frame_key(t: f64) -> String {
    format!("{t}")
}

fn detections_by_frame(path: &Path, need_score: bool) -> Result<BTreeMap<String, (f64, Vec<Detection>)>, CliError> {
    let mut frames: BTreeMap<String, (f64, Vec<Detection>)> = BTreeMap::new();
    for (row, r) in read_rows::<DetectionRow>(path)? {
        let (t, d) = detection(path, row, r, need_score)?;
        let entry = frames.entry(frame_key(t)).or_insert_with(|| (t, Vec::new()));
        entry.1.extend(d);
    }
    Ok(frames)
}

pub fn run(settings: &Settings, cmd: EvalCommand, io: &mut Io<'_>) -> Result<(), CliError> {
    match cmd {
        EvalCommand::Boxes(a) => boxes(settings, a, io),
        EvalCommand::Activity(a) => activity(a, io),
    }
}

fn boxes(settings: &Settings, a: BoxesArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let preds: HashMap<String, Vec<Detection>> =
        detections_by_frame(&a.pred, true)?.into_iter().map(|(k, (_, d))| (k, d)).collect();
    let truths: HashMap<String, Vec<GroundTruth>> = detections_by_frame(&a.truth, false)?
        .into_iter()
        .map(|(k, (_, d))| (k, d.into_iter().map(|d| GroundTruth { bbox: d.bbox, label: d.label }).collect()))
        .collect();
    let mut matrix = evaluate_images(&preds, &truths, a.iou)?;
    if let Some(path) = a.rollup {
        let tree = store::tree(settings)?;
        let map = SupercategoryMap::load_file(&path)?.validate(&tree)?;
        let mut names = HashMap::new();
        for label in matrix.labels() {
            let id = tree.resolve(label)?;
            let name = supercategory_of(&tree, &map, id)?.unwrap_or(label).to_string();
            names.insert(label.clone(), name);
        }
        matrix = matrix.rollup(|l| names[l].clone());
    }
    io.out.write_all(matrix.to_csv().as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct ActivityReport {
    frames: usize,
    active_frames: usize,
    duration: Option<f64>,
    segments: Vec<Segment>,
    iou: f64,
    intersection: f64,
    union: f64,
    event_recall: Option<f64>,
    effort_reduction: Option<f64>,
}

fn activity(a: ActivityArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let mut frames: Vec<Frame> = detections_by_frame(&a.pred, true)?
        .into_values()
        .map(|(time, detections)| Frame { time, detections })
        .collect();
    frames.sort_by(|x, y| x.time.total_cmp(&y.time));
    if frames.is_empty() {
        return Err(CliError::validation(format!("{}: no frames", a.pred.display())));
    }
    let truth = read_rows::<SegmentRow>(&a.truth)?
        .into_iter()
        .map(|(row, s)| {
            Segment::new(s.start_s, s.end_s)
                .map_err(|e| CliError::validation(format!("{} row {row}: {e}", a.truth.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let signal = activity_signal(&frames, a.threshold)?;
    let segments = smooth_and_segment(&signal, a.window)?;
    let span = frames[frames.len() - 1].time - frames[0].time;
    let duration = a.duration.or((span > 0.0).then_some(span));
    let score = score_activity(&segments, &truth, duration)?;
    print_json(
        io,
        &ActivityReport {
            frames: signal.len(),
            active_frames: signal.active().iter().filter(|&&x| x).count(),
            duration,
            segments,
            iou: score.iou,
            intersection: score.intersection,
            union: score.union,
            event_recall: score.event_recall,
            effort_reduction: score.effort_reduction,
        },
    )
}
