//! Scenario harness: loads a flat key=value scenario config (or one of
//! the built-in scenarios), steps the ego along the road, runs the
//! requested detectors per frame and scores them against the ground-truth
//! oracle.
//!
//! Scoring uses knowledge detectors never see: every sensed point carries
//! the boundary that generated it, and the ego lane determines which
//! boundary each detected line is supposed to represent.

use crate::aldm::{detect_lanes, AldmParams, LaneSet, PoolPoint, Role, TracedLine};
use crate::baseline::{detect_baseline, BaselineSelection};
use crate::road::{
    build_road, ground_truth_centerline, EgoPose, GroundTruthCenterline, Marking, RoadError,
    RoadGeometry, RoadSpec, Segment,
};
use crate::sensor::{sense, LineObject, SensorCloud, SensorConfig, SensorError};
use crate::trajectory::{compute_trajectory, Trajectory};
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Road(#[from] RoadError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
}

/// Ego trajectory along the road: either an arithmetic sweep of stations
/// (lane-relative lateral placement) or explicit poses.
#[derive(Debug, Clone)]
pub enum EgoPath {
    Sweep {
        start_s: f64,
        step_s: f64,
        count: usize,
    },
    Poses(Vec<EgoPose>),
}

/// A complete runnable scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub road: RoadSpec,
    /// Lane the ego drives on, 0 = rightmost. Determines the expected
    /// boundary of every detected line.
    pub ego_lane: usize,
    /// Lateral offset within the lane (+ left), used by sweep paths.
    pub ego_lane_offset: f64,
    pub ego_heading_offset: f64,
    pub ego_path: EgoPath,
    pub sensor: SensorConfig,
    pub aldm: AldmParams,
    pub run_baseline: bool,
    pub run_aldm: bool,
    /// Ground-truth preview distance for trajectory scoring, meters.
    pub gt_preview: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.road
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.sensor
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.aldm
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if self.ego_lane >= self.road.lane_count {
            return Err(ScenarioError::Invalid(format!(
                "ego.lane {} out of range for {} lanes",
                self.ego_lane, self.road.lane_count
            )));
        }
        let count = match &self.ego_path {
            EgoPath::Sweep { count, .. } => *count,
            EgoPath::Poses(p) => p.len(),
        };
        if count == 0 {
            return Err(ScenarioError::Invalid("ego path needs >= 1 frame".into()));
        }
        if !(self.gt_preview > 0.0) {
            return Err(ScenarioError::Invalid("gt_preview must be positive".into()));
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        match &self.ego_path {
            EgoPath::Sweep { count, .. } => *count,
            EgoPath::Poses(p) => p.len(),
        }
    }

    fn pose(&self, geom: &RoadGeometry, frame: usize) -> EgoPose {
        match &self.ego_path {
            EgoPath::Sweep {
                start_s, step_s, ..
            } => EgoPose {
                s: start_s + step_s * frame as f64,
                lateral_offset: geom.lane_center_offset(self.ego_lane) + self.ego_lane_offset,
                heading_offset: self.ego_heading_offset,
            },
            EgoPath::Poses(p) => p[frame],
        }
    }

    /// Boundary index a line of the given role should trace, given the
    /// ego lane. None when that lane does not exist on this road.
    pub fn expected_boundary(&self, role: Role) -> Option<usize> {
        let lane = self.ego_lane;
        match role {
            Role::EgoRight => Some(lane),
            Role::EgoLeft => Some(lane + 1),
            Role::AdjacentRight => lane.checked_sub(1),
            Role::AdjacentLeft => {
                if lane + 2 <= self.road.lane_count {
                    Some(lane + 2)
                } else {
                    None
                }
            }
        }
    }
}

// ---------------------------------------------------------------------
// built-in scenarios
// ---------------------------------------------------------------------

pub const BUILTIN_NAMES: [&str; 3] = ["worst_case", "straight_3lane", "fig3_simple"];

pub fn builtin_descriptions() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "worst_case",
            "tightest allowed right curve (R=500), ego at the leftmost in-lane \
             position, dash phase placing the nearest dash just outside the FOV",
        ),
        (
            "straight_3lane",
            "straight 3-lane road, ego centered on the middle lane; exercises \
             adjacent-lane detection (4 guiding lines)",
        ),
        (
            "fig3_simple",
            "editor-style road: markings delivered as one object per boundary \
             (merge mode); the baseline detector works here",
        ),
    ]
}

/// Built-in named scenario, or None for an unknown name.
pub fn builtin(name: &str) -> Option<Scenario> {
    let dashed = |phase: f64| Marking::Dashed {
        dash_len: 6.0,
        gap_len: 12.0,
        phase,
    };
    match name {
        "worst_case" => Some(Scenario {
            name: "worst_case".into(),
            road: RoadSpec {
                segments: vec![Segment::Arc {
                    radius: 500.0,
                    sweep: -0.5,
                }],
                lane_count: 1,
                lane_width: 3.75,
                markings: vec![Marking::Continuous, dashed(17.5)],
            },
            ego_lane: 0,
            // leftmost in-lane position for a 1.85 m wide vehicle
            ego_lane_offset: 0.95,
            ego_heading_offset: 0.0,
            ego_path: EgoPath::Sweep {
                start_s: 0.0,
                step_s: 4.0,
                count: 6,
            },
            sensor: SensorConfig::default(),
            aldm: AldmParams::default(),
            run_baseline: true,
            run_aldm: true,
            gt_preview: 200.0,
        }),
        "straight_3lane" => Some(Scenario {
            name: "straight_3lane".into(),
            road: RoadSpec {
                segments: vec![Segment::Straight { length: 300.0 }],
                lane_count: 3,
                lane_width: 3.75,
                markings: vec![
                    Marking::Continuous,
                    dashed(0.0),
                    dashed(0.0),
                    Marking::Continuous,
                ],
            },
            ego_lane: 1,
            ego_lane_offset: 0.0,
            ego_heading_offset: 0.0,
            ego_path: EgoPath::Sweep {
                start_s: 0.0,
                step_s: 4.0,
                count: 6,
            },
            sensor: SensorConfig::default(),
            aldm: AldmParams::default(),
            run_baseline: true,
            run_aldm: true,
            gt_preview: 200.0,
        }),
        "fig3_simple" => Some(Scenario {
            name: "fig3_simple".into(),
            road: RoadSpec {
                segments: vec![Segment::Straight { length: 300.0 }],
                lane_count: 1,
                lane_width: 3.75,
                markings: vec![Marking::Continuous, dashed(0.0)],
            },
            ego_lane: 0,
            ego_lane_offset: 0.0,
            ego_heading_offset: 0.0,
            ego_path: EgoPath::Sweep {
                start_s: 0.0,
                step_s: 5.0,
                count: 3,
            },
            sensor: SensorConfig {
                merge_fragments: true,
                ..SensorConfig::default()
            },
            aldm: AldmParams::default(),
            run_baseline: true,
            run_aldm: true,
            gt_preview: 200.0,
        }),
        _ => None,
    }
}

// ---------------------------------------------------------------------
// config parsing (flat `key = value`, `#` comments)
// ---------------------------------------------------------------------

/// Parses the flat scenario config format. Every key is `section.field`
/// (lists use a numeric suffix, e.g. `road.segment.0`); values are
/// whitespace-separated tokens. Unknown keys are rejected.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut scn = default_scenario();
    let mut segments: BTreeMap<usize, Segment> = BTreeMap::new();
    let mut markings: BTreeMap<usize, Marking> = BTreeMap::new();
    let mut poses: BTreeMap<usize, EgoPose> = BTreeMap::new();
    let mut sweep = (0.0f64, 0.0f64, 1usize);

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.split('#').next().unwrap_or("").trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(parse_err(line, "expected `key = value`"));
        };
        let key = key.trim();
        let tokens: Vec<&str> = value.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(parse_err(line, "missing value"));
        }

        let fnum = |i: usize| -> Result<f64, ScenarioError> {
            tokens
                .get(i)
                .ok_or_else(|| parse_err(line, "missing numeric field"))?
                .parse::<f64>()
                .map_err(|_| parse_err(line, &format!("bad number `{}`", tokens[i])))
        };
        let unum = |i: usize| -> Result<usize, ScenarioError> {
            tokens
                .get(i)
                .ok_or_else(|| parse_err(line, "missing integer field"))?
                .parse::<usize>()
                .map_err(|_| parse_err(line, &format!("bad integer `{}`", tokens[i])))
        };

        if let Some(idx) = key.strip_prefix("road.segment.") {
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(line, "bad segment index"))?;
            let seg = match tokens[0] {
                "straight" => Segment::Straight { length: fnum(1)? },
                "arc" => Segment::Arc {
                    radius: fnum(1)?,
                    sweep: fnum(2)?,
                },
                other => return Err(parse_err(line, &format!("unknown segment `{other}`"))),
            };
            segments.insert(idx, seg);
            continue;
        }
        if let Some(idx) = key.strip_prefix("road.marking.") {
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(line, "bad marking index"))?;
            let m = match tokens[0] {
                "continuous" => Marking::Continuous,
                "dashed" => Marking::Dashed {
                    dash_len: fnum(1)?,
                    gap_len: fnum(2)?,
                    phase: fnum(3)?,
                },
                other => return Err(parse_err(line, &format!("unknown marking `{other}`"))),
            };
            markings.insert(idx, m);
            continue;
        }
        if let Some(idx) = key.strip_prefix("ego.pose.") {
            let idx: usize = idx.parse().map_err(|_| parse_err(line, "bad pose index"))?;
            poses.insert(
                idx,
                EgoPose {
                    s: fnum(0)?,
                    lateral_offset: fnum(1)?,
                    heading_offset: fnum(2)?,
                },
            );
            continue;
        }

        match key {
            "name" => scn.name = tokens.join(" "),
            "road.lanes" => scn.road.lane_count = unum(0)?,
            "road.lane_width" => scn.road.lane_width = fnum(0)?,
            "ego.lane" => scn.ego_lane = unum(0)?,
            "ego.lane_offset" => scn.ego_lane_offset = fnum(0)?,
            "ego.heading_offset" => scn.ego_heading_offset = fnum(0)?,
            "ego.start_s" => sweep.0 = fnum(0)?,
            "ego.step_s" => sweep.1 = fnum(0)?,
            "ego.frames" => sweep.2 = unum(0)?,
            "sensor.ld_range" => scn.sensor.ld_range = fnum(0)?,
            "sensor.dx" => scn.sensor.dx = fnum(0)?,
            "sensor.near_offset" => scn.sensor.near_offset = fnum(0)?,
            "sensor.max_lines" => scn.sensor.max_lines = unum(0)?,
            "sensor.max_points_per_line" => scn.sensor.max_points_per_line = unum(0)?,
            "sensor.lateral_window" => scn.sensor.lateral_window = fnum(0)?,
            "sensor.merge_fragments" => scn.sensor.merge_fragments = parse_bool(line, tokens[0])?,
            "sensor.noise_sigma" => scn.sensor.noise_sigma = fnum(0)?,
            "sensor.noise_seed" => scn.sensor.noise_seed = unum(0)? as u64,
            "aldm.max_gap" => scn.aldm.max_gap = fnum(0)?,
            "aldm.seed_max_x" => scn.aldm.seed_max_x = fnum(0)?,
            "aldm.seed_min_separation" => scn.aldm.seed_min_separation = fnum(0)?,
            "aldm.min_preview" => scn.aldm.min_preview = fnum(0)?,
            "aldm.adjacent_min_lateral" => scn.aldm.adjacent_min_lateral = fnum(0)?,
            "aldm.output_points" => scn.aldm.output_points = unum(0)?,
            "gt_preview" => scn.gt_preview = fnum(0)?,
            "detectors" => {
                scn.run_baseline = false;
                scn.run_aldm = false;
                for tok in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    match tok {
                        "baseline" => scn.run_baseline = true,
                        "aldm" => scn.run_aldm = true,
                        other => {
                            return Err(parse_err(line, &format!("unknown detector `{other}`")))
                        }
                    }
                }
            }
            other => return Err(parse_err(line, &format!("unknown key `{other}`"))),
        }
    }

    scn.road.segments = segments.into_values().collect();
    scn.road.markings = markings.into_values().collect();
    scn.ego_path = if poses.is_empty() {
        EgoPath::Sweep {
            start_s: sweep.0,
            step_s: sweep.1,
            count: sweep.2,
        }
    } else {
        EgoPath::Poses(poses.into_values().collect())
    };
    scn.validate()?;
    Ok(scn)
}

fn parse_bool(line: usize, tok: &str) -> Result<bool, ScenarioError> {
    match tok {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(parse_err(line, &format!("bad boolean `{other}`"))),
    }
}

fn parse_err(line: usize, msg: &str) -> ScenarioError {
    ScenarioError::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn default_scenario() -> Scenario {
    Scenario {
        name: "scenario".into(),
        road: RoadSpec {
            segments: vec![],
            lane_count: 1,
            lane_width: crate::road::DEFAULT_LANE_WIDTH,
            markings: vec![],
        },
        ego_lane: 0,
        ego_lane_offset: 0.0,
        ego_heading_offset: 0.0,
        ego_path: EgoPath::Sweep {
            start_s: 0.0,
            step_s: 0.0,
            count: 1,
        },
        sensor: SensorConfig::default(),
        aldm: AldmParams::default(),
        run_baseline: true,
        run_aldm: true,
        gt_preview: 200.0,
    }
}

// ---------------------------------------------------------------------
// frame reports
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LineReport {
    pub role: String,
    pub points: usize,
    pub preview_m: f64,
    /// Fraction of points generated by the boundary this line claims to
    /// trace; 0 when the claimed lane does not exist.
    pub purity: f64,
    pub expected_boundary: Option<usize>,
    pub low_preview: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport {
    pub max_dev_m: f64,
    pub mean_dev_m: f64,
    /// Ground-truth x range the deviation was evaluated over (clipped at
    /// the far end of the fitted overlap).
    pub compared_to_x: f64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct DetectorReport {
    pub lines: Vec<LineReport>,
    /// Aggregate over all traced points of all lines.
    pub purity: Option<f64>,
    /// Shortest ego guiding-line preview, meters.
    pub ego_preview_m: Option<f64>,
    pub trajectory: Option<TrajectoryReport>,
    pub seed_failures: Vec<String>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameReport {
    pub frame: usize,
    pub station_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aldm: Option<DetectorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<DetectorReport>,
}

impl FrameReport {
    pub fn has_error(&self) -> bool {
        self.aldm.as_ref().is_some_and(|d| d.error.is_some())
            || self.baseline.as_ref().is_some_and(|d| d.error.is_some())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl MetricSummary {
    fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct DetectorSummary {
    pub frames_reported: usize,
    pub frames_with_error: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ego_preview_m: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_max_dev_m: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_mean_dev_m: Option<MetricSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub frames: usize,
    pub frame_errors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aldm: Option<DetectorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<DetectorSummary>,
}

/// Serializable run result (`report.json`). The schema is versioned;
/// wall-clock timings are deliberately not part of it so that re-running
/// a scenario yields byte-identical output.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: String,
    pub frames: Vec<FrameReport>,
    pub summary: RunSummary,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Everything produced for one frame, retained for CSV/plot emission.
#[derive(Debug, Clone)]
pub struct FrameArtifacts {
    pub frame: usize,
    pub ego: EgoPose,
    pub cloud: SensorCloud,
    pub lanes: Option<LaneSet>,
    /// Lanes downsampled to the transmission budget.
    pub lanes_tx: Option<LaneSet>,
    pub trajectory: Option<Trajectory>,
    pub baseline: Option<BaselineSelection>,
    pub gt: GroundTruthCenterline,
}

pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<FrameArtifacts>,
    /// Per-frame wall-clock runtime, reported on stdout by the CLI but
    /// never serialized.
    pub frame_times_ms: Vec<f64>,
}

// ---------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------

pub fn run_scenario(scn: &Scenario) -> Result<RunOutput, ScenarioError> {
    scn.validate()?;
    let geom = build_road(scn.road.clone())?;
    let mut frames = Vec::with_capacity(scn.frame_count());
    let mut artifacts = Vec::with_capacity(scn.frame_count());
    let mut times = Vec::with_capacity(scn.frame_count());

    for frame in 0..scn.frame_count() {
        let ego = scn.pose(&geom, frame);
        let started = Instant::now();
        let mut cloud = sense(&geom, &ego, &scn.sensor)?;
        cloud.timestamp = frame as f64;
        let gt = ground_truth_centerline(&geom, scn.ego_lane, &ego, scn.gt_preview)?;

        let mut art = FrameArtifacts {
            frame,
            ego,
            cloud,
            lanes: None,
            lanes_tx: None,
            trajectory: None,
            baseline: None,
            gt,
        };
        let mut report = FrameReport {
            frame,
            station_s: ego.s,
            aldm: None,
            baseline: None,
        };

        if scn.run_aldm {
            report.aldm = Some(score_aldm(scn, &mut art));
        }
        if scn.run_baseline {
            report.baseline = Some(score_baseline(scn, &mut art));
        }
        times.push(started.elapsed().as_secs_f64() * 1e3);
        frames.push(report);
        artifacts.push(art);
    }

    let summary = RunSummary {
        frames: frames.len(),
        frame_errors: frames.iter().filter(|f| f.has_error()).count(),
        aldm: scn
            .run_aldm
            .then(|| summarize(frames.iter().filter_map(|f| f.aldm.as_ref()))),
        baseline: scn
            .run_baseline
            .then(|| summarize(frames.iter().filter_map(|f| f.baseline.as_ref()))),
    };
    Ok(RunOutput {
        report: RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: scn.name.clone(),
            frames,
            summary,
        },
        artifacts,
        frame_times_ms: times,
    })
}

fn score_aldm(scn: &Scenario, art: &mut FrameArtifacts) -> DetectorReport {
    let mut rep = DetectorReport::default();
    let lanes = match detect_lanes(&art.cloud, &scn.aldm) {
        Ok(l) => l,
        Err(e) => {
            if let crate::aldm::DetectError::SeedFailure { side } = &e {
                rep.seed_failures.push(format!("ego_{:?}", side).to_lowercase());
            }
            rep.error = Some(e.to_string());
            return rep;
        }
    };
    for role in [Role::AdjacentLeft, Role::AdjacentRight] {
        let traced = match role {
            Role::AdjacentLeft => lanes.adjacent_left.is_some(),
            _ => lanes.adjacent_right.is_some(),
        };
        if !traced && scn.expected_boundary(role).is_some() {
            rep.seed_failures.push(role.as_str().to_string());
        }
    }

    let mut matching = 0usize;
    let mut total = 0usize;
    for line in lanes.lines() {
        let expected = scn.expected_boundary(line.role);
        let purity = match expected {
            Some(b) => line.purity_vs(b),
            None => 0.0,
        };
        if expected.is_none() {
            rep.warnings
                .push(format!("{} traced but no such lane exists", line.role.as_str()));
        }
        if line.low_preview {
            rep.warnings.push(format!(
                "{} preview below {} m",
                line.role.as_str(),
                scn.aldm.min_preview
            ));
        }
        total += line.points.len();
        matching += expected
            .map(|b| line.points.iter().filter(|p| p.truth_label == b).count())
            .unwrap_or(0);
        rep.lines.push(LineReport {
            role: line.role.as_str().to_string(),
            points: line.points.len(),
            preview_m: line.preview_len(),
            purity,
            expected_boundary: expected,
            low_preview: line.low_preview,
        });
    }
    rep.purity = (total > 0).then(|| matching as f64 / total as f64);
    rep.ego_preview_m = Some(
        lanes
            .ego_left
            .preview_len()
            .min(lanes.ego_right.preview_len()),
    );

    let tx = lanes.downsampled(scn.aldm.output_points);
    match compute_trajectory(&tx.ego_left, &tx.ego_right) {
        Ok(traj) => {
            rep.trajectory = Some(score_trajectory(&traj, &art.gt));
            art.trajectory = Some(traj);
        }
        Err(e) => rep.warnings.push(format!("trajectory unavailable: {e}")),
    }
    art.lanes_tx = Some(tx);
    art.lanes = Some(lanes);
    rep
}

fn score_baseline(scn: &Scenario, art: &mut FrameArtifacts) -> DetectorReport {
    let mut rep = DetectorReport::default();
    let sel = detect_baseline(&art.cloud);
    let mut matching = 0usize;
    let mut total = 0usize;
    let mut previews = Vec::new();
    for (role, obj) in [
        (Role::EgoLeft, sel.left.as_ref()),
        (Role::EgoRight, sel.right.as_ref()),
    ] {
        let Some(obj) = obj else {
            rep.warnings
                .push(format!("no {} object selected", role.as_str()));
            continue;
        };
        let expected = scn.expected_boundary(role);
        let pure = expected == Some(obj.truth_label);
        total += obj.points.len();
        if pure {
            matching += obj.points.len();
        }
        previews.push(obj.extent());
        rep.lines.push(LineReport {
            role: role.as_str().to_string(),
            points: obj.points.len(),
            preview_m: obj.extent(),
            purity: if pure { 1.0 } else { 0.0 },
            expected_boundary: expected,
            low_preview: obj.extent() < scn.aldm.min_preview,
        });
    }
    rep.purity = (total > 0).then(|| matching as f64 / total as f64);
    rep.ego_preview_m = previews
        .iter()
        .copied()
        .reduce(f64::min)
        .filter(|_| previews.len() == 2);

    if let (Some(left), Some(right)) = (&sel.left, &sel.right) {
        let as_traced = |obj: &LineObject, role: Role| TracedLine {
            role,
            points: obj
                .points
                .iter()
                .map(|p| PoolPoint {
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    line_id: obj.id,
                    truth_label: obj.truth_label,
                })
                .collect(),
            low_preview: false,
        };
        match compute_trajectory(
            &as_traced(left, Role::EgoLeft),
            &as_traced(right, Role::EgoRight),
        ) {
            Ok(traj) => {
                rep.trajectory = Some(score_trajectory(&traj, &art.gt));
            }
            Err(e) => rep.warnings.push(format!("trajectory unavailable: {e}")),
        }
    }
    art.baseline = Some(sel);
    rep
}

fn score_trajectory(traj: &Trajectory, gt: &GroundTruthCenterline) -> TrajectoryReport {
    let limit = traj.x_range.1;
    let mut devs = Vec::new();
    let mut compared_to = 0.0f64;
    for p in &gt.points {
        if p.x > limit {
            break;
        }
        devs.push((traj.center_y(p.x) - p.y).abs());
        compared_to = p.x;
    }
    TrajectoryReport {
        max_dev_m: devs.iter().copied().fold(0.0, f64::max),
        mean_dev_m: if devs.is_empty() {
            0.0
        } else {
            devs.iter().sum::<f64>() / devs.len() as f64
        },
        compared_to_x: compared_to,
    }
}

fn summarize<'a>(reports: impl Iterator<Item = &'a DetectorReport>) -> DetectorSummary {
    let mut out = DetectorSummary::default();
    let mut purity = Vec::new();
    let mut preview = Vec::new();
    let mut max_dev = Vec::new();
    let mut mean_dev = Vec::new();
    for r in reports {
        out.frames_reported += 1;
        if r.error.is_some() {
            out.frames_with_error += 1;
        }
        if let Some(p) = r.purity {
            purity.push(p);
        }
        if let Some(p) = r.ego_preview_m {
            preview.push(p);
        }
        if let Some(t) = &r.trajectory {
            max_dev.push(t.max_dev_m);
            mean_dev.push(t.mean_dev_m);
        }
    }
    out.purity = MetricSummary::from_values(&purity);
    out.ego_preview_m = MetricSummary::from_values(&preview);
    out.trajectory_max_dev_m = MetricSummary::from_values(&max_dev);
    out.trajectory_mean_dev_m = MetricSummary::from_values(&mean_dev);
    out
}
