//! Synthetic road geometry: straight/arc centerlines, lane boundaries and
//! dashed or continuous marking polylines, plus the ground-truth oracle used
//! for scoring detectors.
//!
//! Frames and sign conventions:
//! * world frame: x east, y north, heading in radians CCW from the x axis;
//!   roads start at the origin with heading 0
//! * sensor frame: x forward (longitudinal), y left (lateral)
//! * boundary `k` of an `L`-lane road sits at lateral offset
//!   `(k - L/2) * lane_width` from the centerline, so `k = 0` is the
//!   rightmost boundary and `k = L` the leftmost

use crate::sensor::PointXY;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoadError {
    #[error("road needs at least one segment")]
    EmptySegments,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("dash phase {phase} outside [0, {period})")]
    BadPhase { phase: f64, period: f64 },
    #[error("expected {expected} boundary markings for {lanes} lanes, got {got}")]
    MarkingCount {
        expected: usize,
        lanes: usize,
        got: usize,
    },
    #[error("station {s} outside road extent [0, {len}]")]
    OutOfExtent { s: f64, len: f64 },
    #[error("lane index {lane} out of range (lane_count {lanes})")]
    BadLane { lane: usize, lanes: usize },
}

/// A point in the world frame (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Position plus heading on the centerline.
#[derive(Debug, Clone, Copy)]
pub struct Pose {
    pub position: WorldPoint,
    pub heading: f64,
}

impl Pose {
    /// Unit normal pointing left of the travel direction.
    fn left_normal(&self) -> (f64, f64) {
        (-self.heading.sin(), self.heading.cos())
    }
}

/// Horizontal alignment element of the centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Straight { length: f64 },
    /// Circular arc; `sweep` is the signed heading change in radians,
    /// positive = left (CCW). Arc length is `radius * |sweep|`.
    Arc { radius: f64, sweep: f64 },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Straight { length } => length,
            Segment::Arc { radius, sweep } => radius * sweep.abs(),
        }
    }
}

/// Marking pattern of one lane boundary.
///
/// Dash tiling is anchored at `phase`: the first dash spans
/// `[phase, phase + dash_len)`, followed by `gap_len` of gap, repeating
/// toward increasing s. Stations below `phase` are unmarked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marking {
    Continuous,
    Dashed {
        dash_len: f64,
        gap_len: f64,
        phase: f64,
    },
}

impl Marking {
    /// Line type code carried on sensor objects: 1 = continuous single
    /// line, 2 = dashed line (3 = dotted, not generated here).
    pub fn type_code(&self) -> u8 {
        match self {
            Marking::Continuous => 1,
            Marking::Dashed { .. } => 2,
        }
    }

    /// Marked s-intervals of this pattern inside `[s0, s1]`, clipped.
    /// Zero-length intersections are dropped.
    pub fn intervals(&self, s0: f64, s1: f64) -> Vec<(f64, f64)> {
        match *self {
            Marking::Continuous => {
                if s1 > s0 {
                    vec![(s0, s1)]
                } else {
                    Vec::new()
                }
            }
            Marking::Dashed {
                dash_len,
                gap_len,
                phase,
            } => {
                let period = dash_len + gap_len;
                let mut out = Vec::new();
                if period <= 0.0 {
                    return out;
                }
                let first = if s0 <= phase {
                    0
                } else {
                    ((s0 - phase - dash_len) / period).floor().max(0.0) as u64
                };
                let mut n = first;
                loop {
                    let a = phase + n as f64 * period;
                    if a >= s1 {
                        break;
                    }
                    let lo = a.max(s0);
                    let hi = (a + dash_len).min(s1);
                    if hi > lo {
                        out.push((lo, hi));
                    }
                    n += 1;
                }
                out
            }
        }
    }

    /// Whether station `s` lies on paint (dash) rather than gap.
    pub fn covers(&self, s: f64) -> bool {
        match *self {
            Marking::Continuous => true,
            Marking::Dashed {
                dash_len,
                gap_len,
                phase,
            } => {
                if s < phase {
                    return false;
                }
                (s - phase) % (dash_len + gap_len) < dash_len
            }
        }
    }
}

/// Full description of a road: alignment, lane layout and per-boundary
/// markings (`lane_count + 1` entries, index 0 = rightmost boundary).
#[derive(Debug, Clone)]
pub struct RoadSpec {
    pub segments: Vec<Segment>,
    pub lane_count: usize,
    pub lane_width: f64,
    pub markings: Vec<Marking>,
}

pub const DEFAULT_LANE_WIDTH: f64 = 3.75;
pub const DEFAULT_DASH_LEN: f64 = 6.0;
pub const DEFAULT_GAP_LEN: f64 = 12.0;

impl RoadSpec {
    pub fn validate(&self) -> Result<(), RoadError> {
        if self.segments.is_empty() {
            return Err(RoadError::EmptySegments);
        }
        for seg in &self.segments {
            match *seg {
                Segment::Straight { length } => {
                    if length <= 0.0 {
                        return Err(RoadError::NonPositive("segment length"));
                    }
                }
                Segment::Arc { radius, sweep } => {
                    if radius <= 0.0 {
                        return Err(RoadError::NonPositive("arc radius"));
                    }
                    if sweep == 0.0 {
                        return Err(RoadError::NonPositive("arc sweep"));
                    }
                }
            }
        }
        if self.lane_count < 1 {
            return Err(RoadError::NonPositive("lane_count"));
        }
        if self.lane_width <= 0.0 {
            return Err(RoadError::NonPositive("lane_width"));
        }
        if self.markings.len() != self.lane_count + 1 {
            return Err(RoadError::MarkingCount {
                expected: self.lane_count + 1,
                lanes: self.lane_count,
                got: self.markings.len(),
            });
        }
        for m in &self.markings {
            if let Marking::Dashed {
                dash_len,
                gap_len,
                phase,
            } = *m
            {
                if dash_len <= 0.0 {
                    return Err(RoadError::NonPositive("dash_len"));
                }
                if gap_len < 0.0 {
                    return Err(RoadError::NonPositive("gap_len"));
                }
                let period = dash_len + gap_len;
                if phase < 0.0 || phase >= period {
                    return Err(RoadError::BadPhase { phase, period });
                }
            }
        }
        Ok(())
    }
}

/// Ego placement on the road. `lateral_offset` is measured from the road
/// centerline, positive left; `heading_offset` is relative to the
/// centerline tangent.
#[derive(Debug, Clone, Copy)]
pub struct EgoPose {
    pub s: f64,
    pub lateral_offset: f64,
    pub heading_offset: f64,
}

impl EgoPose {
    pub fn at(s: f64) -> Self {
        Self {
            s,
            lateral_offset: 0.0,
            heading_offset: 0.0,
        }
    }

    pub fn with_lateral(s: f64, lateral_offset: f64) -> Self {
        Self {
            s,
            lateral_offset,
            heading_offset: 0.0,
        }
    }
}

/// Queryable centerline geometry built from a validated [`RoadSpec`].
/// Immutable after construction; safe to share between threads.
#[derive(Debug, Clone)]
pub struct RoadGeometry {
    spec: RoadSpec,
    /// Per segment: start station and start pose (end pose of the
    /// previous segment, so joints are continuous by construction).
    seg_starts: Vec<(f64, Pose)>,
    total_len: f64,
}

pub fn build_road(spec: RoadSpec) -> Result<RoadGeometry, RoadError> {
    RoadGeometry::new(spec)
}

impl RoadGeometry {
    pub fn new(spec: RoadSpec) -> Result<Self, RoadError> {
        spec.validate()?;
        let mut seg_starts = Vec::with_capacity(spec.segments.len());
        let mut pose = Pose {
            position: WorldPoint::new(0.0, 0.0),
            heading: 0.0,
        };
        let mut s = 0.0;
        for seg in &spec.segments {
            seg_starts.push((s, pose));
            pose = advance(pose, seg, seg.length());
            s += seg.length();
        }
        Ok(Self {
            spec,
            seg_starts,
            total_len: s,
        })
    }

    pub fn spec(&self) -> &RoadSpec {
        &self.spec
    }

    pub fn total_len(&self) -> f64 {
        self.total_len
    }

    pub fn lane_count(&self) -> usize {
        self.spec.lane_count
    }

    pub fn lane_width(&self) -> f64 {
        self.spec.lane_width
    }

    /// Lateral offset of boundary `k` from the centerline.
    pub fn boundary_offset(&self, boundary: usize) -> f64 {
        (boundary as f64 - self.spec.lane_count as f64 / 2.0) * self.spec.lane_width
    }

    /// Lateral offset of the center of lane `lane` (0 = rightmost lane).
    pub fn lane_center_offset(&self, lane: usize) -> f64 {
        (lane as f64 + 0.5 - self.spec.lane_count as f64 / 2.0) * self.spec.lane_width
    }

    pub fn marking(&self, boundary: usize) -> &Marking {
        &self.spec.markings[boundary]
    }

    pub fn boundary_count(&self) -> usize {
        self.spec.markings.len()
    }

    /// Centerline pose at station `s`. Stations up to 1e-9 outside the
    /// extent are clamped; anything further is an error.
    pub fn pose_at(&self, s: f64) -> Result<Pose, RoadError> {
        const TOL: f64 = 1e-9;
        if s < -TOL || s > self.total_len + TOL {
            return Err(RoadError::OutOfExtent {
                s,
                len: self.total_len,
            });
        }
        let s = s.clamp(0.0, self.total_len);
        // few segments per road; linear scan
        let mut idx = self.seg_starts.len() - 1;
        for (i, (start, _)) in self.seg_starts.iter().enumerate() {
            if s < *start {
                idx = i - 1;
                break;
            }
        }
        let (seg_s, seg_pose) = self.seg_starts[idx];
        Ok(advance(seg_pose, &self.spec.segments[idx], s - seg_s))
    }

    /// World position of the point at station `s`, shifted `lateral`
    /// meters left of the centerline.
    pub fn point_at(&self, s: f64, lateral: f64) -> Result<WorldPoint, RoadError> {
        let pose = self.pose_at(s)?;
        let (nx, ny) = pose.left_normal();
        Ok(WorldPoint::new(
            pose.position.x + lateral * nx,
            pose.position.y + lateral * ny,
        ))
    }

    /// View of the world through the sensor mounted at `ego`.
    pub fn sensor_frame(&self, ego: &EgoPose) -> Result<SensorFrame, RoadError> {
        let pose = self.pose_at(ego.s)?;
        let (nx, ny) = pose.left_normal();
        let origin = WorldPoint::new(
            pose.position.x + ego.lateral_offset * nx,
            pose.position.y + ego.lateral_offset * ny,
        );
        let heading = pose.heading + ego.heading_offset;
        Ok(SensorFrame {
            origin,
            cos_h: heading.cos(),
            sin_h: heading.sin(),
        })
    }
}

fn advance(start: Pose, seg: &Segment, ds: f64) -> Pose {
    match *seg {
        Segment::Straight { .. } => Pose {
            position: WorldPoint::new(
                start.position.x + ds * start.heading.cos(),
                start.position.y + ds * start.heading.sin(),
            ),
            heading: start.heading,
        },
        Segment::Arc { radius, sweep } => {
            let sign = sweep.signum();
            let phi = sign * ds / radius;
            let (nx, ny) = start.left_normal();
            let center = WorldPoint::new(
                start.position.x + sign * radius * nx,
                start.position.y + sign * radius * ny,
            );
            let vx = start.position.x - center.x;
            let vy = start.position.y - center.y;
            let (sin_p, cos_p) = phi.sin_cos();
            Pose {
                position: WorldPoint::new(
                    center.x + vx * cos_p - vy * sin_p,
                    center.y + vx * sin_p + vy * cos_p,
                ),
                heading: start.heading + phi,
            }
        }
    }
}

/// Rigid transform from world coordinates into the ego/sensor frame
/// (x forward, y left).
#[derive(Debug, Clone, Copy)]
pub struct SensorFrame {
    pub origin: WorldPoint,
    cos_h: f64,
    sin_h: f64,
}

impl SensorFrame {
    pub fn to_sensor(&self, p: WorldPoint) -> (f64, f64) {
        let dx = p.x - self.origin.x;
        let dy = p.y - self.origin.y;
        (
            dx * self.cos_h + dy * self.sin_h,
            -dx * self.sin_h + dy * self.cos_h,
        )
    }
}

/// One marked stretch of a boundary, as world points plus its station
/// interval and ground-truth boundary label.
#[derive(Debug, Clone)]
pub struct MarkingPolyline {
    pub boundary: usize,
    pub s_start: f64,
    pub s_end: f64,
    pub points: Vec<WorldPoint>,
}

const POLYLINE_STEP: f64 = 0.5;

/// Expands the marking of `boundary` over `[s0, s1]` into world polylines,
/// one per dash (a continuous marking yields a single polyline).
pub fn sample_marking(
    geom: &RoadGeometry,
    boundary: usize,
    marking: &Marking,
    s0: f64,
    s1: f64,
) -> Result<Vec<MarkingPolyline>, RoadError> {
    const TOL: f64 = 1e-9;
    if s0 < -TOL || s1 > geom.total_len() + TOL {
        return Err(RoadError::OutOfExtent {
            s: if s0 < -TOL { s0 } else { s1 },
            len: geom.total_len(),
        });
    }
    let offset = geom.boundary_offset(boundary);
    let mut out = Vec::new();
    for (a, b) in marking.intervals(s0.max(0.0), s1.min(geom.total_len())) {
        let n = ((b - a) / POLYLINE_STEP).ceil().max(1.0) as usize;
        let mut points = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s = a + (b - a) * i as f64 / n as f64;
            points.push(geom.point_at(s, offset)?);
        }
        out.push(MarkingPolyline {
            boundary,
            s_start: a,
            s_end: b,
            points,
        });
    }
    Ok(out)
}

/// Finds the station whose sensor-frame longitudinal coordinate equals
/// `target_x`, for the curve at `lateral` offset, by bisection over
/// `[s_lo, s_hi]`. Returns `None` when the bracket does not straddle the
/// target.
pub fn station_at_sensor_x(
    geom: &RoadGeometry,
    frame: &SensorFrame,
    lateral: f64,
    target_x: f64,
    s_lo: f64,
    s_hi: f64,
) -> Option<f64> {
    let f = |s: f64| -> Option<f64> {
        let p = geom.point_at(s, lateral).ok()?;
        Some(frame.to_sensor(p).0 - target_x)
    };
    let mut lo = s_lo.max(0.0);
    let mut hi = s_hi.min(geom.total_len());
    if lo >= hi {
        return None;
    }
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Desired-lane centerline expressed in the sensor frame, sampled every
/// meter of longitudinal distance from 0 to `preview`.
#[derive(Debug, Clone)]
pub struct GroundTruthCenterline {
    pub points: Vec<PointXY>,
    /// Set when the preview ran past the end of the road and the output
    /// was cut short.
    pub truncated: bool,
}

pub fn ground_truth_centerline(
    geom: &RoadGeometry,
    lane: usize,
    ego: &EgoPose,
    preview: f64,
) -> Result<GroundTruthCenterline, RoadError> {
    if lane >= geom.lane_count() {
        return Err(RoadError::BadLane {
            lane,
            lanes: geom.lane_count(),
        });
    }
    let frame = geom.sensor_frame(ego)?;
    let offset = geom.lane_center_offset(lane);
    let mut points = Vec::new();
    let mut truncated = false;
    let steps = preview.floor() as usize;
    let s_lo = (ego.s - 2.0 * geom.lane_width() - 1.0).max(0.0);
    for i in 0..=steps {
        let x = i as f64;
        match station_at_sensor_x(geom, &frame, offset, x, s_lo, geom.total_len()) {
            Some(s) => {
                let p = geom.point_at(s, offset)?;
                let (sx, sy) = frame.to_sensor(p);
                debug_assert!((sx - x).abs() < 1e-6);
                points.push(PointXY::new(x, sy));
                let _ = sx;
            }
            None => {
                truncated = true;
                break;
            }
        }
    }
    Ok(GroundTruthCenterline { points, truncated })
}
