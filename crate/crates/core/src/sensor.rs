//! Simulated line sensor: clips marking polylines to the field of view,
//! samples them on a fixed longitudinal grid, emits every marking fragment
//! as its own line object and applies the naive first-point side
//! assignment.
//!
//! The sampling grid is anchored at the start of the field of view:
//! emitted points sit at sensor-frame `x = near_offset + k * dx`.

use crate::road::{station_at_sensor_x, EgoPose, RoadError, RoadGeometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SensorError {
    #[error("invalid sensor config: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Road(#[from] RoadError),
    #[error("csv write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// A sensed marking point in the sensor frame (meters). `z` is carried
/// for the output format but is always ~0 for points on the road surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointXY {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PointXY {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn flipped(&self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Line sensor parameters. Defaults mirror the modeled sensor: 200 m
/// range, a point every ~2 m, at most 100 line objects of 200 points.
#[derive(Debug, Clone)]
pub struct SensorConfig {
    /// Range of view for lane detection, meters.
    pub ld_range: f64,
    /// Longitudinal distance between two sampled points, meters.
    pub dx: f64,
    /// Offset between the sensor and the nearest detectable point.
    pub near_offset: f64,
    /// Upper limit on detectable line objects per frame.
    pub max_lines: usize,
    /// Upper limit on points per line object.
    pub max_points_per_line: usize,
    /// Lateral half-width of the sensed window, meters.
    pub lateral_window: f64,
    /// When set, all fragments of one boundary are merged into a single
    /// line object, mimicking editor-built roads where a dashed line is
    /// one object.
    pub merge_fragments: bool,
    /// Standard deviation of optional Gaussian lateral jitter, meters.
    pub noise_sigma: f64,
    pub noise_seed: u64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            ld_range: 200.0,
            dx: 2.0,
            near_offset: 5.52,
            max_lines: 100,
            max_points_per_line: 200,
            lateral_window: 15.0,
            merge_fragments: false,
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<(), SensorError> {
        if !(self.ld_range > 0.0) {
            return Err(SensorError::Config("ld_range must be positive"));
        }
        if !(self.dx > 0.0) {
            return Err(SensorError::Config("dx must be positive"));
        }
        if self.near_offset < 0.0 {
            return Err(SensorError::Config("near_offset must be non-negative"));
        }
        if self.max_lines == 0 || self.max_points_per_line == 0 {
            return Err(SensorError::Config("line/point limits must be positive"));
        }
        if self.noise_sigma < 0.0 {
            return Err(SensorError::Config("noise_sigma must be non-negative"));
        }
        Ok(())
    }

    /// Theoretical point capacity: points per full-range line times the
    /// line limit. With defaults: (200 / 2) * 100 = 10000.
    pub fn theoretical_capacity(&self) -> usize {
        (self.ld_range / self.dx).floor() as usize * self.max_lines
    }

    /// Far edge of the field of view in sensor-frame x.
    pub fn fov_far(&self) -> f64 {
        self.near_offset + self.ld_range
    }
}

/// One detected line fragment: grid-sampled points ordered by ascending x.
/// `truth_label` is the generating boundary index, carried for scoring
/// only — detectors never read it.
#[derive(Debug, Clone)]
pub struct LineObject {
    /// Cloud-unique object id.
    pub id: usize,
    pub truth_label: usize,
    /// 1 = continuous, 2 = dashed, 3 = dotted.
    pub marking_type: u8,
    pub side: Side,
    pub points: Vec<PointXY>,
}

impl LineObject {
    pub fn first_x(&self) -> f64 {
        self.points[0].x
    }

    pub fn last_x(&self) -> f64 {
        self.points[self.points.len() - 1].x
    }

    /// Longitudinal extent covered by the object.
    pub fn extent(&self) -> f64 {
        self.last_x() - self.first_x()
    }

    pub fn min_abs_y(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.y.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Naive side assignment: an object whose first (lowest-x) point lies
/// right of the longitudinal axis is tagged Right, otherwise Left.
/// This deliberately mislabels fragments that start left and cross the
/// axis further out.
pub fn side_of(first_point: &PointXY) -> Side {
    if first_point.y < 0.0 {
        Side::Right
    } else {
        Side::Left
    }
}

/// One frame of sensor output.
#[derive(Debug, Clone)]
pub struct SensorCloud {
    pub timestamp: f64,
    pub left: Vec<LineObject>,
    pub right: Vec<LineObject>,
}

impl SensorCloud {
    pub fn n_left(&self) -> usize {
        self.left.len()
    }

    pub fn n_right(&self) -> usize {
        self.right.len()
    }

    pub fn total_points(&self) -> usize {
        self.left
            .iter()
            .chain(self.right.iter())
            .map(|l| l.points.len())
            .sum()
    }

    pub fn objects(&self) -> impl Iterator<Item = &LineObject> {
        self.left.iter().chain(self.right.iter())
    }

    /// Copy of the cloud with every side assignment inverted (left
    /// objects listed as right and vice versa).
    pub fn with_inverted_sides(&self) -> SensorCloud {
        let flip = |objs: &[LineObject]| {
            objs.iter()
                .map(|o| LineObject {
                    side: o.side.flipped(),
                    ..o.clone()
                })
                .collect::<Vec<_>>()
        };
        SensorCloud {
            timestamp: self.timestamp,
            left: flip(&self.right),
            right: flip(&self.left),
        }
    }

    /// Writes the cloud as CSV: one row per point, header included,
    /// '.' decimal separator.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "side,line_id,truth_label,marking_type,point_index,x,y,z"
        )?;
        for obj in self.objects() {
            for (i, p) in obj.points.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    obj.side.as_str(),
                    obj.id,
                    obj.truth_label,
                    obj.marking_type,
                    i,
                    p.x,
                    p.y,
                    p.z
                )?;
            }
        }
        Ok(())
    }
}

/// Simulates one sensor frame: every marking fragment intersecting the
/// field of view becomes a line object sampled at `x = near_offset + k*dx`.
/// When the object budget overflows, the farthest objects are dropped
/// first.
pub fn sense(
    geom: &RoadGeometry,
    ego: &EgoPose,
    cfg: &SensorConfig,
) -> Result<SensorCloud, SensorError> {
    cfg.validate()?;
    let frame = geom.sensor_frame(ego)?;
    let fov_near = cfg.near_offset;
    let fov_far = cfg.fov_far();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    let noise = if cfg.noise_sigma > 0.0 {
        Some(Normal::new(0.0, cfg.noise_sigma).expect("validated sigma"))
    } else {
        None
    };

    // raw fragments: (truth_label, marking_type, points)
    let mut fragments: Vec<(usize, u8, Vec<PointXY>)> = Vec::new();
    for boundary in 0..geom.boundary_count() {
        let marking = *geom.marking(boundary);
        let offset = geom.boundary_offset(boundary);
        let mut boundary_points: Vec<PointXY> = Vec::new();
        for (sa, sb) in marking.intervals(0.0, geom.total_len()) {
            let xa = frag_x(geom, &frame, offset, sa);
            let xb = frag_x(geom, &frame, offset, sb);
            let (x_lo, x_hi) = (xa.min(xb), xa.max(xb));
            if x_hi < fov_near - 1e-9 || x_lo > fov_far + 1e-9 {
                continue;
            }
            let lo_x = x_lo.max(fov_near);
            let hi_x = x_hi.min(fov_far);
            let k_min = ((lo_x - fov_near) / cfg.dx - 1e-9).ceil().max(0.0) as u64;
            let k_max = ((hi_x - fov_near) / cfg.dx + 1e-9).floor();
            if k_max < 0.0 {
                continue;
            }
            let mut pts = Vec::new();
            for k in k_min..=(k_max as u64) {
                let x_k = fov_near + k as f64 * cfg.dx;
                let Some(s) = station_at_sensor_x(geom, &frame, offset, x_k, sa, sb) else {
                    continue;
                };
                let wp = geom.point_at(s, offset)?;
                let (_, mut y) = frame.to_sensor(wp);
                if let Some(n) = &noise {
                    y += n.sample(&mut rng);
                }
                if y.abs() > cfg.lateral_window {
                    continue;
                }
                pts.push(PointXY::new(x_k, y));
            }
            if pts.is_empty() {
                continue;
            }
            pts.truncate(cfg.max_points_per_line);
            if cfg.merge_fragments {
                boundary_points.extend(pts);
            } else {
                fragments.push((boundary, marking.type_code(), pts));
            }
        }
        if cfg.merge_fragments && !boundary_points.is_empty() {
            boundary_points.truncate(cfg.max_points_per_line);
            fragments.push((boundary, marking.type_code(), boundary_points));
        }
    }

    // enforce the object budget, dropping farthest-first
    if fragments.len() > cfg.max_lines {
        fragments.sort_by(|a, b| {
            (a.2[0].x, a.0)
                .partial_cmp(&(b.2[0].x, b.0))
                .expect("finite coords")
        });
        fragments.truncate(cfg.max_lines);
    }
    // deterministic listing order: per side, by first-point x
    fragments.sort_by(|a, b| {
        (a.2[0].x, a.0)
            .partial_cmp(&(b.2[0].x, b.0))
            .expect("finite coords")
    });

    let mut left = Vec::new();
    let mut right = Vec::new();
    for (truth_label, marking_type, points) in fragments {
        let side = side_of(&points[0]);
        let obj = LineObject {
            id: 0,
            truth_label,
            marking_type,
            side,
            points,
        };
        match side {
            Side::Left => left.push(obj),
            Side::Right => right.push(obj),
        }
    }
    for (id, obj) in left.iter_mut().chain(right.iter_mut()).enumerate() {
        obj.id = id;
    }

    Ok(SensorCloud {
        timestamp: 0.0,
        left,
        right,
    })
}

fn frag_x(geom: &RoadGeometry, frame: &crate::road::SensorFrame, offset: f64, s: f64) -> f64 {
    geom.point_at(s, offset)
        .map(|p| frame.to_sensor(p).0)
        .unwrap_or(f64::NEG_INFINITY)
}
