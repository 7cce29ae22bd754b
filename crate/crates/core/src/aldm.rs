//! Advanced lane detection: pools all sensed points regardless of their
//! side tags, seeds three start points per guiding line, then walks the
//! pool by iterated quadratic prediction. Up to three lanes are covered
//! (ego lane plus one adjacent lane per side) and every traced line can be
//! downsampled to a fixed point budget for transmission.
//!
//! The side categorization delivered by the sensor is deliberately
//! ignored: fragmented markings make it unreliable, which is exactly the
//! failure the detector has to survive.

use crate::sensor::{PointXY, SensorCloud, Side};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("fewer than 3 qualifying seed points on the {side:?} side")]
    SeedFailure { side: Side },
    #[error("degenerate quadratic fit: duplicate x among interpolation points")]
    DegenerateFit,
    #[error("invalid detector params: {0}")]
    Params(&'static str),
}

/// Tuning of the detector. Defaults follow the modeled marking rules:
/// a 6 m dash every 18 m guarantees a point within `max_gap`, and
/// `seed_max_x` is `max_gap` past the first detectable point at 5.52 m.
#[derive(Debug, Clone)]
pub struct AldmParams {
    /// Longitudinal search window for the next point of a line, meters.
    pub max_gap: f64,
    /// Seed points must lie within this sensor-frame x, meters.
    pub seed_max_x: f64,
    /// Minimum pairwise longitudinal separation between seeds, meters.
    pub seed_min_separation: f64,
    /// Preview length below which a traced line is flagged, meters.
    pub min_preview: f64,
    /// Adjacent-lane seeds must keep this lateral distance from the ego
    /// guiding lines, meters.
    pub adjacent_min_lateral: f64,
    /// Points per transmitted line after downsampling.
    pub output_points: usize,
}

impl Default for AldmParams {
    fn default() -> Self {
        Self {
            max_gap: 18.0,
            seed_max_x: 23.52,
            seed_min_separation: 1.8,
            min_preview: 60.0,
            adjacent_min_lateral: 2.0,
            output_points: 13,
        }
    }
}

impl AldmParams {
    pub fn validate(&self) -> Result<(), DetectError> {
        if !(self.max_gap > 0.0
            && self.seed_max_x > 0.0
            && self.seed_min_separation > 0.0
            && self.min_preview > 0.0
            && self.adjacent_min_lateral > 0.0)
        {
            return Err(DetectError::Params("all distances must be positive"));
        }
        if self.output_points < 2 {
            return Err(DetectError::Params("output_points must be at least 2"));
        }
        Ok(())
    }
}

/// Comparisons against grid coordinates tolerate this much float noise
/// (`5.52 + 9*2.0` and the literal `23.52` differ in the last bits).
const COORD_EPS: f64 = 1e-9;

/// Coefficients of `y = a*x^2 + b*x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
}

/// Interpolating quadratic through three points, solved with the explicit
/// adjugate inverse of the 3x3 Vandermonde matrix.
pub fn fit_quadratic(a: PointXY, b: PointXY, c: PointXY) -> Result<QuadCoeffs, DetectError> {
    let (xa, xb, xc) = (a.x, b.x, c.x);
    if (xa - xb).abs() < COORD_EPS || (xa - xc).abs() < COORD_EPS || (xb - xc).abs() < COORD_EPS {
        return Err(DetectError::DegenerateFit);
    }
    // row-major Vandermonde
    let m = [
        [xa * xa, xa, 1.0],
        [xb * xb, xb, 1.0],
        [xc * xc, xc, 1.0],
    ];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 {
        return Err(DetectError::DegenerateFit);
    }
    let adj = [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ];
    let y = [a.y, b.y, c.y];
    let solve = |row: [f64; 3]| (row[0] * y[0] + row[1] * y[1] + row[2] * y[2]) / det;
    Ok(QuadCoeffs {
        a: solve(adj[0]),
        b: solve(adj[1]),
        c: solve(adj[2]),
    })
}

/// A pooled point with its provenance (source object id and generating
/// boundary). Side tags are gone by design.
#[derive(Debug, Clone, Copy)]
pub struct PoolPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub line_id: usize,
    pub truth_label: usize,
}

impl PoolPoint {
    pub fn as_point(&self) -> PointXY {
        PointXY {
            x: self.x,
            y: self.y,
            z: self.z,
        }
    }
}

/// All sensed points of a frame merged into one amount, sorted by
/// ascending x, with per-point consumption state shared across traces.
#[derive(Debug, Clone)]
pub struct PointPool {
    points: Vec<PoolPoint>,
    consumed: Vec<bool>,
}

impl PointPool {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PoolPoint] {
        &self.points
    }

    pub fn is_consumed(&self, idx: usize) -> bool {
        self.consumed[idx]
    }

    fn consume(&mut self, idx: usize) {
        debug_assert!(!self.consumed[idx]);
        self.consumed[idx] = true;
    }

    /// Index range of points with `x_lo < x <= x_hi` (plus float slack on
    /// the upper bound).
    fn window(&self, x_lo: f64, x_hi: f64) -> std::ops::Range<usize> {
        let start = self.points.partition_point(|p| p.x <= x_lo);
        let end = self.points.partition_point(|p| p.x <= x_hi + COORD_EPS);
        start..end
    }
}

/// Merges every point of every line object into one pool, discarding the
/// left/right categorization.
pub fn pool_points(cloud: &SensorCloud) -> PointPool {
    let mut points: Vec<PoolPoint> = cloud
        .objects()
        .flat_map(|obj| {
            obj.points.iter().map(|p| PoolPoint {
                x: p.x,
                y: p.y,
                z: p.z,
                line_id: obj.id,
                truth_label: obj.truth_label,
            })
        })
        .collect();
    points.sort_by(|a, b| {
        (a.x, a.y, a.line_id)
            .partial_cmp(&(b.x, b.y, b.line_id))
            .expect("finite coords")
    });
    let consumed = vec![false; points.len()];
    PointPool { points, consumed }
}

/// Which guiding line a traced line represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    EgoLeft,
    EgoRight,
    AdjacentLeft,
    AdjacentRight,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::EgoLeft => "ego_left",
            Role::EgoRight => "ego_right",
            Role::AdjacentLeft => "adjacent_left",
            Role::AdjacentRight => "adjacent_right",
        }
    }
}

/// One traced guiding line: accepted points in ascending x with their
/// provenance, plus the low-preview flag raised when the traced extent
/// stays below `min_preview`.
#[derive(Debug, Clone)]
pub struct TracedLine {
    pub role: Role,
    pub points: Vec<PoolPoint>,
    pub low_preview: bool,
}

impl TracedLine {
    pub fn first_x(&self) -> f64 {
        self.points[0].x
    }

    pub fn last_x(&self) -> f64 {
        self.points[self.points.len() - 1].x
    }

    /// Longitudinal extent covered by the traced points.
    pub fn preview_len(&self) -> f64 {
        self.last_x() - self.first_x()
    }

    /// Piecewise-linear lateral position at `x`, clamped to the end
    /// values outside the traced range.
    pub fn y_at(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].x {
            return pts[0].y;
        }
        if x >= pts[pts.len() - 1].x {
            return pts[pts.len() - 1].y;
        }
        let hi = pts.partition_point(|p| p.x < x);
        let (p0, p1) = (&pts[hi - 1], &pts[hi]);
        let t = (x - p0.x) / (p1.x - p0.x);
        p0.y + t * (p1.y - p0.y)
    }

    /// Fraction of points whose generating boundary matches `label`.
    pub fn purity_vs(&self, label: usize) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        self.points.iter().filter(|p| p.truth_label == label).count() as f64
            / self.points.len() as f64
    }
}

/// Picks the three start points for one guiding line: lowest |y| on the
/// hinted side, each within `seed_max_x`, pairwise at least
/// `seed_min_separation` apart in x, and (for adjacent-lane seeding)
/// at least `adjacent_min_lateral` away from every line in `exclusion`.
/// Returned indices are in ascending x.
pub fn select_seeds(
    pool: &PointPool,
    side_hint: Side,
    exclusion: &[&TracedLine],
    params: &AldmParams,
) -> Result<[usize; 3], DetectError> {
    let mut candidates: Vec<usize> = (0..pool.len())
        .filter(|&i| {
            if pool.consumed[i] {
                return false;
            }
            let p = &pool.points[i];
            if p.x > params.seed_max_x + COORD_EPS {
                return false;
            }
            let side_ok = match side_hint {
                Side::Left => p.y > 0.0,
                Side::Right => p.y < 0.0,
            };
            if !side_ok {
                return false;
            }
            exclusion
                .iter()
                .all(|line| (p.y - line.y_at(p.x)).abs() >= params.adjacent_min_lateral)
        })
        .collect();
    candidates.sort_by(|&i, &j| {
        let (a, b) = (&pool.points[i], &pool.points[j]);
        (a.y.abs(), a.x, a.y)
            .partial_cmp(&(b.y.abs(), b.x, b.y))
            .expect("finite coords")
    });

    let mut picked: Vec<usize> = Vec::with_capacity(3);
    for idx in candidates {
        let x = pool.points[idx].x;
        if picked
            .iter()
            .all(|&p| (pool.points[p].x - x).abs() >= params.seed_min_separation)
        {
            picked.push(idx);
            if picked.len() == 3 {
                break;
            }
        }
    }
    if picked.len() < 3 {
        return Err(DetectError::SeedFailure { side: side_hint });
    }
    picked.sort_by(|&i, &j| {
        pool.points[i]
            .x
            .partial_cmp(&pool.points[j].x)
            .expect("finite coords")
    });
    Ok([picked[0], picked[1], picked[2]])
}

/// Prediction for the next point: quadratic through the last three
/// accepted points, degrading to a line (or a constant) when x values
/// coincide.
fn predictor(p0: &PoolPoint, p1: &PoolPoint, p2: &PoolPoint) -> QuadCoeffs {
    match fit_quadratic(p0.as_point(), p1.as_point(), p2.as_point()) {
        Ok(q) => q,
        Err(_) => {
            if (p2.x - p1.x).abs() < COORD_EPS {
                QuadCoeffs {
                    a: 0.0,
                    b: 0.0,
                    c: p2.y,
                }
            } else {
                let slope = (p2.y - p1.y) / (p2.x - p1.x);
                QuadCoeffs {
                    a: 0.0,
                    b: slope,
                    c: p2.y - slope * p2.x,
                }
            }
        }
    }
}

/// Residuals closer than this count as equal when ranking candidates, so
/// that float noise in the quadratic cannot reorder geometrically
/// identical points.
const RESIDUAL_TIE_EPS: f64 = 1e-9;

fn better_candidate(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    if (a.0 - b.0).abs() > RESIDUAL_TIE_EPS {
        return a.0 < b.0;
    }
    if a.1 != b.1 {
        return a.1 < b.1;
    }
    a.2 < b.2
}

/// Traces one line from three seed indices: repeatedly fits a quadratic
/// through the last three accepted points and, among unconsumed points in
/// the next `max_gap` meters, accepts the one closest in y to the
/// prediction. Ties break toward smaller x, then smaller |y|. Accepted
/// points (seeds included) are consumed in the shared pool.
///
/// A candidate whose residual reaches `adjacent_min_lateral` is treated
/// as belonging to a different line and ends the trace: anything that far
/// from the prediction is at least an adjacent marking, never the
/// continuation of this one.
pub fn trace_line(
    pool: &mut PointPool,
    seeds: [usize; 3],
    params: &AldmParams,
    role: Role,
) -> TracedLine {
    let mut accepted: Vec<usize> = seeds.to_vec();
    for &i in &seeds {
        pool.consume(i);
    }
    loop {
        let n = accepted.len();
        let quad = predictor(
            &pool.points[accepted[n - 3]],
            &pool.points[accepted[n - 2]],
            &pool.points[accepted[n - 1]],
        );
        let x_last = pool.points[accepted[n - 1]].x;
        let mut best: Option<(f64, f64, f64, usize)> = None;
        for idx in pool.window(x_last, x_last + params.max_gap) {
            if pool.consumed[idx] {
                continue;
            }
            let p = &pool.points[idx];
            let residual = (p.y - quad.eval(p.x)).abs();
            if residual >= params.adjacent_min_lateral {
                continue;
            }
            let key = (residual, p.x, p.y.abs());
            match &best {
                Some(b) if !better_candidate(key, (b.0, b.1, b.2)) => {}
                _ => best = Some((key.0, key.1, key.2, idx)),
            }
        }
        match best {
            Some((_, _, _, idx)) => {
                pool.consume(idx);
                accepted.push(idx);
            }
            None => break,
        }
    }
    let points: Vec<PoolPoint> = accepted.iter().map(|&i| pool.points[i]).collect();
    let extent = points[points.len() - 1].x - points[0].x;
    TracedLine {
        role,
        points,
        low_preview: extent < params.min_preview,
    }
}

/// Detected guiding lines of the current frame: ego lane always, adjacent
/// lanes when their seeds exist.
#[derive(Debug, Clone)]
pub struct LaneSet {
    pub ego_left: TracedLine,
    pub ego_right: TracedLine,
    pub adjacent_left: Option<TracedLine>,
    pub adjacent_right: Option<TracedLine>,
}

impl LaneSet {
    pub fn lines(&self) -> impl Iterator<Item = &TracedLine> {
        [
            Some(&self.ego_left),
            Some(&self.ego_right),
            self.adjacent_left.as_ref(),
            self.adjacent_right.as_ref(),
        ]
        .into_iter()
        .flatten()
    }

    pub fn line_count(&self) -> usize {
        self.lines().count()
    }

    /// Copy with every line reduced to at most `n` equally distributed
    /// points.
    pub fn downsampled(&self, n: usize) -> LaneSet {
        LaneSet {
            ego_left: downsample(&self.ego_left, n),
            ego_right: downsample(&self.ego_right, n),
            adjacent_left: self.adjacent_left.as_ref().map(|l| downsample(l, n)),
            adjacent_right: self.adjacent_right.as_ref().map(|l| downsample(l, n)),
        }
    }
}

/// Full frame detection: ego guiding lines first, then the adjacent
/// lanes seeded away from them. A missing adjacent lane is reported as
/// absent; a missing ego line is an error.
pub fn detect_lanes(cloud: &SensorCloud, params: &AldmParams) -> Result<LaneSet, DetectError> {
    params.validate()?;
    let mut pool = pool_points(cloud);

    let seeds_left = select_seeds(&pool, Side::Left, &[], params)?;
    let ego_left = trace_line(&mut pool, seeds_left, params, Role::EgoLeft);
    let seeds_right = select_seeds(&pool, Side::Right, &[], params)?;
    let ego_right = trace_line(&mut pool, seeds_right, params, Role::EgoRight);

    let ego_lines = [&ego_left, &ego_right];
    let adjacent_left = select_seeds(&pool, Side::Left, &ego_lines, params)
        .ok()
        .map(|seeds| trace_line(&mut pool, seeds, params, Role::AdjacentLeft));
    let adjacent_right = select_seeds(&pool, Side::Right, &ego_lines, params)
        .ok()
        .map(|seeds| trace_line(&mut pool, seeds, params, Role::AdjacentRight));

    Ok(LaneSet {
        ego_left,
        ego_right,
        adjacent_left,
        adjacent_right,
    })
}

/// Reduces a traced line to `min(n, len)` equally distributed points
/// (indices `round(i*(len-1)/(n-1))`), always keeping both endpoints.
pub fn downsample(line: &TracedLine, n: usize) -> TracedLine {
    let len = line.points.len();
    assert!(len >= 2, "downsample needs at least 2 points");
    assert!(n >= 2, "downsample needs a budget of at least 2");
    if len <= n {
        return line.clone();
    }
    let points: Vec<PoolPoint> = (0..n)
        .map(|i| {
            let idx = (i as f64 * (len - 1) as f64 / (n - 1) as f64).round() as usize;
            line.points[idx]
        })
        .collect();
    debug_assert!(points.windows(2).all(|w| w[0].x < w[1].x));
    TracedLine {
        role: line.role,
        points,
        low_preview: line.low_preview,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::road::{build_road, EgoPose, Marking, RoadSpec, Segment};
    use crate::sensor::{sense, LineObject, SensorConfig};

    fn mk_cloud(objects: Vec<(Side, usize, Vec<(f64, f64)>)>) -> SensorCloud {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, (side, label, pts)) in objects.into_iter().enumerate() {
            let obj = LineObject {
                id: i,
                truth_label: label,
                marking_type: 2,
                side,
                points: pts.into_iter().map(|(x, y)| PointXY::new(x, y)).collect(),
            };
            match side {
                Side::Left => left.push(obj),
                Side::Right => right.push(obj),
            }
        }
        SensorCloud {
            timestamp: 0.0,
            left,
            right,
        }
    }

    fn straight_one_lane(
        left: Marking,
        right: Marking,
    ) -> (crate::road::RoadGeometry, SensorConfig) {
        let geom = build_road(RoadSpec {
            segments: vec![Segment::Straight { length: 300.0 }],
            lane_count: 1,
            lane_width: 3.75,
            markings: vec![right, left],
        })
        .unwrap();
        (geom, SensorConfig::default())
    }

    #[test]
    fn default_params_are_consistent() {
        let p = AldmParams::default();
        p.validate().unwrap();
        // the seed window is one search gap past the first detectable point
        let near_offset = crate::sensor::SensorConfig::default().near_offset;
        assert!((p.seed_max_x - (p.max_gap + near_offset)).abs() < 1e-12);
    }

    #[test]
    fn pooling_preserves_counts_and_order() {
        let cloud = mk_cloud(vec![
            (Side::Left, 1, vec![(5.52, 1.8), (7.52, 1.8), (9.52, 1.8), (11.52, 1.8)]),
            (
                Side::Right,
                0,
                (0..100).map(|k| (5.52 + 2.0 * k as f64, -1.9)).collect(),
            ),
        ]);
        let pool = pool_points(&cloud);
        assert_eq!(pool.len(), 104);
        assert!(pool.points().windows(2).all(|w| w[0].x <= w[1].x));
        // at equal x the lower y sorts first
        assert_eq!(pool.points()[0].truth_label, 0);
        assert_eq!(pool.points()[1].truth_label, 1);
    }

    #[test]
    fn empty_cloud_pools_empty() {
        let pool = pool_points(&mk_cloud(vec![]));
        assert!(pool.is_empty());
    }

    #[test]
    fn quadratic_exact_parabola() {
        let q = fit_quadratic(
            PointXY::new(0.0, 0.0),
            PointXY::new(1.0, 1.0),
            PointXY::new(2.0, 4.0),
        )
        .unwrap();
        assert!((q.a - 1.0).abs() < 1e-12);
        assert!(q.b.abs() < 1e-12);
        assert!(q.c.abs() < 1e-12);
    }

    #[test]
    fn quadratic_horizontal_line() {
        let q = fit_quadratic(
            PointXY::new(0.0, 1.0),
            PointXY::new(5.0, 1.0),
            PointXY::new(10.0, 1.0),
        )
        .unwrap();
        assert!(q.a.abs() < 1e-12);
        assert!(q.b.abs() < 1e-12);
        assert!((q.c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_duplicate_x_is_degenerate() {
        assert_eq!(
            fit_quadratic(
                PointXY::new(1.0, 0.0),
                PointXY::new(1.0, 2.0),
                PointXY::new(3.0, 1.0),
            ),
            Err(DetectError::DegenerateFit)
        );
    }

    /// Independent oracle: Gaussian elimination with partial pivoting on
    /// the same 3x3 system.
    fn elimination_oracle(pts: [(f64, f64); 3]) -> [f64; 3] {
        let mut m = [[0.0f64; 4]; 3];
        for (i, (x, y)) in pts.iter().enumerate() {
            m[i] = [x * x, *x, 1.0, *y];
        }
        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
                .unwrap();
            m.swap(col, pivot);
            for row in 0..3 {
                if row != col {
                    let f = m[row][col] / m[col][col];
                    for k in col..4 {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
        [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
    }

    #[test]
    fn quadratic_matches_elimination_oracle_on_seed_triple() {
        let pts = [(5.52, -1.8), (7.52, -1.78), (9.52, -1.73)];
        let q = fit_quadratic(
            PointXY::new(pts[0].0, pts[0].1),
            PointXY::new(pts[1].0, pts[1].1),
            PointXY::new(pts[2].0, pts[2].1),
        )
        .unwrap();
        let oracle = elimination_oracle(pts);
        assert!((q.a - oracle[0]).abs() <= 1e-9 * oracle[0].abs().max(1.0));
        assert!((q.b - oracle[1]).abs() <= 1e-9 * oracle[1].abs().max(1.0));
        assert!((q.c - oracle[2]).abs() <= 1e-9 * oracle[2].abs().max(1.0));
        // frozen values from the oracle
        assert!((q.a - 0.00375).abs() < 1e-9);
        assert!((q.b - -0.0389).abs() < 1e-9);
        assert!((q.c - -1.699536).abs() < 1e-9);
        // exact interpolation
        for (x, y) in pts {
            assert!((q.eval(x) - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn seeds_on_straight_continuous_right_boundary() {
        let (geom, cfg) = straight_one_lane(Marking::Continuous, Marking::Continuous);
        let cloud = sense(&geom, &EgoPose::at(0.0), &cfg).unwrap();
        let pool = pool_points(&cloud);
        let seeds = select_seeds(&pool, Side::Right, &[], &AldmParams::default()).unwrap();
        let xs: Vec<f64> = seeds.iter().map(|&i| pool.points()[i].x).collect();
        assert!((xs[0] - 5.52).abs() < 1e-9);
        assert!((xs[1] - 7.52).abs() < 1e-9);
        assert!((xs[2] - 9.52).abs() < 1e-9);
    }

    #[test]
    fn seeds_on_nearest_right_dash() {
        // a full dash close to the car: its three sampled points are the
        // start condition
        let dash = Marking::Dashed {
            dash_len: 6.0,
            gap_len: 12.0,
            phase: 4.0,
        };
        let (geom, cfg) = straight_one_lane(Marking::Continuous, dash);
        let cloud = sense(&geom, &EgoPose::at(0.0), &cfg).unwrap();
        let pool = pool_points(&cloud);
        let seeds = select_seeds(&pool, Side::Right, &[], &AldmParams::default()).unwrap();
        let xs: Vec<f64> = seeds.iter().map(|&i| pool.points()[i].x).collect();
        assert_eq!(
            xs.iter().map(|x| (x * 100.0).round() as i64).collect::<Vec<_>>(),
            vec![552, 752, 952]
        );
        for &i in &seeds {
            assert_eq!(pool.points()[i].truth_label, 0);
        }
    }

    #[test]
    fn seed_failure_with_two_points() {
        let cloud = mk_cloud(vec![(Side::Left, 1, vec![(5.52, 1.8), (9.52, 1.85)])]);
        let pool = pool_points(&cloud);
        assert_eq!(
            select_seeds(&pool, Side::Left, &[], &AldmParams::default()),
            Err(DetectError::SeedFailure { side: Side::Left })
        );
    }

    #[test]
    fn seed_separation_skips_crowded_points() {
        let cloud = mk_cloud(vec![(
            Side::Right,
            0,
            vec![
                (5.52, -1.00),
                (6.00, -1.01),
                (7.52, -1.02),
                (9.00, -1.03),
                (9.52, -1.04),
            ],
        )]);
        let pool = pool_points(&cloud);
        let seeds = select_seeds(&pool, Side::Right, &[], &AldmParams::default()).unwrap();
        let xs: Vec<f64> = seeds.iter().map(|&i| pool.points()[i].x).collect();
        assert_eq!(xs, vec![5.52, 7.52, 9.52]);
    }

    #[test]
    fn seed_exclusion_respects_lateral_distance() {
        let ego = TracedLine {
            role: Role::EgoLeft,
            points: vec![
                PoolPoint {
                    x: 5.52,
                    y: 1.8,
                    z: 0.0,
                    line_id: 0,
                    truth_label: 1,
                },
                PoolPoint {
                    x: 25.52,
                    y: 1.8,
                    z: 0.0,
                    line_id: 0,
                    truth_label: 1,
                },
            ],
            low_preview: false,
        };
        // candidates 1.9 m away are rejected, 5.55 m away accepted
        let cloud = mk_cloud(vec![
            (Side::Left, 1, vec![(6.0, 3.7), (8.0, 3.7), (10.0, 3.7)]),
            (Side::Left, 2, vec![(6.0, 7.35), (8.0, 7.35), (10.0, 7.35)]),
        ]);
        let pool = pool_points(&cloud);
        let seeds = select_seeds(&pool, Side::Left, &[&ego], &AldmParams::default()).unwrap();
        for &i in &seeds {
            assert_eq!(pool.points()[i].truth_label, 2);
        }
    }

    #[test]
    fn trace_follows_straight_line_completely() {
        let pts: Vec<(f64, f64)> = (0..40).map(|k| (5.52 + 2.0 * k as f64, -1.875)).collect();
        let cloud = mk_cloud(vec![(Side::Right, 0, pts.clone())]);
        let mut pool = pool_points(&cloud);
        let params = AldmParams::default();
        let seeds = select_seeds(&pool, Side::Right, &[], &params).unwrap();
        let line = trace_line(&mut pool, seeds, &params, Role::EgoRight);
        assert_eq!(line.points.len(), pts.len());
        for (p, (x, y)) in line.points.iter().zip(&pts) {
            assert_eq!(p.x, *x);
            assert_eq!(p.y, *y);
        }
        assert!(!line.low_preview);
    }

    #[test]
    fn trace_jumps_the_dash_gap() {
        // seeds on dash [4,10], the next accepted point is the first
        // point of the dash across the 12 m gap
        let dash = Marking::Dashed {
            dash_len: 6.0,
            gap_len: 12.0,
            phase: 4.0,
        };
        let (geom, cfg) = straight_one_lane(Marking::Continuous, dash);
        let cloud = sense(&geom, &EgoPose::at(0.0), &cfg).unwrap();
        let mut pool = pool_points(&cloud);
        let params = AldmParams::default();
        let seeds = select_seeds(&pool, Side::Right, &[], &params).unwrap();
        let line = trace_line(&mut pool, seeds, &params, Role::EgoRight);
        assert!((line.points[3].x - 23.52).abs() < 1e-9, "x={}", line.points[3].x);
        // every accepted point stays on the seeded boundary
        assert_eq!(line.purity_vs(0), 1.0);
        // and consecutive gaps respect the limit
        for w in line.points.windows(2) {
            assert!(w[1].x - w[0].x <= params.max_gap + COORD_EPS);
        }
    }

    #[test]
    fn predictor_degrades_gracefully() {
        let p = |x: f64, y: f64| PoolPoint {
            x,
            y,
            z: 0.0,
            line_id: 0,
            truth_label: 0,
        };
        // duplicate x among the three: linear through the last two
        let quad = predictor(&p(1.0, 0.0), &p(1.0, 1.0), &p(3.0, 2.0));
        assert_eq!(quad.a, 0.0);
        assert!((quad.eval(5.0) - 3.0).abs() < 1e-12);
        // all x equal: constant at the newest y
        let quad = predictor(&p(1.0, 0.0), &p(1.0, 1.0), &p(1.0, 2.0));
        assert_eq!((quad.a, quad.b), (0.0, 0.0));
        assert_eq!(quad.eval(10.0), 2.0);
    }

    #[test]
    fn detect_lanes_one_lane_road() {
        let (geom, cfg) = straight_one_lane(Marking::Continuous, Marking::Continuous);
        let cloud = sense(&geom, &EgoPose::at(0.0), &cfg).unwrap();
        let lanes = detect_lanes(&cloud, &AldmParams::default()).unwrap();
        assert_eq!(lanes.line_count(), 2);
        assert!(lanes.adjacent_left.is_none());
        assert!(lanes.adjacent_right.is_none());
        assert_eq!(lanes.ego_left.purity_vs(1), 1.0);
        assert_eq!(lanes.ego_right.purity_vs(0), 1.0);
        // left boundary stays left of the right boundary
        assert!(lanes.ego_left.points[0].y > lanes.ego_right.points[0].y);
    }

    #[test]
    fn detect_lanes_errors_without_ego_seeds() {
        let cloud = mk_cloud(vec![(Side::Left, 1, vec![(5.0, 1.8), (7.0, 1.8), (9.0, 1.8)])]);
        assert_eq!(
            detect_lanes(&cloud, &AldmParams::default()).unwrap_err(),
            DetectError::SeedFailure { side: Side::Right }
        );
    }

    #[test]
    fn consumption_is_exclusive_across_lines() {
        let geom = build_road(RoadSpec {
            segments: vec![Segment::Straight { length: 300.0 }],
            lane_count: 3,
            lane_width: 3.75,
            markings: vec![
                Marking::Continuous,
                Marking::Dashed {
                    dash_len: 6.0,
                    gap_len: 12.0,
                    phase: 0.0,
                },
                Marking::Dashed {
                    dash_len: 6.0,
                    gap_len: 12.0,
                    phase: 0.0,
                },
                Marking::Continuous,
            ],
        })
        .unwrap();
        let ego = EgoPose::at(0.0); // centered on the middle lane
        let cloud = sense(&geom, &ego, &SensorConfig::default()).unwrap();
        let lanes = detect_lanes(&cloud, &AldmParams::default()).unwrap();
        assert_eq!(lanes.line_count(), 4);
        let mut seen = std::collections::HashSet::new();
        for line in lanes.lines() {
            for p in &line.points {
                let key = (p.line_id, (p.x * 1e9).round() as i64);
                assert!(seen.insert(key), "point consumed twice: {key:?}");
            }
        }
        // roles land on the expected boundaries
        assert_eq!(lanes.ego_right.purity_vs(1), 1.0);
        assert_eq!(lanes.ego_left.purity_vs(2), 1.0);
        assert_eq!(lanes.adjacent_right.as_ref().unwrap().purity_vs(0), 1.0);
        assert_eq!(lanes.adjacent_left.as_ref().unwrap().purity_vs(3), 1.0);
    }

    #[test]
    fn low_preview_is_flagged() {
        let cloud = mk_cloud(vec![(
            Side::Right,
            0,
            vec![(5.52, -1.8), (7.52, -1.8), (9.52, -1.8)],
        )]);
        let mut pool = pool_points(&cloud);
        let params = AldmParams::default();
        let seeds = select_seeds(&pool, Side::Right, &[], &params).unwrap();
        let line = trace_line(&mut pool, seeds, &params, Role::EgoRight);
        assert!(line.low_preview);
        assert!((line.preview_len() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn downsample_cases() {
        let mk = |n: usize| TracedLine {
            role: Role::EgoLeft,
            points: (0..n)
                .map(|i| PoolPoint {
                    x: i as f64,
                    y: 0.0,
                    z: 0.0,
                    line_id: 0,
                    truth_label: 0,
                })
                .collect(),
            low_preview: false,
        };
        let d = downsample(&mk(100), 13);
        assert_eq!(d.points.len(), 13);
        assert_eq!(d.points[0].x, 0.0);
        assert_eq!(d.points[12].x, 99.0);

        let d = downsample(&mk(13), 13);
        assert_eq!(d.points.len(), 13);
        assert!(d.points.iter().enumerate().all(|(i, p)| p.x == i as f64));

        let d = downsample(&mk(25), 13);
        let idx: Vec<usize> = d.points.iter().map(|p| p.x as usize).collect();
        assert_eq!(idx, vec![0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24]);

        // shorter than the budget: identity
        let d = downsample(&mk(5), 13);
        assert_eq!(d.points.len(), 5);
    }
}
