//! Trajectory computation: least-squares cubic trend lines through the
//! transmitted guiding-line points, and the desired driving line as the
//! mid-curve between the two cubics.

use crate::aldm::TracedLine;
use crate::sensor::PointXY;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("cubic fit needs at least 4 points with distinct x, got {got}")]
    TooFewPoints { got: usize },
    #[error("rank-deficient cubic fit (fewer than 4 distinct x values)")]
    RankDeficient,
    #[error("guiding-line x ranges do not overlap")]
    NonOverlappingRanges,
}

/// Coefficients of `y = c3*x^3 + c2*x^2 + c1*x + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CubicCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    /// Sum of squared residuals against a point set.
    pub fn residual_sq(&self, points: &[PointXY]) -> f64 {
        points
            .iter()
            .map(|p| {
                let r = p.y - self.eval(p.x);
                r * r
            })
            .sum()
    }
}

/// Number of centerline samples carried by a [`Trajectory`].
pub const CENTER_SAMPLES: usize = 13;

/// Fitted boundary cubics plus the sampled lane-center curve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub left: CubicCoeffs,
    pub right: CubicCoeffs,
    pub center_samples: Vec<PointXY>,
    /// Overlapping x range the center samples span.
    pub x_range: (f64, f64),
}

impl Trajectory {
    /// Lane-center lateral position at `x`: the mean of both boundary
    /// cubics.
    pub fn center_y(&self, x: f64) -> f64 {
        0.5 * (self.left.eval(x) + self.right.eval(x))
    }
}

/// Least-squares cubic through `points`, solved via normal equations.
/// x values are centered on their mean and scaled to [-1, 1] before the
/// solve, then the coefficients are expanded back.
pub fn fit_cubic(points: &[PointXY]) -> Result<CubicCoeffs, TrajectoryError> {
    if points.len() < 4 {
        return Err(TrajectoryError::TooFewPoints { got: points.len() });
    }
    let n = points.len() as f64;
    let mu = points.iter().map(|p| p.x).sum::<f64>() / n;
    let half_span = points
        .iter()
        .map(|p| (p.x - mu).abs())
        .fold(0.0f64, f64::max);
    if half_span < 1e-9 {
        return Err(TrajectoryError::RankDeficient);
    }
    let scale = half_span;

    // normal equations in u = (x - mu)/scale
    let mut moments = [0.0f64; 7]; // sum of u^k, k = 0..6
    let mut rhs = [0.0f64; 4]; // sum of y * u^k, k = 0..3
    for p in points {
        let u = (p.x - mu) / scale;
        let mut uk = 1.0;
        for (k, m) in moments.iter_mut().enumerate() {
            *m += uk;
            if k < 4 {
                rhs[k] += p.y * uk;
            }
            uk *= u;
        }
    }
    let mut aug = [[0.0f64; 5]; 4];
    for i in 0..4 {
        for j in 0..4 {
            aug[i][j] = moments[i + j];
        }
        aug[i][4] = rhs[i];
    }
    let sol = solve4(&mut aug)?;

    // expand a0 + a1*u + a2*u^2 + a3*u^3 back to powers of x
    let b: Vec<f64> = sol
        .iter()
        .enumerate()
        .map(|(k, a)| a / scale.powi(k as i32))
        .collect();
    let (b0, b1, b2, b3) = (b[0], b[1], b[2], b[3]);
    Ok(CubicCoeffs {
        c0: b0 - b1 * mu + b2 * mu * mu - b3 * mu * mu * mu,
        c1: b1 - 2.0 * b2 * mu + 3.0 * b3 * mu * mu,
        c2: b2 - 3.0 * b3 * mu,
        c3: b3,
    })
}

/// Gauss-Jordan with partial pivoting on a 4x5 augmented system.
fn solve4(aug: &mut [[f64; 5]; 4]) -> Result<[f64; 4], TrajectoryError> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&a, &b| {
                aug[a][col]
                    .abs()
                    .partial_cmp(&aug[b][col].abs())
                    .expect("finite")
            })
            .expect("non-empty");
        aug.swap(col, pivot);
        if aug[col][col].abs() < 1e-12 {
            return Err(TrajectoryError::RankDeficient);
        }
        for row in 0..4 {
            if row != col {
                let f = aug[row][col] / aug[col][col];
                for k in col..5 {
                    aug[row][k] -= f * aug[col][k];
                }
            }
        }
    }
    Ok([
        aug[0][4] / aug[0][0],
        aug[1][4] / aug[1][1],
        aug[2][4] / aug[2][2],
        aug[3][4] / aug[3][3],
    ])
}

/// Fits both guiding lines and samples the lane center (the mean of the
/// two cubics) at [`CENTER_SAMPLES`] positions across the overlap of the
/// input x ranges.
pub fn compute_trajectory(
    left: &TracedLine,
    right: &TracedLine,
) -> Result<Trajectory, TrajectoryError> {
    let left_pts: Vec<PointXY> = left.points.iter().map(|p| p.as_point()).collect();
    let right_pts: Vec<PointXY> = right.points.iter().map(|p| p.as_point()).collect();
    let left_fit = fit_cubic(&left_pts)?;
    let right_fit = fit_cubic(&right_pts)?;
    let lo = left.first_x().max(right.first_x());
    let hi = left.last_x().min(right.last_x());
    if hi <= lo {
        return Err(TrajectoryError::NonOverlappingRanges);
    }
    let center_samples: Vec<PointXY> = (0..CENTER_SAMPLES)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (CENTER_SAMPLES - 1) as f64;
            PointXY::new(x, 0.5 * (left_fit.eval(x) + right_fit.eval(x)))
        })
        .collect();
    Ok(Trajectory {
        left: left_fit,
        right: right_fit,
        center_samples,
        x_range: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aldm::{PoolPoint, Role};

    fn line_from(points: Vec<(f64, f64)>, role: Role) -> TracedLine {
        TracedLine {
            role,
            points: points
                .into_iter()
                .map(|(x, y)| PoolPoint {
                    x,
                    y,
                    z: 0.0,
                    line_id: 0,
                    truth_label: 0,
                })
                .collect(),
            low_preview: false,
        }
    }

    fn sample_fn(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<PointXY> {
        (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                PointXY::new(x, f(x))
            })
            .collect()
    }

    #[test]
    fn recovers_exact_cubic() {
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let pts = sample_fn(f, 5.52, 205.52, 13);
        let fit = fit_cubic(&pts).unwrap();
        assert!((fit.c3 - 2.0).abs() < 1e-6 * 2.0);
        assert!(fit.c2.abs() < 1e-6);
        assert!((fit.c1 + 1.0).abs() < 1e-6);
        assert!((fit.c0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_data_gives_zero_coefficients() {
        let pts = sample_fn(|_| 0.0, 0.0, 100.0, 13);
        let fit = fit_cubic(&pts).unwrap();
        assert!(fit.c0.abs() < 1e-12);
        assert!(fit.c1.abs() < 1e-12);
        assert!(fit.c2.abs() < 1e-12);
        assert!(fit.c3.abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert_eq!(
            fit_cubic(&[PointXY::new(0.0, 0.0); 3]).unwrap_err(),
            TrajectoryError::TooFewPoints { got: 3 }
        );
        // four points but only one distinct x
        assert_eq!(
            fit_cubic(&[PointXY::new(1.0, 0.0); 4]).unwrap_err(),
            TrajectoryError::RankDeficient
        );
        // four points, two distinct x values
        let pts = [
            PointXY::new(0.0, 0.0),
            PointXY::new(0.0, 1.0),
            PointXY::new(5.0, 0.0),
            PointXY::new(5.0, 1.0),
        ];
        assert_eq!(fit_cubic(&pts).unwrap_err(), TrajectoryError::RankDeficient);
    }

    /// Independent dense oracle: plain normal equations on raw powers of
    /// (x - x0) at 10x sample density, solved by the same elimination but
    /// assembled through a different route (explicit design matrix).
    fn dense_cubic_oracle(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> CubicCoeffs {
        let x0 = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut ata = [[0.0f64; 4]; 4];
        let mut atb = [0.0f64; 4];
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let u = (x - x0) / h;
            let row = [1.0, u, u * u, u * u * u];
            for r in 0..4 {
                for c in 0..4 {
                    ata[r][c] += row[r] * row[c];
                }
                atb[r] += row[r] * f(x);
            }
        }
        let mut aug = [[0.0f64; 5]; 4];
        for r in 0..4 {
            aug[r][..4].copy_from_slice(&ata[r]);
            aug[r][4] = atb[r];
        }
        let a = solve4(&mut aug).unwrap();
        let b: Vec<f64> = a.iter().enumerate().map(|(k, v)| v / h.powi(k as i32)).collect();
        CubicCoeffs {
            c0: b[0] - b[1] * x0 + b[2] * x0 * x0 - b[3] * x0 * x0 * x0,
            c1: b[1] - 2.0 * b[2] * x0 + 3.0 * b[3] * x0 * x0,
            c2: b[2] - 3.0 * b[3] * x0,
            c3: b[3],
        }
    }

    #[test]
    fn circle_fit_residual_within_dense_oracle_bound() {
        let r = 500.0;
        let circle = |x: f64| -(r - (r * r - x * x).sqrt());
        let pts = sample_fn(circle, 5.52, 200.0, 13);
        let fit = fit_cubic(&pts).unwrap();
        let max_err_13 = pts
            .iter()
            .map(|p| (fit.eval(p.x) - p.y).abs())
            .fold(0.0f64, f64::max);

        let dense = dense_cubic_oracle(&circle, 5.52, 200.0, 130);
        let mut max_err_dense = 0.0f64;
        for i in 0..=1000 {
            let x = 5.52 + (200.0 - 5.52) * i as f64 / 1000.0;
            max_err_dense = max_err_dense.max((dense.eval(x) - circle(x)).abs());
        }
        assert!(
            max_err_13 <= max_err_dense + 1e-9,
            "13-point residual {max_err_13} exceeds dense bound {max_err_dense}"
        );
    }

    #[test]
    fn least_squares_is_locally_optimal() {
        let r = 500.0;
        let circle = |x: f64| -(r - (r * r - x * x).sqrt());
        let pts = sample_fn(circle, 5.52, 200.0, 13);
        let fit = fit_cubic(&pts).unwrap();
        let base = fit.residual_sq(&pts);
        for delta in [1e-3, -1e-3] {
            for coeff in 0..4 {
                let mut probe = fit;
                match coeff {
                    0 => probe.c0 += delta,
                    1 => probe.c1 += delta,
                    2 => probe.c2 += delta,
                    _ => probe.c3 += delta,
                }
                assert!(
                    probe.residual_sq(&pts) >= base - 1e-12,
                    "perturbing c{coeff} by {delta} decreased the residual"
                );
            }
        }
    }

    #[test]
    fn straight_lane_centerline_is_zero() {
        let xs: Vec<f64> = (0..13).map(|i| 5.52 + 16.0 * i as f64).collect();
        let left = line_from(xs.iter().map(|&x| (x, 1.875)).collect(), Role::EgoLeft);
        let right = line_from(xs.iter().map(|&x| (x, -1.875)).collect(), Role::EgoRight);
        let traj = compute_trajectory(&left, &right).unwrap();
        assert_eq!(traj.center_samples.len(), 13);
        for p in &traj.center_samples {
            assert!(p.y.abs() < 1e-9);
        }
    }

    #[test]
    fn shifted_lane_shifts_centerline() {
        let xs: Vec<f64> = (0..13).map(|i| 5.52 + 16.0 * i as f64).collect();
        let left = line_from(xs.iter().map(|&x| (x, 2.375)).collect(), Role::EgoLeft);
        let right = line_from(xs.iter().map(|&x| (x, -1.375)).collect(), Role::EgoRight);
        let traj = compute_trajectory(&left, &right).unwrap();
        for p in &traj.center_samples {
            assert!((p.y - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn midline_is_symmetric_under_swap() {
        let xs: Vec<f64> = (0..13).map(|i| 5.52 + 15.0 * i as f64).collect();
        let curve = |x: f64, off: f64| off - x * x / 1000.0 + x * 3e-6 * x * x;
        let left = line_from(xs.iter().map(|&x| (x, curve(x, 1.875))).collect(), Role::EgoLeft);
        let right = line_from(
            xs.iter().map(|&x| (x, curve(x, -1.875))).collect(),
            Role::EgoRight,
        );
        let t1 = compute_trajectory(&left, &right).unwrap();
        let t2 = compute_trajectory(&right, &left).unwrap();
        for (a, b) in t1.center_samples.iter().zip(&t2.center_samples) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
    }

    #[test]
    fn translation_equivariance() {
        let xs: Vec<f64> = (0..13).map(|i| 5.52 + 15.0 * i as f64).collect();
        let curve = |x: f64, off: f64| off - x * x / 1000.0;
        let delta = 0.7;
        let mk = |off: f64, role| line_from(xs.iter().map(|&x| (x, curve(x, off))).collect(), role);
        let base = compute_trajectory(&mk(1.875, Role::EgoLeft), &mk(-1.875, Role::EgoRight)).unwrap();
        let shifted = compute_trajectory(
            &mk(1.875 + delta, Role::EgoLeft),
            &mk(-1.875 + delta, Role::EgoRight),
        )
        .unwrap();
        for (a, b) in base.center_samples.iter().zip(&shifted.center_samples) {
            assert!((b.y - a.y - delta).abs() < 1e-9);
        }
    }

    #[test]
    fn non_overlapping_ranges_error() {
        let left = line_from((0..5).map(|i| (i as f64, 1.0)).collect(), Role::EgoLeft);
        let right = line_from((0..5).map(|i| (10.0 + i as f64, -1.0)).collect(), Role::EgoRight);
        assert_eq!(
            compute_trajectory(&left, &right).unwrap_err(),
            TrajectoryError::NonOverlappingRanges
        );
    }
}
