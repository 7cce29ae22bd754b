//! File emission for scenario runs: per-point CSVs, the trajectory CSV
//! and the versioned JSON report. All output is UTF-8 with '.' as the
//! decimal separator and is byte-stable across runs.

use crate::scenario::{FrameArtifacts, RunReport};
use std::io::Write;

/// `points.csv`: every sensed point of every frame, one row per point.
pub fn write_points_csv<W: Write>(arts: &[FrameArtifacts], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "frame,side,line_id,truth_label,marking_type,point_index,x,y,z"
    )?;
    for art in arts {
        for obj in art.cloud.objects() {
            for (i, p) in obj.points.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    art.frame,
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
    }
    Ok(())
}

/// `traced.csv`: the full traced guiding lines with per-point provenance.
pub fn write_traced_csv<W: Write>(arts: &[FrameArtifacts], mut w: W) -> std::io::Result<()> {
    writeln!(w, "frame,role,point_index,x,y,z,line_id,truth_label")?;
    for art in arts {
        let Some(lanes) = &art.lanes else { continue };
        for line in lanes.lines() {
            for (i, p) in line.points.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    art.frame,
                    line.role.as_str(),
                    i,
                    p.x,
                    p.y,
                    p.z,
                    p.line_id,
                    p.truth_label
                )?;
            }
        }
    }
    Ok(())
}

/// `trajectory.csv`: fitted boundary cubics and the centerline at the
/// center-sample positions.
pub fn write_trajectory_csv<W: Write>(arts: &[FrameArtifacts], mut w: W) -> std::io::Result<()> {
    writeln!(w, "frame,x,y_left_fit,y_right_fit,y_center")?;
    for art in arts {
        let Some(traj) = &art.trajectory else { continue };
        for p in &traj.center_samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                art.frame,
                p.x,
                traj.left.eval(p.x),
                traj.right.eval(p.x),
                p.y
            )?;
        }
    }
    Ok(())
}

/// `report.json`, pretty-printed with a trailing newline.
pub fn write_report_json<W: Write>(report: &RunReport, mut w: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)
}
