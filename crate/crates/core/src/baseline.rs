//! Baseline lane detection: exactly one line object per side, chosen as
//! the object nearest the longitudinal axis through the vehicle. Correct
//! on editor-style roads where each marking is a single object; on
//! fragmented markings it latches onto a single dash, which is the
//! failure mode the advanced model exists to fix.

use crate::sensor::{LineObject, SensorCloud};

/// Per-side selection result. Objects are clones of cloud members; no
/// points are synthesized.
#[derive(Debug, Clone, Default)]
pub struct BaselineSelection {
    pub left: Option<LineObject>,
    pub right: Option<LineObject>,
}

/// Selects, per side, the line object whose minimum |y| over its points
/// is smallest. Ties break toward the lower first-point x.
pub fn detect_baseline(cloud: &SensorCloud) -> BaselineSelection {
    BaselineSelection {
        left: nearest_to_axis(&cloud.left),
        right: nearest_to_axis(&cloud.right),
    }
}

fn nearest_to_axis(objects: &[LineObject]) -> Option<LineObject> {
    objects
        .iter()
        .min_by(|a, b| {
            (a.min_abs_y(), a.first_x())
                .partial_cmp(&(b.min_abs_y(), b.first_x()))
                .expect("finite coords")
        })
        .cloned()
}
