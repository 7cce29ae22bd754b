//! lanesim: a desk-scale lane-detection simulation.
//!
//! The crate builds synthetic roads with dashed or continuous lane
//! markings, simulates a fragmenting line sensor (every dash arrives as
//! its own line object with a naive left/right tag), and runs two
//! detectors against the resulting point clouds:
//!
//! * [`baseline`] — the classic one-object-per-side selection, which
//!   breaks down on fragmented markings;
//! * [`aldm`] — the advanced lane detection model, which pools all points
//!   regardless of side tags, seeds three start points per guiding line
//!   and traces lines by iterated quadratic prediction, detecting up to
//!   three lanes.
//!
//! [`trajectory`] fits cubic trend lines through the transmitted points
//! and derives the desired driving line; [`scenario`] wires everything
//! into a scored, reproducible harness with ground-truth labels from
//! [`road`].

pub mod aldm;
pub mod baseline;
pub mod output;
pub mod plot;
pub mod road;
pub mod scenario;
pub mod sensor;
pub mod trajectory;

pub use aldm::{detect_lanes, AldmParams, LaneSet, TracedLine};
pub use baseline::detect_baseline;
pub use road::{build_road, EgoPose, Marking, RoadGeometry, RoadSpec, Segment};
pub use scenario::{builtin, parse_scenario, run_scenario, RunOutput, Scenario};
pub use sensor::{sense, PointXY, SensorCloud, SensorConfig};
pub use trajectory::{compute_trajectory, fit_cubic, Trajectory};
