//! The tabletop: robots on a millimetre work surface, the layouts that map
//! algorithm values onto it, omni-wheel kinematics and the messenger robots
//! that carry packets along graph edges.

mod dataset;
mod kinematics;
mod layout;
mod messenger;
mod robot;
mod scene;

use thiserror::Error;

pub use dataset::{read_geo_csv, read_timeseries_csv, GeoRow, ScatterRow, SeriesMark, TimeSample};
pub use kinematics::{forward_kinematics, inverse_kinematics, BodyVelocity, WHEEL_ANGLES_DEG};
pub use layout::{
    place_dataset, place_timeseries, pose_to_value, ramp_color, timeseries_window, value_to_pose, Axis, Dataset,
    Layout, LayoutKind, Placed, Placement, TimeSeriesPlacement, TimeWindow, PALETTE, RAMP,
};
pub use messenger::{advance_messenger, Delivery, MessengerAction, MessengerPhase, MessengerTask, Payload};
pub use robot::{MotionLimits, Rgb, Robot, RobotId, RobotPose, RobotRole, Role, Surface};
pub use scene::{Scene, TickReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwarmError {
    #[error("{n} node columns do not fit at one body diameter spacing (capacity {capacity}); use a wider surface")]
    ColumnCapacity { n: usize, capacity: usize },
    #[error("layout is {actual:?}, operation needs {expected:?}")]
    WrongLayout { expected: LayoutKind, actual: LayoutKind },
    #[error("degenerate {0} axis: min must be below max")]
    DegenerateAxis(&'static str),
    #[error("pose ({x}, {y}) is outside the {width}x{height} mm surface")]
    OffSurface { x: f64, y: f64, width: f64, height: f64 },
    #[error("body speed {speed} mm/s exceeds the {limit} mm/s limit")]
    SpeedLimit { speed: f64, limit: f64 },
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("unknown robot {0}")]
    UnknownRobot(RobotId),
    #[error("invalid motion limits: {0}")]
    InvalidLimits(&'static str),
    #[error("node index {node} out of range ({n} nodes)")]
    NodeIndex { node: usize, n: usize },
    #[error("dataset: {0}")]
    Dataset(String),
}
