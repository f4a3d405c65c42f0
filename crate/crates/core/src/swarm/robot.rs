use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::messenger::MessengerTask;
use super::SwarmError;

/// The calibrated rectangle robots move on, origin at a corner, millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub width_mm: f64,
    pub height_mm: f64,
}

impl Default for Surface {
    fn default() -> Self {
        Self {
            width_mm: 1000.0,
            height_mm: 700.0,
        }
    }
}

impl Surface {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width_mm).contains(&x) && (0.0..=self.height_mm).contains(&y)
    }

    /// Clamps a centre point so a body of `margin` radius stays on the surface.
    pub fn clamp_inside(&self, x: f64, y: f64, margin: f64) -> (f64, f64) {
        (
            x.clamp(margin, (self.width_mm - margin).max(margin)),
            y.clamp(margin, (self.height_mm - margin).max(margin)),
        )
    }

    pub fn check(&self, x: f64, y: f64) -> Result<(), SwarmError> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(SwarmError::OffSurface {
                x,
                y,
                width: self.width_mm,
                height: self.height_mm,
            })
        }
    }
}

/// Position in millimetres and heading in radians, normalised to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_heading(heading),
        }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    pub fn distance_to(&self, other: &RobotPose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

fn normalize_heading(h: f64) -> f64 {
    let r = h.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const OFF: Rgb = Rgb([0, 0, 0]);
    pub const WHITE: Rgb = Rgb([255, 255, 255]);
}

pub type RobotId = u32;

/// Wire-level role name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    NodeDisplay,
    Messenger,
    Widget,
    DataPoint,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::NodeDisplay => "node_display",
            Role::Messenger => "messenger",
            Role::Widget => "widget",
            Role::DataPoint => "data_point",
        })
    }
}

/// A robot's role with the state that comes with it.
#[derive(Debug, Clone, PartialEq)]
pub enum RobotRole {
    /// Shows the value of graph node `node` (0-based).
    NodeDisplay { node: usize },
    /// Carries packets along one edge.
    Messenger { task: MessengerTask, home: (f64, f64) },
    /// Physical control, e.g. one end of a range slider.
    Widget { slot: usize },
    /// Marks one sample of a plotted data series; parked when `None`.
    DataPoint { sample: Option<usize> },
}

impl RobotRole {
    pub fn kind(&self) -> Role {
        match self {
            RobotRole::NodeDisplay { .. } => Role::NodeDisplay,
            RobotRole::Messenger { .. } => Role::Messenger,
            RobotRole::Widget { .. } => Role::Widget,
            RobotRole::DataPoint { .. } => Role::DataPoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub id: RobotId,
    pub pose: RobotPose,
    pub role: RobotRole,
    pub led: Rgb,
    pub screen_text: String,
    pub target: Option<RobotPose>,
}

impl Robot {
    pub fn new(id: RobotId, pose: RobotPose, role: RobotRole) -> Self {
        Self {
            id,
            pose,
            role,
            led: Rgb::WHITE,
            screen_text: String::new(),
            target: None,
        }
    }

    pub fn node(&self) -> Option<usize> {
        match self.role {
            RobotRole::NodeDisplay { node } => Some(node),
            _ => None,
        }
    }
}

/// Physical limits of the omni-wheel platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionLimits {
    /// mm/s
    pub v_max: f64,
    /// mm
    pub arrival_threshold: f64,
    /// mm (38 mm wheels)
    pub wheel_radius: f64,
    /// Centre to wheel contact, mm.
    pub body_radius: f64,
}

impl Default for MotionLimits {
    fn default() -> Self {
        Self {
            v_max: 200.0,
            arrival_threshold: 2.0,
            wheel_radius: 19.0,
            body_radius: 50.0,
        }
    }
}

impl MotionLimits {
    pub const WHEEL_COUNT: usize = 3;

    pub fn body_diameter(&self) -> f64 {
        2.0 * self.body_radius
    }

    pub fn validate(&self) -> Result<(), SwarmError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.v_max) {
            return Err(SwarmError::InvalidLimits("v_max must be positive"));
        }
        if !positive(self.wheel_radius) || !positive(self.body_radius) {
            return Err(SwarmError::InvalidLimits("wheel and body radii must be positive"));
        }
        if !(self.arrival_threshold.is_finite() && self.arrival_threshold >= 0.0) {
            return Err(SwarmError::InvalidLimits("arrival threshold must be nonnegative"));
        }
        Ok(())
    }
}
