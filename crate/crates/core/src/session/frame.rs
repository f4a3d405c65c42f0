use serde::{Deserialize, Serialize};

use crate::swarm::{Robot, RobotId, Role};

/// One robot as the client draws it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotFrame {
    pub id: RobotId,
    pub x_mm: f64,
    pub y_mm: f64,
    pub heading_rad: f64,
    pub rgb: [u8; 3],
    pub text: String,
    pub role: Role,
}

impl From<&Robot> for RobotFrame {
    fn from(r: &Robot) -> Self {
        Self {
            id: r.id,
            x_mm: r.pose.x,
            y_mm: r.pose.y,
            heading_rad: r.pose.heading,
            rgb: r.led.0,
            text: r.screen_text.clone(),
            role: r.role.kind(),
        }
    }
}

/// A complete picture of a session at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFrame {
    pub frame: u64,
    pub t_ms: f64,
    pub iteration: usize,
    pub converged: bool,
    pub running: bool,
    pub robots: Vec<RobotFrame>,
    pub values: Vec<f64>,
}

impl EventFrame {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames serialise")
    }
}
