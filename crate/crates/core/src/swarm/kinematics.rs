//! Three omni wheels at 90°, 210° and 330° around the body centre.
//!
//! Wheel `i` rolls with tangential speed `-sin θi·vx + cos θi·vy + R·ω`,
//! where `R` is the centre-to-wheel distance. Dividing by the wheel radius
//! gives its angular velocity.

use super::robot::MotionLimits;
use super::SwarmError;

pub const WHEEL_ANGLES_DEG: [f64; 3] = [90.0, 210.0, 330.0];

/// Body-frame velocity: mm/s, mm/s, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyVelocity {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl BodyVelocity {
    pub fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Self { vx, vy, omega }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

fn wheel_trig() -> [(f64, f64); 3] {
    WHEEL_ANGLES_DEG.map(|deg| {
        let t = deg.to_radians();
        (t.sin(), t.cos())
    })
}

/// Wheel angular velocities (rad/s) for a body velocity.
pub fn inverse_kinematics(limits: &MotionLimits, v: BodyVelocity) -> Result<[f64; 3], SwarmError> {
    let speed = v.speed();
    if speed > limits.v_max {
        return Err(SwarmError::SpeedLimit {
            speed,
            limit: limits.v_max,
        });
    }
    Ok(wheel_trig().map(|(s, c)| (-s * v.vx + c * v.vy + limits.body_radius * v.omega) / limits.wheel_radius))
}

/// Body velocity from wheel angular velocities.
///
/// Closed-form inverse of the wheel matrix: with the wheels spaced by 120°,
/// `Σ sin² = Σ cos² = 3/2` and the cross and linear sums vanish.
pub fn forward_kinematics(limits: &MotionLimits, wheels: [f64; 3]) -> BodyVelocity {
    let tangential = wheels.map(|w| w * limits.wheel_radius);
    let trig = wheel_trig();
    let mut vx = 0.0;
    let mut vy = 0.0;
    let mut spin = 0.0;
    for ((s, c), t) in trig.iter().zip(tangential) {
        vx -= s * t;
        vy += c * t;
        spin += t;
    }
    BodyVelocity {
        vx: vx * 2.0 / 3.0,
        vy: vy * 2.0 / 3.0,
        omega: spin / (3.0 * limits.body_radius),
    }
}
