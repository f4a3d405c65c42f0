use super::messenger::{advance_messenger, Delivery, MessengerPhase, MessengerTask};
use super::robot::{MotionLimits, Robot, RobotId, RobotPose, RobotRole, Surface};
use super::SwarmError;

/// Outcome of one [`Scene::tick`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickReport {
    pub deliveries: Vec<Delivery>,
    /// Largest displacement of any robot during the tick, mm.
    pub max_displacement: f64,
}

/// All robots on the table. Robots never leave the surface minus one body
/// radius; poses and targets are clamped into that region.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub surface: Surface,
    pub limits: MotionLimits,
    robots: Vec<Robot>,
    node_values: Vec<f64>,
    next_id: RobotId,
}

impl Scene {
    pub fn new(surface: Surface, limits: MotionLimits) -> Result<Self, SwarmError> {
        limits.validate()?;
        Ok(Self {
            surface,
            limits,
            robots: Vec::new(),
            node_values: Vec::new(),
            next_id: 1,
        })
    }

    fn clamp(&self, pose: RobotPose) -> RobotPose {
        let (x, y) = self.surface.clamp_inside(pose.x, pose.y, self.limits.body_radius);
        RobotPose::new(x, y, pose.heading)
    }

    pub fn add_robot(&mut self, pose: RobotPose, role: RobotRole) -> RobotId {
        let id = self.next_id;
        self.next_id += 1;
        let pose = self.clamp(pose);
        self.robots.push(Robot::new(id, pose, role));
        id
    }

    pub fn remove_robot(&mut self, id: RobotId) -> Result<Robot, SwarmError> {
        let k = self.index(id)?;
        Ok(self.robots.remove(k))
    }

    pub fn clear(&mut self) {
        self.robots.clear();
    }

    fn index(&self, id: RobotId) -> Result<usize, SwarmError> {
        self.robots
            .iter()
            .position(|r| r.id == id)
            .ok_or(SwarmError::UnknownRobot(id))
    }

    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }

    pub fn robot(&self, id: RobotId) -> Option<&Robot> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn robot_mut(&mut self, id: RobotId) -> Option<&mut Robot> {
        self.robots.iter_mut().find(|r| r.id == id)
    }

    pub fn node_robot(&self, node: usize) -> Option<&Robot> {
        self.robots.iter().find(|r| r.node() == Some(node))
    }

    pub fn node_pose(&self, node: usize) -> Option<RobotPose> {
        self.node_robot(node).map(|r| r.pose)
    }

    pub fn node_value(&self, node: usize) -> Option<f64> {
        self.node_values.get(node).copied()
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Updates the values node robots display.
    pub fn set_node_values(&mut self, values: &[f64]) {
        self.node_values = values.to_vec();
        for r in &mut self.robots {
            if let RobotRole::NodeDisplay { node } = r.role {
                if let Some(v) = values.get(node) {
                    r.screen_text = format!("{v:.3}");
                }
            }
        }
    }

    /// Sets a motion target, clamped to the reachable region.
    pub fn set_target(&mut self, id: RobotId, target: RobotPose) -> Result<(), SwarmError> {
        let target = self.clamp(target);
        let k = self.index(id)?;
        self.robots[k].target = Some(target);
        Ok(())
    }

    /// Teleports a robot (a human picked it up and put it down).
    pub fn place(&mut self, id: RobotId, pose: RobotPose) -> Result<(), SwarmError> {
        let pose = self.clamp(pose);
        let k = self.index(id)?;
        self.robots[k].pose = pose;
        self.robots[k].target = None;
        Ok(())
    }

    /// Sends every resting messenger on a trip for `round`; returns how many left.
    pub fn dispatch_messengers(&mut self, round: u64) -> usize {
        self.robots
            .iter_mut()
            .filter_map(|r| match &mut r.role {
                RobotRole::Messenger { task, .. } => Some(task.dispatch(round)),
                _ => None,
            })
            .filter(|&started| started)
            .count()
    }

    pub fn messengers(&self) -> impl Iterator<Item = (&Robot, &MessengerTask)> {
        self.robots.iter().filter_map(|r| match &r.role {
            RobotRole::Messenger { task, .. } => Some((r, task)),
            _ => None,
        })
    }

    pub fn messengers_idle(&self) -> bool {
        self.messengers().all(|(_, t)| t.phase == MessengerPhase::AtRest)
    }

    /// Moves every robot with a target by at most `v_max · dt` along a
    /// straight line, then steps the messenger state machines.
    pub fn tick(&mut self, dt: f64) -> Result<TickReport, SwarmError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SwarmError::BadTimeStep(dt));
        }
        let max_step = self.limits.v_max * dt;
        let threshold = self.limits.arrival_threshold;
        let mut report = TickReport::default();

        for r in &mut self.robots {
            let Some(target) = r.target else { continue };
            let (dx, dy) = (target.x - r.pose.x, target.y - r.pose.y);
            let d = dx.hypot(dy);
            let step = d.min(max_step);
            if step > 0.0 {
                if step == d {
                    r.pose.x = target.x;
                    r.pose.y = target.y;
                } else {
                    r.pose.x += dx / d * step;
                    r.pose.y += dy / d * step;
                }
            }
            report.max_displacement = report.max_displacement.max(step);
            if d - step <= threshold {
                r.target = None;
            }
        }

        for k in 0..self.robots.len() {
            let (task, home) = match &self.robots[k].role {
                RobotRole::Messenger { task, home } => (task.clone(), *home),
                _ => continue,
            };
            let robot = &self.robots[k];
            let action = advance_messenger(&task, robot.id, &robot.pose, self);
            let target = if action.go_home {
                Some(Some(self.clamp(RobotPose::new(home.0, home.1, robot.pose.heading))))
            } else {
                action.target.map(|t| t.map(|p| self.clamp(p)))
            };
            let robot = &mut self.robots[k];
            if let RobotRole::Messenger { task, .. } = &mut robot.role {
                *task = action.task;
            }
            if let Some(t) = target {
                robot.target = t;
            }
            if let Some(text) = action.screen_text {
                robot.screen_text = text;
            }
            if let Some(d) = action.delivery {
                if let Some(node) = self.robots.iter_mut().find(|r| r.node() == Some(d.receiver)) {
                    node.screen_text = format!("+{:.3}", d.payload.value);
                }
                report.deliveries.push(d);
            }
        }
        Ok(report)
    }
}
