//! Messenger choreography: a robot assigned to edge `sender → receiver`
//! drives to the sender, picks up a packet once inside communication range,
//! drives to the receiver and hands the packet over once inside range there.

use super::robot::{RobotId, RobotPose};
use super::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessengerPhase {
    AtRest,
    ToSender,
    Receiving,
    ToReceiver,
    Delivering,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payload {
    pub value: f64,
    pub round: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessengerTask {
    /// `(sender, receiver)` node indices.
    pub edge: (usize, usize),
    /// Share of the sender's value the packet carries (`q_receiver,sender`).
    pub weight: f64,
    pub phase: MessengerPhase,
    pub payload: Option<Payload>,
    pub comm_radius: f64,
    pub round: u64,
    /// Full AtRest → … → AtRest cycles completed.
    pub cycles: u64,
}

impl MessengerTask {
    pub const DEFAULT_COMM_RADIUS: f64 = 150.0;

    pub fn new(sender: usize, receiver: usize, weight: f64) -> Self {
        Self {
            edge: (sender, receiver),
            weight,
            phase: MessengerPhase::AtRest,
            payload: None,
            comm_radius: Self::DEFAULT_COMM_RADIUS,
            round: 0,
            cycles: 0,
        }
    }

    /// Starts a trip for `round`. Returns false if already underway.
    pub fn dispatch(&mut self, round: u64) -> bool {
        if self.phase != MessengerPhase::AtRest {
            return false;
        }
        self.phase = MessengerPhase::ToSender;
        self.round = round;
        true
    }

    fn rest(&mut self) {
        self.phase = MessengerPhase::AtRest;
        self.payload = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub messenger: RobotId,
    pub sender: usize,
    pub receiver: usize,
    pub payload: Payload,
    /// Messenger-to-receiver distance at the delivering tick.
    pub distance_mm: f64,
}

/// Side effects of one messenger step, applied by the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct MessengerAction {
    pub task: MessengerTask,
    /// `Some(Some(p))` retargets, `Some(None)` stops, `None` leaves the target alone.
    pub target: Option<Option<RobotPose>>,
    pub go_home: bool,
    pub screen_text: Option<String>,
    pub delivery: Option<Delivery>,
}

/// Point one body diameter short of `node` on the line from `from`.
fn approach(from: &RobotPose, node: &RobotPose, standoff: f64) -> RobotPose {
    let (dx, dy) = (from.x - node.x, from.y - node.y);
    let d = dx.hypot(dy);
    if d <= standoff {
        return *from;
    }
    RobotPose::new(node.x + dx / d * standoff, node.y + dy / d * standoff, from.heading)
}

/// One state-machine step for the messenger robot `id`.
pub fn advance_messenger(task: &MessengerTask, id: RobotId, me: &RobotPose, scene: &Scene) -> MessengerAction {
    let mut next = task.clone();
    let mut action = MessengerAction {
        task: task.clone(),
        target: None,
        go_home: false,
        screen_text: None,
        delivery: None,
    };
    let standoff = scene.limits.body_diameter();
    let (sender, receiver) = task.edge;
    let abort = |mut t: MessengerTask| {
        t.rest();
        MessengerAction {
            task: t,
            target: None,
            go_home: true,
            screen_text: Some(String::new()),
            delivery: None,
        }
    };

    match task.phase {
        MessengerPhase::AtRest => return action,
        MessengerPhase::ToSender => {
            let (Some(node), Some(value)) = (scene.node_pose(sender), scene.node_value(sender)) else {
                return abort(next);
            };
            if me.distance_to(&node) <= task.comm_radius {
                let payload = Payload {
                    value: task.weight * value,
                    round: task.round,
                };
                next.phase = MessengerPhase::Receiving;
                next.payload = Some(payload);
                action.target = Some(None);
                action.screen_text = Some(format!("{:.3}", payload.value));
            } else {
                action.target = Some(Some(approach(me, &node, standoff)));
            }
        }
        MessengerPhase::Receiving => {
            let Some(node) = scene.node_pose(receiver) else {
                return abort(next);
            };
            next.phase = MessengerPhase::ToReceiver;
            action.target = Some(Some(approach(me, &node, standoff)));
        }
        MessengerPhase::ToReceiver => {
            let Some(node) = scene.node_pose(receiver) else {
                return abort(next);
            };
            let distance = me.distance_to(&node);
            if distance <= task.comm_radius {
                next.phase = MessengerPhase::Delivering;
                action.target = Some(None);
                action.delivery = Some(Delivery {
                    messenger: id,
                    sender,
                    receiver,
                    payload: task.payload.expect("payload is set from Receiving on"),
                    distance_mm: distance,
                });
            } else {
                action.target = Some(Some(approach(me, &node, standoff)));
            }
        }
        MessengerPhase::Delivering => {
            next.rest();
            next.cycles += 1;
            action.go_home = true;
            action.screen_text = Some(String::new());
        }
    }
    action.task = next;
    action
}
