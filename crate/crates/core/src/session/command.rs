use serde::{Deserialize, Serialize};

use crate::swarm::{Layout, RobotId};

/// A user manipulation, as sent over the wire. Node labels are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    /// A robot was picked up and put down at `(x_mm, y_mm)`.
    MoveRobot { id: RobotId, x_mm: f64, y_mm: f64 },
    /// A new node robot was placed; its height sets its initial value.
    AddNode {
        x_mm: f64,
        y_mm: f64,
        /// Nodes the new node reads from.
        #[serde(default)]
        reads: Vec<usize>,
        /// Nodes that read the new node.
        #[serde(default)]
        read_by: Vec<usize>,
    },
    RemoveNode { node: usize },
    /// `from` reads `to` when `present`.
    SetEdge {
        from: usize,
        to: usize,
        #[serde(default = "present")]
        present: bool,
    },
    Start,
    Pause,
    /// Back to the scenario as loaded.
    Reset,
    SetLayout { layout: Layout },
    SetTimeWindow { t_min: f64, t_max: f64 },
}

fn present() -> bool {
    true
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::MoveRobot { .. } => "move_robot",
            Command::AddNode { .. } => "add_node",
            Command::RemoveNode { .. } => "remove_node",
            Command::SetEdge { .. } => "set_edge",
            Command::Start => "start",
            Command::Pause => "pause",
            Command::Reset => "reset",
            Command::SetLayout { .. } => "set_layout",
            Command::SetTimeWindow { .. } => "set_time_window",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wire_examples() {
        let c: Command = serde_json::from_str(r#"{"cmd": "move_robot", "id": 3, "x_mm": 120.0, "y_mm": 250.0}"#).unwrap();
        assert_eq!(c, Command::MoveRobot { id: 3, x_mm: 120.0, y_mm: 250.0 });
        let c: Command = serde_json::from_str(r#"{"cmd": "set_edge", "from": 9, "to": 1}"#).unwrap();
        assert_eq!(c, Command::SetEdge { from: 9, to: 1, present: true });
        let c: Command = serde_json::from_str(r#"{"cmd": "start"}"#).unwrap();
        assert_eq!(c, Command::Start);
        let c: Command =
            serde_json::from_str(r#"{"cmd": "set_layout", "layout": {"kind": "iteration_chart", "x_mm": [50, 950], "y": {"value": [0, 5], "mm": [50, 650]}}}"#)
                .unwrap();
        assert_eq!(c.name(), "set_layout");
    }

    #[test]
    fn rejects_unknown_command() {
        assert!(serde_json::from_str::<Command>(r#"{"cmd": "explode"}"#).is_err());
    }

    #[test]
    fn round_trips() {
        let all = [
            Command::AddNode { x_mm: 1.0, y_mm: 2.0, reads: vec![1], read_by: vec![2] },
            Command::RemoveNode { node: 2 },
            Command::SetEdge { from: 1, to: 2, present: false },
            Command::Pause,
            Command::Reset,
            Command::SetTimeWindow { t_min: 2008.0, t_max: 2012.0 },
        ];
        for c in all {
            let text = serde_json::to_string(&c).unwrap();
            assert!(text.contains(c.name()));
            assert_eq!(serde_json::from_str::<Command>(&text).unwrap(), c);
        }
    }
}
