use serde::{Deserialize, Serialize};

use super::runner::{run_scenario, RunLength};
use super::scenario::ScenarioConfig;
use super::SessionError;
use crate::consensus::Trajectory;
use crate::trajectory_csv;

/// A run exported from a session: the scenario that reproduces it, how many
/// iterations it covered, and its trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunBundle {
    pub scenario: ScenarioConfig,
    pub iterations: usize,
    pub csv: String,
}

impl RunBundle {
    pub fn new(scenario: ScenarioConfig, trajectory: &Trajectory) -> Self {
        Self {
            scenario,
            iterations: trajectory.iterations_run(),
            csv: trajectory_csv::write_trajectory(trajectory),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, SessionError> {
        let bundle: Self = serde_json::from_str(text).map_err(|e| SessionError::Scenario(e.to_string()))?;
        bundle.scenario.validate()?;
        trajectory_csv::read_rows(&bundle.csv)?;
        Ok(bundle)
    }

    /// Re-runs the scenario headless and returns the resulting CSV.
    pub fn replay(&self) -> Result<String, SessionError> {
        let t = run_scenario(&self.scenario, RunLength::Iterations(self.iterations))?;
        Ok(trajectory_csv::write_trajectory(&t))
    }

    /// True when a replay reproduces the stored CSV byte for byte.
    pub fn reproduces(&self) -> Result<bool, SessionError> {
        Ok(self.replay()? == self.csv)
    }
}
