use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsConfig, VehicleKind};
use crate::routing::{Objective, ObjectiveSpec};
use crate::sim::SimError;
use crate::state::DisseminationMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S4,
        ScenarioId::S5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::S1 => "S1",
            ScenarioId::S2 => "S2",
            ScenarioId::S3 => "S3",
            ScenarioId::S4 => "S4",
            ScenarioId::S5 => "S5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
    }

    /// Fleet, routing mode and objective that define the scenario.
    pub fn definition(self) -> (VehicleKind, RoutingMode, Objective) {
        match self {
            ScenarioId::S1 => (VehicleKind::Hdv, RoutingMode::Pretrip, Objective::Tt),
            ScenarioId::S2 => (VehicleKind::Cav, RoutingMode::E2ecav, Objective::Tt),
            ScenarioId::S3 => (VehicleKind::Cav, RoutingMode::E2ecav, Objective::R1),
            ScenarioId::S4 => (VehicleKind::Cav, RoutingMode::E2ecav, Objective::TtStar),
            ScenarioId::S5 => (VehicleKind::Cav, RoutingMode::E2ecav, Objective::R2),
        }
    }
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingMode {
    /// Travel-time shortest path fixed at entry.
    Pretrip,
    /// Next hop chosen at every intersection.
    E2ecav,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub fleet: VehicleKind,
    pub routing: RoutingMode,
    pub objective: Objective,
    #[serde(default)]
    pub seed: u64,
    /// Δj, s
    #[serde(default = "defaults::routing_interval")]
    pub routing_interval_s: u32,
    /// Δω, s
    #[serde(default = "defaults::intermediate_interval")]
    pub intermediate_interval_s: u32,
    #[serde(default = "defaults::warmup")]
    pub warmup_s: u32,
    #[serde(default)]
    pub dissemination: DisseminationMode,
    #[serde(default = "defaults::gridlock_horizon")]
    pub gridlock_horizon_s: u32,
    /// Floor on reported space-mean speed, m/s.
    #[serde(default = "defaults::min_report_speed")]
    pub min_report_speed: f64,
    #[serde(default)]
    pub stale_penalty: f64,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
}

mod defaults {
    pub fn routing_interval() -> u32 {
        60
    }
    pub fn intermediate_interval() -> u32 {
        20
    }
    pub fn warmup() -> u32 {
        300
    }
    pub fn gridlock_horizon() -> u32 {
        1800
    }
    pub fn min_report_speed() -> f64 {
        0.5
    }
}

impl ScenarioConfig {
    pub fn preset(scenario: ScenarioId, seed: u64) -> Self {
        let (fleet, routing, objective) = scenario.definition();
        ScenarioConfig {
            scenario,
            fleet,
            routing,
            objective,
            seed,
            routing_interval_s: defaults::routing_interval(),
            intermediate_interval_s: defaults::intermediate_interval(),
            warmup_s: defaults::warmup(),
            dissemination: DisseminationMode::Idealized,
            gridlock_horizon_s: defaults::gridlock_horizon(),
            min_report_speed: defaults::min_report_speed(),
            stale_penalty: 0.0,
            dynamics: DynamicsConfig::default(),
        }
    }

    pub fn objective_spec(&self) -> ObjectiveSpec {
        ObjectiveSpec {
            stale_penalty: self.stale_penalty,
            ..self.objective.spec()
        }
    }

    /// Number of intermediate windows per routing interval.
    pub fn windows_per_interval(&self) -> usize {
        (self.routing_interval_s / self.intermediate_interval_s) as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        let (fleet, routing, objective) = self.scenario.definition();
        if (self.fleet, self.routing, self.objective) != (fleet, routing, objective) {
            return bad(format!(
                "{} requires fleet {:?}, routing {:?} and objective {}",
                self.scenario, fleet, routing, objective
            ));
        }
        if self.routing_interval_s == 0 || self.intermediate_interval_s == 0 {
            return bad("intervals must be positive".into());
        }
        if !self.routing_interval_s.is_multiple_of(self.intermediate_interval_s) {
            return bad(format!(
                "routing interval {} s is not a multiple of the intermediate interval {} s",
                self.routing_interval_s, self.intermediate_interval_s
            ));
        }
        if self.gridlock_horizon_s == 0 {
            return bad("gridlock horizon must be positive".into());
        }
        if !(self.min_report_speed > 0.0) {
            return bad("minimum report speed must be positive".into());
        }
        if !(self.stale_penalty >= 0.0) {
            return bad("stale penalty must be non-negative".into());
        }
        if self.dynamics.service_rate == 0 || !(self.dynamics.emergency_decel > 0.0) {
            return bad("service rate and emergency deceleration must be positive".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
