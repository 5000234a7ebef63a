//! Scenario runs: demand, fleet, the tick loop, and run records.

pub mod config;
pub mod demand;
pub mod engine;
pub mod grid;
pub mod records;

use thiserror::Error;

use crate::dynamics::VehicleId;
use crate::routing::RoutingError;
use crate::state::ProtocolError;

pub use config::{RoutingMode, ScenarioConfig, ScenarioId};
pub use demand::{
    generate_arrivals, rng_stream, Arrival, DemandError, DemandProfile, DemandRow,
    FleetComposition, FleetShare, OdDemand,
};
pub use engine::{
    prior_rates, run_arrivals, run_scenario, vehicle_spec, GridlockDump, RunOptions, RunOutput,
    RunStats, StuckVehicle, TrajectoryPoint,
};
pub use grid::{generate_grid_network, Bottleneck, GridDemand, GridSpec};
pub use records::{DecisionKind, DecisionRecord, LinkIntervalRecord, TripRecord};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("routing vehicle {vehicle:?}: {source}")]
    Routing {
        vehicle: VehicleId,
        source: RoutingError,
    },
    #[error(transparent)]
    Protocol(ProtocolError),
    #[error("gridlock: nothing moved between t={} and t={}", .0.last_progress, .0.t)]
    Gridlock(Box<GridlockDump>),
    #[error("vehicle conservation violated at t={t}: {injected} injected, {waiting} waiting, {on_links} on links, {arrived} arrived")]
    Conservation {
        t: u32,
        injected: u32,
        waiting: u32,
        on_links: u32,
        arrived: u32,
    },
}
