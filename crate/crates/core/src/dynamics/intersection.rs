//! First-in-first-out service of vehicles waiting at an intersection's stoplines.

use std::collections::BTreeMap;

use crate::dynamics::{DynamicsError, VehicleId};
use crate::network::LinkId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueuedVehicle {
    pub vehicle: VehicleId,
    pub from_link: LinkId,
    pub arrived_at: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant {
    pub vehicle: VehicleId,
    pub from_link: LinkId,
    pub arrived_at: u32,
    pub granted_at: u32,
}

impl Grant {
    pub fn idling(&self) -> f64 {
        (self.granted_at - self.arrived_at) as f64
    }
}

/// Per-approach FIFO queues of vehicles standing at the stopline.
#[derive(Debug, Clone, Default)]
pub struct IntersectionQueueState {
    queues: BTreeMap<LinkId, Vec<QueuedVehicle>>,
    service_rate: u32,
}

impl IntersectionQueueState {
    pub fn new(service_rate: u32) -> Self {
        IntersectionQueueState {
            queues: BTreeMap::new(),
            service_rate,
        }
    }

    pub fn service_rate(&self) -> u32 {
        self.service_rate
    }

    pub fn push(&mut self, entry: QueuedVehicle) {
        debug_assert!(!self.contains(entry.vehicle), "vehicle queued twice");
        self.queues.entry(entry.from_link).or_default().push(entry);
    }

    pub fn contains(&self, vehicle: VehicleId) -> bool {
        self.queues.values().flatten().any(|q| q.vehicle == vehicle)
    }

    pub fn len(&self) -> usize {
        self.queues.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn waiting(&self) -> impl Iterator<Item = &QueuedVehicle> {
        self.queues.values().flatten()
    }

    /// Grants crossings at `tick` to the earliest-arrived vehicles across all
    /// approaches, at most `service_rate` of them. Only vehicles that arrived
    /// before `tick` are eligible. `try_admit` is asked, in FIFO order, whether
    /// the vehicle can physically enter its next link (and moves it if so);
    /// a refused vehicle keeps its place and the next one is tried.
    pub fn serve(
        &mut self,
        tick: u32,
        mut try_admit: impl FnMut(&QueuedVehicle) -> bool,
    ) -> Vec<Grant> {
        let mut order: Vec<QueuedVehicle> = self
            .waiting()
            .filter(|q| q.arrived_at < tick)
            .copied()
            .collect();
        order.sort_by_key(|q| (q.arrived_at, q.from_link, q.vehicle));
        let mut grants = Vec::new();
        for q in order {
            if grants.len() as u32 >= self.service_rate {
                break;
            }
            if try_admit(&q) {
                let queue = self.queues.get_mut(&q.from_link).expect("queue exists");
                queue.retain(|e| e.vehicle != q.vehicle);
                if queue.is_empty() {
                    self.queues.remove(&q.from_link);
                }
                grants.push(Grant {
                    vehicle: q.vehicle,
                    from_link: q.from_link,
                    arrived_at: q.arrived_at,
                    granted_at: tick,
                });
            }
        }
        grants
    }
}

/// Idling sample: time between reaching the stopline and receiving right of way.
pub fn record_idling(arrived_at: Option<u32>, granted_at: u32) -> Result<f64, DynamicsError> {
    match arrived_at {
        None => Err(DynamicsError::MissingStoplineTimestamp),
        Some(a) if a > granted_at => Err(DynamicsError::GrantBeforeArrival {
            arrived_at: a,
            granted_at,
        }),
        Some(a) => Ok((granted_at - a) as f64),
    }
}

/// Accumulates idling samples for one (incoming link, routing interval) bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdlingBucket {
    pub sum: f64,
    pub count: u32,
}

impl IdlingBucket {
    pub fn add(&mut self, sample: f64) {
        self.sum += sample;
        self.count += 1;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}
