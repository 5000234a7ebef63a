//! Vehicle kinematics, lane pipes, and stopline queues.
//!
//! A link with `n` lanes is `n` parallel FIFO pipes; vehicles never change
//! pipe. The head of each pipe treats the stopline as a standing obstacle
//! until its intersection grants it right of way, at which point it moves to
//! the start of its next link.

pub mod idm;
pub mod intersection;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{LinkId, NodeId, RoadNetwork};
pub use idm::{idm_accel, Acceleration, IdmParams, Leader};
pub use intersection::{record_idling, Grant, IdlingBucket, IntersectionQueueState, QueuedVehicle};

/// Physical vehicle length used for gaps and jam spacing.
pub const VEHICLE_LENGTH_M: f64 = 5.0;
/// Minimum bumper gap kept by the no-passing guard.
const GAP_EPS: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VehicleId(pub u32);

impl VehicleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("vehicle has no stopline arrival timestamp")]
    MissingStoplineTimestamp,
    #[error("grant at {granted_at} precedes stopline arrival at {arrived_at}")]
    GrantBeforeArrival { arrived_at: u32, granted_at: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VehicleKind {
    Hdv,
    Cav,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    PassengerCar,
    Truck,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::PassengerCar => "passenger_car",
            VehicleClass::Truck => "truck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "passenger_car" => Some(VehicleClass::PassengerCar),
            "truck" => Some(VehicleClass::Truck),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: VehicleId,
    pub kind: VehicleKind,
    pub class: VehicleClass,
    pub model_year: u16,
    pub idm: IdmParams,
}

/// How a vehicle knows where to go next.
#[derive(Debug, Clone, PartialEq)]
pub enum RouteState {
    /// Decided link by link at each intersection.
    NextHop { next: Option<LinkId> },
    /// Fixed at entry; `index` is the position of the current link in `links`
    /// (or `None` before entry).
    Path {
        links: Vec<LinkId>,
        index: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub spec: VehicleSpec,
    pub origin: NodeId,
    pub dest: NodeId,
    pub depart_at: u32,
    pub current_link: Option<LinkId>,
    pub lane: usize,
    /// Front bumper, metres from link start.
    pub position: f64,
    pub speed: f64,
    pub accel: f64,
    pub route: RouteState,
    pub entered_network_at: Option<u32>,
    pub entered_link_at: u32,
    pub arrived_at_stopline_at: Option<u32>,
    pub odometer: f64,
    pub arrived_at: Option<u32>,
}

impl VehicleState {
    pub fn new(
        spec: VehicleSpec,
        origin: NodeId,
        dest: NodeId,
        depart_at: u32,
        route: RouteState,
    ) -> Self {
        VehicleState {
            spec,
            origin,
            dest,
            depart_at,
            current_link: None,
            lane: 0,
            position: 0.0,
            speed: 0.0,
            accel: 0.0,
            route,
            entered_network_at: None,
            entered_link_at: depart_at,
            arrived_at_stopline_at: None,
            odometer: 0.0,
            arrived_at: None,
        }
    }

    /// The link this vehicle will take next: its first link before entry,
    /// otherwise the link after the current one.
    pub fn next_link(&self) -> Option<LinkId> {
        match &self.route {
            RouteState::NextHop { next } => *next,
            RouteState::Path { links, index } => match index {
                None => links.first().copied(),
                Some(i) => links.get(i + 1).copied(),
            },
        }
    }

    pub fn is_waiting_at_stopline(&self) -> bool {
        self.arrived_at_stopline_at.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Lower clamp on IDM deceleration, m/s².
    pub emergency_decel: f64,
    /// The stopline obstacle sits this far beyond the standstill point so
    /// approaching vehicles reach the line in finite time.
    pub stopline_margin: f64,
    /// Crossings per intersection per tick.
    pub service_rate: u32,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            emergency_decel: 6.0,
            stopline_margin: 1.0,
            service_rate: 1,
        }
    }
}

/// One vehicle's motion during one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Movement {
    pub vehicle: VehicleId,
    pub link: LinkId,
    pub position: f64,
    pub distance: f64,
    pub speed: f64,
    /// Realized speed change over the tick, m/s².
    pub accel: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickOutcome {
    pub movements: Vec<Movement>,
    /// Vehicles that reached a stopline this tick, with the intersection.
    pub stopline_arrivals: Vec<(VehicleId, NodeId)>,
    pub exits: Vec<VehicleId>,
    pub emergencies: u32,
}

/// Crossing grant together with the link the vehicle moved onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub intersection: NodeId,
    pub grant: Grant,
    pub to_link: LinkId,
}

/// Mutable traffic state of one simulation run.
#[derive(Debug, Clone)]
pub struct Traffic {
    cfg: DynamicsConfig,
    vehicles: Vec<VehicleState>,
    /// Per link, per lane; front is the vehicle nearest the stopline.
    lanes: Vec<Vec<VecDeque<VehicleId>>>,
    intersections: Vec<IntersectionQueueState>,
    on_links: usize,
    emergencies: u64,
}

impl Traffic {
    pub fn new(net: &RoadNetwork, cfg: DynamicsConfig) -> Self {
        Traffic {
            cfg,
            vehicles: Vec::new(),
            lanes: net
                .links()
                .iter()
                .map(|l| vec![VecDeque::new(); l.lanes as usize])
                .collect(),
            intersections: (0..net.node_count())
                .map(|_| IntersectionQueueState::new(cfg.service_rate))
                .collect(),
            on_links: 0,
            emergencies: 0,
        }
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.cfg
    }

    /// Registers a vehicle that has not yet entered the network. Vehicle ids
    /// must be dense and assigned in order.
    pub fn add_vehicle(&mut self, state: VehicleState) -> VehicleId {
        let id = VehicleId(self.vehicles.len() as u32);
        assert_eq!(state.spec.id, id, "vehicle ids must be dense");
        self.vehicles.push(state);
        id
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn vehicle(&self, id: VehicleId) -> &VehicleState {
        &self.vehicles[id.index()]
    }

    pub fn vehicle_mut(&mut self, id: VehicleId) -> &mut VehicleState {
        &mut self.vehicles[id.index()]
    }

    pub fn lane(&self, link: LinkId, lane: usize) -> &VecDeque<VehicleId> {
        &self.lanes[link.index()][lane]
    }

    pub fn vehicles_on(&self, link: LinkId) -> impl Iterator<Item = VehicleId> + '_ {
        self.lanes[link.index()].iter().flatten().copied()
    }

    pub fn count_on(&self, link: LinkId) -> usize {
        self.lanes[link.index()].iter().map(VecDeque::len).sum()
    }

    /// Vehicles currently on some link.
    pub fn on_links(&self) -> usize {
        self.on_links
    }

    pub fn intersection(&self, node: NodeId) -> &IntersectionQueueState {
        &self.intersections[node.index()]
    }

    pub fn emergencies(&self) -> u64 {
        self.emergencies
    }

    /// Occupied length over lane length, clamped to 1. Each vehicle occupies
    /// its length plus its standstill gap, so a lane packed at jam spacing reads 1.
    pub fn density_ratio(&self, net: &RoadNetwork, link: LinkId) -> f64 {
        let l = net.link(link);
        let occupied: f64 = self
            .vehicles_on(link)
            .map(|v| VEHICLE_LENGTH_M + self.vehicles[v.index()].spec.idm.min_gap)
            .sum();
        (occupied / (l.lanes as f64 * l.length_m)).min(1.0)
    }

    /// Shortest lane with room at the entrance for a vehicle needing `min_gap`.
    pub fn admissible_lane(&self, link: LinkId, min_gap: f64) -> Option<usize> {
        self.lanes[link.index()]
            .iter()
            .enumerate()
            .filter(|(_, pipe)| match pipe.back() {
                None => true,
                Some(&last) => self.vehicles[last.index()].position - VEHICLE_LENGTH_M >= min_gap,
            })
            .min_by_key(|(i, pipe)| (pipe.len(), *i))
            .map(|(i, _)| i)
    }

    fn place(&mut self, vid: VehicleId, link: LinkId, lane: usize, t: u32) {
        self.lanes[link.index()][lane].push_back(vid);
        let v = &mut self.vehicles[vid.index()];
        v.current_link = Some(link);
        v.lane = lane;
        v.position = 0.0;
        v.entered_link_at = t;
        v.arrived_at_stopline_at = None;
        match &mut v.route {
            RouteState::NextHop { next } => *next = None,
            RouteState::Path { index, .. } => *index = Some(index.map_or(0, |i| i + 1)),
        }
    }

    /// Moves a waiting vehicle onto its first link if there is room.
    pub fn try_enter(&mut self, net: &RoadNetwork, vid: VehicleId, t: u32) -> bool {
        let v = &self.vehicles[vid.index()];
        debug_assert!(v.current_link.is_none() && v.arrived_at.is_none());
        let Some(link) = v.next_link() else {
            return false;
        };
        debug_assert_eq!(net.link(link).from, v.origin);
        let Some(lane) = self.admissible_lane(link, v.spec.idm.min_gap) else {
            return false;
        };
        self.place(vid, link, lane, t);
        let v = &mut self.vehicles[vid.index()];
        v.entered_network_at = Some(t);
        v.speed = 0.0;
        self.on_links += 1;
        true
    }

    /// Runs FIFO service at every intersection for tick `t`, moving granted
    /// vehicles to position 0 of their next link.
    pub fn serve_intersections(&mut self, t: u32) -> Vec<Crossing> {
        let mut crossings = Vec::new();
        let mut intersections = std::mem::take(&mut self.intersections);
        for (node, ix) in intersections.iter_mut().enumerate() {
            if ix.is_empty() {
                continue;
            }
            let mut moved = Vec::new();
            let grants = ix.serve(t, |q| {
                let v = &self.vehicles[q.vehicle.index()];
                let Some(target) = v.next_link() else {
                    return false;
                };
                let Some(lane) = self.admissible_lane(target, v.spec.idm.min_gap) else {
                    return false;
                };
                let pipe = &mut self.lanes[q.from_link.index()][v.lane];
                debug_assert_eq!(pipe.front(), Some(&q.vehicle));
                pipe.pop_front();
                self.place(q.vehicle, target, lane, t);
                self.vehicles[q.vehicle.index()].speed = 0.0;
                moved.push(target);
                true
            });
            for (grant, to_link) in grants.into_iter().zip(moved) {
                crossings.push(Crossing {
                    intersection: NodeId(node as u32),
                    grant,
                    to_link,
                });
            }
        }
        self.intersections = intersections;
        crossings
    }

    /// Advances every vehicle on a link by one tick of `dt` = 1 s.
    ///
    /// Accelerations are computed from the state at the start of the tick;
    /// then `v' = max(0, v + a)` and `x' = x + v`, capped at the stopline
    /// (where the vehicle stops) and behind the leader's new position.
    pub fn advance_tick(&mut self, net: &RoadNetwork, t: u32) -> TickOutcome {
        let mut out = TickOutcome::default();
        let cfg = self.cfg;
        let mut accels: Vec<f64> = Vec::new();
        for link in net.links() {
            let length = link.length_m;
            let v0 = link.free_flow_speed();
            for lane in 0..self.lanes[link.id.index()].len() {
                let pipe = &self.lanes[link.id.index()][lane];
                if pipe.is_empty() {
                    continue;
                }
                accels.clear();
                for (i, &vid) in pipe.iter().enumerate() {
                    let me = &self.vehicles[vid.index()];
                    let params = me.spec.idm.with_desired_speed(v0);
                    let leader = if i == 0 {
                        (link.to != me.dest).then_some(Leader {
                            gap: length + params.min_gap + cfg.stopline_margin - me.position,
                            speed: 0.0,
                        })
                    } else {
                        let ahead = &self.vehicles[pipe[i - 1].index()];
                        Some(Leader {
                            gap: ahead.position - VEHICLE_LENGTH_M - me.position,
                            speed: ahead.speed,
                        })
                    };
                    let a = idm_accel(me.speed, leader, &params, cfg.emergency_decel);
                    if a.emergency {
                        out.emergencies += 1;
                    }
                    accels.push(a.value);
                }

                let pipe: Vec<VehicleId> = pipe.iter().copied().collect();
                let mut leader_new: Option<(f64, f64)> = None;
                let mut exited_head = false;
                for (i, &vid) in pipe.iter().enumerate() {
                    let me = &mut self.vehicles[vid.index()];
                    let (x, v) = (me.position, me.speed);
                    let mut new_v = (v + accels[i]).max(0.0);
                    // explicit Euler overshoots v0 on slow links; never cross it from below
                    if v <= v0 && new_v > v0 {
                        new_v = v0;
                    }
                    let mut new_x = x + v;
                    let mut exits = false;
                    if i == 0 && new_x >= length {
                        if link.to == me.dest {
                            new_x = length;
                            exits = true;
                        } else {
                            new_x = length;
                            new_v = 0.0;
                            if me.arrived_at_stopline_at.is_none() {
                                me.arrived_at_stopline_at = Some(t + 1);
                                out.stopline_arrivals.push((vid, link.to));
                            }
                        }
                    }
                    if let Some((lx, lv)) = leader_new {
                        let cap = lx - VEHICLE_LENGTH_M - GAP_EPS;
                        if new_x > cap {
                            new_x = cap.max(x);
                            new_v = new_v.min(lv);
                        }
                    }
                    let distance = new_x - x;
                    me.accel = new_v - v;
                    me.speed = new_v;
                    me.position = new_x;
                    me.odometer += distance;
                    out.movements.push(Movement {
                        vehicle: vid,
                        link: link.id,
                        position: new_x,
                        distance,
                        speed: new_v,
                        accel: new_v - v,
                    });
                    leader_new = Some((if exits { f64::INFINITY } else { new_x }, new_v));
                    if exits {
                        me.arrived_at = Some(t + 1);
                        exited_head = true;
                        out.exits.push(vid);
                    }
                }
                if exited_head {
                    self.lanes[link.id.index()][lane].pop_front();
                    self.on_links -= 1;
                }
            }
        }
        for &(vid, node) in &out.stopline_arrivals {
            let v = &self.vehicles[vid.index()];
            self.intersections[node.index()].push(QueuedVehicle {
                vehicle: vid,
                from_link: v.current_link.expect("on a link"),
                arrived_at: v.arrived_at_stopline_at.expect("just set"),
            });
        }
        self.emergencies += out.emergencies as u64;
        out
    }
}
