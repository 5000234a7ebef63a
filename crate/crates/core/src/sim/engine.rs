//! The tick loop.
//!
//! Each one-second tick runs, in order: the routing-interval boundary
//! (reports, dissemination, re-decisions of waiting vehicles), departures,
//! intersection service, origin entries, car following, stopline decisions,
//! emissions, and exits.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::dynamics::{
    DynamicsConfig, IdlingBucket, IdmParams, RouteState, Traffic, VehicleId, VehicleKind,
    VehicleSpec, VehicleState,
};
use crate::emission::{
    classify_opmode, EmissionRateTable, EmissionSample, LinkEmissionWindow, Mass, Pollutant,
};
use crate::network::{LinkId, NodeId, RoadNetwork};
use crate::routing::{ObjectiveSpec, Planner};
use crate::sim::config::{RoutingMode, ScenarioConfig};
use crate::sim::demand::{generate_arrivals, Arrival, FleetComposition, OdDemand};
use crate::sim::records::{DecisionKind, DecisionRecord, LinkIntervalRecord, TripRecord};
use crate::sim::SimError;
use crate::state::{
    build_report, Disseminator, IntervalMeasurements, LinkStateReport, V2iRegistry,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep every per-second emission sample.
    pub record_samples: bool,
    /// Keep every per-second vehicle state.
    pub record_trajectory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    /// Tick index; the state is the one reached at `t + 1`.
    pub t: u32,
    pub vehicle: VehicleId,
    pub link: LinkId,
    pub lane: usize,
    pub position: f64,
    pub speed: f64,
    pub accel: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunStats {
    /// Simulated seconds until the last vehicle arrived.
    pub ticks: u32,
    pub injected: u32,
    pub warmup_vehicles: u32,
    pub crossings: u64,
    pub emergencies: u64,
    pub max_on_links: u32,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    /// All trips ordered by vehicle id, warm-up vehicles included and flagged.
    pub trips: Vec<TripRecord>,
    pub intervals: Vec<LinkIntervalRecord>,
    pub decisions: Vec<DecisionRecord>,
    pub samples: Vec<EmissionSample>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stats: RunStats,
}

impl RunOutput {
    pub fn metric_trips(&self) -> impl Iterator<Item = &TripRecord> {
        self.trips.iter().filter(|t| !t.warmup)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StuckVehicle {
    pub vehicle: VehicleId,
    pub link: Option<LinkId>,
    pub lane: usize,
    pub position: f64,
    pub speed: f64,
    pub waiting_since: Option<u32>,
    pub next_link: Option<LinkId>,
}

/// State snapshot taken when a run stops making progress.
#[derive(Debug, Clone, Serialize)]
pub struct GridlockDump {
    pub t: u32,
    pub last_progress: u32,
    pub on_links: u32,
    pub waiting_at_origins: u32,
    pub vehicles: Vec<StuckVehicle>,
}

/// Runs one scenario: Poisson arrivals drawn from `demand` under `cfg.seed`,
/// simulated until the last vehicle arrives.
pub fn run_scenario(
    net: &RoadNetwork,
    demand: &[OdDemand],
    fleet: &FleetComposition,
    rates: &EmissionRateTable,
    cfg: &ScenarioConfig,
) -> Result<RunOutput, SimError> {
    let arrivals = generate_arrivals(demand, fleet, cfg.seed);
    run_arrivals(net, &arrivals, rates, cfg, RunOptions::default())
}

/// Runs one scenario over an explicit arrival list (ids dense, sorted by departure).
pub fn run_arrivals(
    net: &RoadNetwork,
    arrivals: &[Arrival],
    rates: &EmissionRateTable,
    cfg: &ScenarioConfig,
    opts: RunOptions,
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    for (i, a) in arrivals.iter().enumerate() {
        if a.vehicle.index() != i || (i > 0 && a.depart < arrivals[i - 1].depart) {
            return Err(SimError::Config(
                "arrivals must be numbered densely in departure order".into(),
            ));
        }
    }
    Engine::new(net, rates, cfg, opts).run(arrivals)
}

/// Spec of a vehicle of `kind`; human drivers use conventional car-following
/// parameters, automated vehicles the tighter profile.
pub fn vehicle_spec(a: &Arrival, kind: VehicleKind) -> VehicleSpec {
    VehicleSpec {
        id: a.vehicle,
        kind,
        class: a.class,
        model_year: a.model_year,
        idm: match kind {
            VehicleKind::Hdv => IdmParams::hdv_default(),
            VehicleKind::Cav => IdmParams::cav_default(),
        },
    }
}

/// Emission rates assumed for a link nobody has driven on yet: a reference
/// car cruising at the speed limit.
pub fn prior_rates(net: &RoadNetwork, rates: &EmissionRateTable) -> Vec<(f64, f64)> {
    let class = rates.classes()[0];
    let year = rates
        .year_bins()
        .iter()
        .map(|b| b.last)
        .max()
        .expect("non-empty table");
    net.links()
        .iter()
        .map(|l| {
            let op = classify_opmode(l.free_flow_speed(), 0.0);
            (
                rates.rate_for(class, year, op, Pollutant::Ghg),
                rates.rate_for(class, year, op, Pollutant::Nox),
            )
        })
        .collect()
}

struct LinkAcc {
    distance: f64,
    vehicle_seconds: f64,
    density_sum: f64,
    idling: IdlingBucket,
    window: LinkEmissionWindow,
    ghg: Mass,
    nox: Mass,
    metric_ghg: Mass,
    metric_nox: Mass,
}

impl LinkAcc {
    fn new(sections: usize, windows: usize) -> Self {
        LinkAcc {
            distance: 0.0,
            vehicle_seconds: 0.0,
            density_sum: 0.0,
            idling: IdlingBucket::default(),
            window: LinkEmissionWindow::new(sections, windows),
            ghg: Mass::default(),
            nox: Mass::default(),
            metric_ghg: Mass::default(),
            metric_nox: Mass::default(),
        }
    }

    fn reset(&mut self) {
        self.distance = 0.0;
        self.vehicle_seconds = 0.0;
        self.density_sum = 0.0;
        self.idling = IdlingBucket::default();
        self.window.clear();
        self.ghg = Mass::default();
        self.nox = Mass::default();
        self.metric_ghg = Mass::default();
        self.metric_nox = Mass::default();
    }
}

struct Engine<'a> {
    net: &'a RoadNetwork,
    rates: &'a EmissionRateTable,
    cfg: &'a ScenarioConfig,
    opts: RunOptions,
    objective: ObjectiveSpec,
    traffic: Traffic,
    states: Disseminator,
    registry: V2iRegistry,
    planners: BTreeMap<(usize, bool), Planner>,
    free_flow_rates: Vec<(f64, f64)>,
    acc: Vec<LinkAcc>,
    origin_queues: Vec<VecDeque<VehicleId>>,
    waiting_at_origins: u32,
    trip_ghg: Vec<Mass>,
    trip_nox: Vec<Mass>,
    out: RunOutput,
}

impl<'a> Engine<'a> {
    fn new(
        net: &'a RoadNetwork,
        rates: &'a EmissionRateTable,
        cfg: &'a ScenarioConfig,
        opts: RunOptions,
    ) -> Self {
        let free_flow_rates = prior_rates(net, rates);
        let priors: Vec<LinkStateReport> = net
            .links()
            .iter()
            .map(|l| {
                let (g, n) = free_flow_rates[l.id.index()];
                LinkStateReport::free_flow(l, 0, g, n)
            })
            .collect();
        let dyn_cfg: DynamicsConfig = cfg.dynamics;
        Engine {
            net,
            rates,
            cfg,
            opts,
            objective: cfg.objective_spec(),
            traffic: Traffic::new(net, dyn_cfg),
            states: Disseminator::new(net, cfg.dissemination, &priors),
            registry: V2iRegistry::default(),
            planners: BTreeMap::new(),
            free_flow_rates,
            acc: net
                .links()
                .iter()
                .map(|l| LinkAcc::new(l.section_count as usize, cfg.windows_per_interval()))
                .collect(),
            origin_queues: vec![VecDeque::new(); net.node_count()],
            waiting_at_origins: 0,
            trip_ghg: Vec::new(),
            trip_nox: Vec::new(),
            out: RunOutput::default(),
        }
    }

    fn interval_of(&self, t: u32) -> u32 {
        t / self.cfg.routing_interval_s
    }

    fn is_warmup(&self, v: VehicleId) -> bool {
        self.traffic.vehicle(v).depart_at < self.cfg.warmup_s
    }

    fn planner(&mut self, at: NodeId, pretrip: bool) -> &mut Planner {
        let slot = self.states.view_slot(at);
        let obj = if pretrip {
            ObjectiveSpec::tt()
        } else {
            self.objective
        };
        let view = self.states.view(at);
        self.planners
            .entry((slot, pretrip))
            .or_insert_with(|| Planner::new(view, &obj))
    }

    fn log_decision(&mut self, v: VehicleId, t: u32, at: NodeId, link: LinkId, kind: DecisionKind) {
        let objective = match kind {
            DecisionKind::Pretrip => "TT".to_string(),
            _ => self.cfg.objective.to_string(),
        };
        self.out.decisions.push(DecisionRecord {
            vehicle: v.0,
            t,
            interval: self.interval_of(t),
            intersection: self.net.node_name(at).to_string(),
            link: link.0,
            toward: self.net.node_name(self.net.link(link).to).to_string(),
            objective,
            kind,
        });
    }

    /// Next link for a connected vehicle standing at `at`.
    fn decide_next_hop(
        &mut self,
        v: VehicleId,
        at: NodeId,
        t: u32,
        kind: DecisionKind,
    ) -> Result<(), SimError> {
        let (spec_kind, dest) = {
            let s = self.traffic.vehicle(v);
            (s.spec.kind, s.dest)
        };
        let query = self
            .registry
            .announce(v, spec_kind, at, dest)
            .map_err(SimError::Protocol)?;
        let net = self.net;
        let link = self
            .planner(at, false)
            .next_hop(net, at, query.dest)
            .map_err(|source| SimError::Routing { vehicle: v, source })?;
        let state = self.traffic.vehicle_mut(v);
        let previous = match state.route {
            RouteState::NextHop { next } => next,
            RouteState::Path { .. } => unreachable!("connected vehicles route hop by hop"),
        };
        state.route = RouteState::NextHop { next: Some(link) };
        if kind != DecisionKind::Refresh || previous != Some(link) {
            self.log_decision(v, t, at, link, kind);
        }
        Ok(())
    }

    fn depart(&mut self, a: &Arrival, t: u32) -> Result<(), SimError> {
        let kind = self.cfg.fleet;
        let route = match self.cfg.routing {
            RoutingMode::Pretrip => {
                let net = self.net;
                let path = self
                    .planner(a.origin, true)
                    .shortest_path(net, a.origin, a.dest)
                    .map_err(|source| SimError::Routing {
                        vehicle: a.vehicle,
                        source,
                    })?;
                RouteState::Path {
                    links: path.links,
                    index: None,
                }
            }
            RoutingMode::E2ecav => RouteState::NextHop { next: None },
        };
        let id = self.traffic.add_vehicle(VehicleState::new(
            vehicle_spec(a, kind),
            a.origin,
            a.dest,
            a.depart,
            route,
        ));
        self.trip_ghg.push(Mass::default());
        self.trip_nox.push(Mass::default());
        match self.cfg.routing {
            RoutingMode::Pretrip => {
                let first = self
                    .traffic
                    .vehicle(id)
                    .next_link()
                    .expect("non-empty path");
                self.log_decision(id, t, a.origin, first, DecisionKind::Pretrip);
            }
            RoutingMode::E2ecav => self.decide_next_hop(id, a.origin, t, DecisionKind::NextHop)?,
        }
        self.origin_queues[a.origin.index()].push_back(id);
        self.waiting_at_origins += 1;
        Ok(())
    }

    /// Closes routing interval `j` at time `t_end`, publishes its reports,
    /// and lets waiting connected vehicles reconsider.
    fn close_interval(&mut self, j: u32, t_end: u32) -> Result<(), SimError> {
        let start = j * self.cfg.routing_interval_s;
        let ticks = (t_end - start) as f64;
        let mut reports = Vec::with_capacity(self.net.link_count());
        for link in self.net.links() {
            let li = link.id.index();
            let mut idling = self.acc[li].idling;
            if idling.count == 0 {
                // nobody was released, so the standing queue's current wait is the best estimate
                for q in self
                    .traffic
                    .intersection(link.to)
                    .waiting()
                    .filter(|q| q.from_link == link.id)
                {
                    idling.add((t_end - q.arrived_at) as f64);
                }
            }
            let a = &self.acc[li];
            let m = IntervalMeasurements {
                distance_m: a.distance,
                vehicle_seconds: a.vehicle_seconds,
                idling,
                rates: a.window.rates(),
                density_ratio: a.density_sum / ticks,
            };
            let report = build_report(
                link,
                j,
                &m,
                self.free_flow_rates[li],
                self.cfg.min_report_speed,
            );
            self.out.intervals.push(LinkIntervalRecord {
                link: link.id.0,
                from: self.net.node_name(link.from).to_string(),
                to: self.net.node_name(link.to).to_string(),
                interval: j,
                start_s: start,
                end_s: t_end,
                space_mean_speed: report.space_mean_speed,
                travel_time: report.travel_time,
                idling_penalty: report.idling_penalty,
                ghg_rate: report.ghg_rate,
                nox_rate: report.nox_rate,
                density_ratio: report.density_ratio,
                stale: report.stale,
                vehicle_seconds: a.vehicle_seconds,
                distance_m: a.distance,
                ghg_ng: a.ghg.0,
                nox_ng: a.nox.0,
                metric_ghg_ng: a.metric_ghg.0,
                metric_nox_ng: a.metric_nox.0,
            });
            reports.push(report);
        }
        for a in &mut self.acc {
            a.reset();
        }
        self.states.publish(j, &reports);
        self.planners.clear();

        if self.cfg.routing == RoutingMode::E2ecav {
            let mut waiting: Vec<(VehicleId, NodeId)> = Vec::new();
            for node in 0..self.net.node_count() {
                let node = NodeId(node as u32);
                waiting.extend(
                    self.traffic
                        .intersection(node)
                        .waiting()
                        .map(|q| (q.vehicle, node)),
                );
                waiting.extend(self.origin_queues[node.index()].iter().map(|&v| (v, node)));
            }
            waiting.sort();
            for (v, at) in waiting {
                self.decide_next_hop(v, at, t_end, DecisionKind::Refresh)?;
            }
        }
        Ok(())
    }

    fn gridlock(&self, t: u32, last_progress: u32) -> SimError {
        let vehicles = self
            .traffic
            .vehicles()
            .iter()
            .filter(|v| v.arrived_at.is_none())
            .map(|v| StuckVehicle {
                vehicle: v.spec.id,
                link: v.current_link,
                lane: v.lane,
                position: v.position,
                speed: v.speed,
                waiting_since: v.arrived_at_stopline_at,
                next_link: v.next_link(),
            })
            .collect();
        SimError::Gridlock(Box::new(GridlockDump {
            t,
            last_progress,
            on_links: self.traffic.on_links() as u32,
            waiting_at_origins: self.waiting_at_origins,
            vehicles,
        }))
    }

    fn run(mut self, arrivals: &[Arrival]) -> Result<RunOutput, SimError> {
        let net = self.net;
        let dj = self.cfg.routing_interval_s;
        let dw = self.cfg.intermediate_interval_s;
        let mut next_arrival = 0usize;
        let mut arrived = 0u32;
        let mut last_progress = 0u32;
        let mut t = 0u32;
        loop {
            if t > 0 && t.is_multiple_of(dj) {
                self.close_interval(t / dj - 1, t)?;
            }
            let in_system = self.waiting_at_origins + self.traffic.on_links() as u32;
            if next_arrival == arrivals.len() && in_system == 0 {
                break;
            }
            if in_system == 0 {
                last_progress = t;
            }

            while next_arrival < arrivals.len() && arrivals[next_arrival].depart == t {
                self.depart(&arrivals[next_arrival], t)?;
                next_arrival += 1;
            }
            if next_arrival < arrivals.len() && arrivals[next_arrival].depart < t {
                return Err(SimError::Config(
                    "arrivals must be sorted by departure".into(),
                ));
            }

            let crossings = self.traffic.serve_intersections(t);
            let mut progressed = !crossings.is_empty();
            for c in &crossings {
                self.acc[c.grant.from_link.index()]
                    .idling
                    .add(c.grant.idling());
                self.registry.release(c.intersection, c.grant.vehicle);
            }
            self.out.stats.crossings += crossings.len() as u64;

            for node in 0..self.origin_queues.len() {
                while let Some(&v) = self.origin_queues[node].front() {
                    if !self.traffic.try_enter(net, v, t) {
                        break;
                    }
                    self.registry.release(NodeId(node as u32), v);
                    self.origin_queues[node].pop_front();
                    self.waiting_at_origins -= 1;
                    progressed = true;
                }
            }

            let tick = self.traffic.advance_tick(net, t);

            for &(v, at) in &tick.stopline_arrivals {
                if self.cfg.routing == RoutingMode::E2ecav {
                    self.decide_next_hop(v, at, t + 1, DecisionKind::NextHop)?;
                }
            }

            let window = ((t % dj) / dw) as usize;
            for m in &tick.movements {
                progressed |= m.distance > 0.0;
                let link = net.link(m.link);
                let warm = self.is_warmup(m.vehicle);
                let spec = &self.traffic.vehicle(m.vehicle).spec;
                let op = classify_opmode(m.speed, m.accel);
                let ghg = self.rates.emission_rate(spec, op, Pollutant::Ghg);
                let nox = self.rates.emission_rate(spec, op, Pollutant::Nox);
                let (gm, nm) = (Mass::from_rate(ghg), Mass::from_rate(nox));
                let section = link.section_of(m.position);
                let a = &mut self.acc[m.link.index()];
                a.distance += m.distance;
                a.vehicle_seconds += 1.0;
                a.window.record(section, window, m.vehicle, ghg, nox);
                a.ghg += gm;
                a.nox += nm;
                if !warm {
                    a.metric_ghg += gm;
                    a.metric_nox += nm;
                }
                self.trip_ghg[m.vehicle.index()] += gm;
                self.trip_nox[m.vehicle.index()] += nm;
                if self.opts.record_samples {
                    self.out.samples.push(EmissionSample {
                        vehicle: m.vehicle,
                        t,
                        link: m.link,
                        section,
                        ghg,
                        nox,
                    });
                }
                if self.opts.record_trajectory {
                    let lane = self.traffic.vehicle(m.vehicle).lane;
                    self.out.trajectory.push(TrajectoryPoint {
                        t,
                        vehicle: m.vehicle,
                        link: m.link,
                        lane,
                        position: m.position,
                        speed: m.speed,
                        accel: m.accel,
                        distance: m.distance,
                    });
                }
            }

            for &v in &tick.exits {
                progressed = true;
                arrived += 1;
                let s = self.traffic.vehicle(v);
                let arrive = s.arrived_at.expect("exited");
                let tt = (arrive - s.depart_at) as f64;
                let vkt = s.odometer / 1000.0;
                let (ghg, nox) = (self.trip_ghg[v.index()], self.trip_nox[v.index()]);
                self.out.trips.push(TripRecord {
                    vehicle: v.0,
                    kind: s.spec.kind,
                    class: s.spec.class,
                    model_year: s.spec.model_year,
                    origin: net.node_name(s.origin).to_string(),
                    dest: net.node_name(s.dest).to_string(),
                    depart_s: s.depart_at,
                    arrive_s: arrive,
                    tt_s: tt,
                    vkt_km: vkt,
                    ghg_g: ghg.grams(),
                    nox_g: nox.grams(),
                    mean_speed_kmh: vkt / (tt / 3600.0),
                    ghg_ng: ghg.0,
                    nox_ng: nox.0,
                    warmup: s.depart_at < self.cfg.warmup_s,
                });
            }

            for link in net.links() {
                if self.traffic.count_on(link.id) > 0 {
                    self.acc[link.id.index()].density_sum +=
                        self.traffic.density_ratio(net, link.id);
                }
            }

            let on_links = self.traffic.on_links() as u32;
            let injected = next_arrival as u32;
            if injected != self.waiting_at_origins + on_links + arrived {
                return Err(SimError::Conservation {
                    t,
                    injected,
                    waiting: self.waiting_at_origins,
                    on_links,
                    arrived,
                });
            }
            self.out.stats.max_on_links = self.out.stats.max_on_links.max(on_links);
            if progressed {
                last_progress = t + 1;
            } else if t + 1 - last_progress >= self.cfg.gridlock_horizon_s {
                return Err(self.gridlock(t + 1, last_progress));
            }
            t += 1;
        }
        if !t.is_multiple_of(dj) {
            self.close_interval(t / dj, t)?;
        }
        self.out.trips.sort_by_key(|r| r.vehicle);
        self.out.stats.ticks = t;
        self.out.stats.injected = arrivals.len() as u32;
        self.out.stats.warmup_vehicles = arrivals
            .iter()
            .filter(|a| a.depart < self.cfg.warmup_s)
            .count() as u32;
        self.out.stats.emergencies = self.traffic.emergencies();
        Ok(self.out)
    }
}
