//! Link-state reports and their dissemination between intersections.
//!
//! Every routing interval each link's agent condenses what happened on it
//! into a [`LinkStateReport`], delivered first to the link's downstream
//! intersection. Under [`DisseminationMode::Idealized`] every intersection
//! sees every report at once. Under [`DisseminationMode::HopGossip`] a report
//! travels `k` intersection hops per interval, so a node `d` hops away holds
//! it `⌈d/k⌉` intervals after it was produced.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{IdlingBucket, VehicleId, VehicleKind};
use crate::emission::{link_mean_emission, LinkRates};
use crate::network::{Link, LinkId, NodeId, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStateReport {
    pub link: LinkId,
    pub interval: u32,
    /// m/s, always positive
    pub space_mean_speed: f64,
    /// Average travel time, s; equals length / space-mean speed.
    pub travel_time: f64,
    /// Mean idling at the downstream stopline, s.
    pub idling_penalty: f64,
    /// Space-mean GHG rate, g/veh/s.
    pub ghg_rate: f64,
    /// Space-mean NOx rate, g/veh/s.
    pub nox_rate: f64,
    pub density_ratio: f64,
    pub stale: bool,
}

impl LinkStateReport {
    /// Free-flow report for a link nobody has measured yet.
    pub fn free_flow(link: &Link, interval: u32, ghg_rate: f64, nox_rate: f64) -> Self {
        let u = link.free_flow_speed();
        LinkStateReport {
            link: link.id,
            interval,
            space_mean_speed: u,
            travel_time: link.length_m / u,
            idling_penalty: 0.0,
            ghg_rate,
            nox_rate,
            density_ratio: 0.0,
            stale: true,
        }
    }

    /// Average emission per vehicle on the link, grams.
    pub fn mean_emission(&self) -> f64 {
        link_mean_emission(self.ghg_rate, self.travel_time)
    }
}

/// What a link agent measured over one routing interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalMeasurements {
    pub distance_m: f64,
    pub vehicle_seconds: f64,
    pub idling: IdlingBucket,
    pub rates: LinkRates,
    /// Mean per-tick density ratio over the interval.
    pub density_ratio: f64,
}

/// Condenses one closed interval into a report.
///
/// Space-mean speed is total distance over total vehicle-seconds, floored at
/// `min_speed`. An interval without vehicles reports free-flow values, with
/// `free_flow_rates` as emission rates, and the stale flag set.
pub fn build_report(
    link: &Link,
    interval: u32,
    m: &IntervalMeasurements,
    free_flow_rates: (f64, f64),
    min_speed: f64,
) -> LinkStateReport {
    if m.vehicle_seconds <= 0.0 {
        return LinkStateReport::free_flow(link, interval, free_flow_rates.0, free_flow_rates.1);
    }
    let u = (m.distance_m / m.vehicle_seconds).max(min_speed);
    let (ghg_rate, nox_rate) = if m.rates.all_empty {
        free_flow_rates
    } else {
        (m.rates.ghg, m.rates.nox)
    };
    LinkStateReport {
        link: link.id,
        interval,
        space_mean_speed: u,
        travel_time: link.length_m / u,
        idling_penalty: m.idling.mean().unwrap_or(0.0),
        ghg_rate,
        nox_rate,
        density_ratio: m.density_ratio.clamp(0.0, 1.0),
        stale: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub report: LinkStateReport,
    /// Interval in which the report was produced; `None` for the initial
    /// free-flow prior every node starts with.
    pub born: Option<u32>,
}

/// One intersection's picture of the whole network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStateView {
    /// Indexed by link id.
    pub entries: Vec<ViewEntry>,
    pub as_of: Option<u32>,
}

impl NetworkStateView {
    pub fn initial(priors: &[LinkStateReport]) -> Self {
        NetworkStateView {
            entries: priors
                .iter()
                .map(|&report| ViewEntry { report, born: None })
                .collect(),
            as_of: None,
        }
    }

    pub fn report(&self, link: LinkId) -> &LinkStateReport {
        &self.entries[link.index()].report
    }

    pub fn reports(&self) -> impl Iterator<Item = &LinkStateReport> {
        self.entries.iter().map(|e| &e.report)
    }

    /// Age in intervals of the report held for `link`.
    pub fn age(&self, link: LinkId) -> Option<u32> {
        let born = self.entries[link.index()].born?;
        Some(self.as_of? - born)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DisseminationMode {
    #[default]
    Idealized,
    HopGossip(u32),
}

impl DisseminationMode {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "idealized" {
            return Some(DisseminationMode::Idealized);
        }
        let k = s.strip_prefix("hop_gossip")?;
        let k = k.trim_start_matches(['(', ':', '=']).trim_end_matches(')');
        k.parse()
            .ok()
            .filter(|&k| k > 0)
            .map(DisseminationMode::HopGossip)
    }
}

impl TryFrom<String> for DisseminationMode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Self::parse(&s).ok_or_else(|| format!("unknown dissemination mode {s:?}"))
    }
}

impl From<DisseminationMode> for String {
    fn from(m: DisseminationMode) -> String {
        m.to_string()
    }
}

impl std::fmt::Display for DisseminationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DisseminationMode::Idealized => f.write_str("idealized"),
            DisseminationMode::HopGossip(k) => write!(f, "hop_gossip({k})"),
        }
    }
}

/// Holds every intersection's view and updates them at interval boundaries.
#[derive(Debug, Clone)]
pub struct Disseminator {
    mode: DisseminationMode,
    neighbors: Vec<Vec<NodeId>>,
    birth: Vec<NodeId>,
    /// One shared view when idealized, one per intersection otherwise.
    views: Vec<NetworkStateView>,
    version: u64,
}

impl Disseminator {
    pub fn new(net: &RoadNetwork, mode: DisseminationMode, priors: &[LinkStateReport]) -> Self {
        let n = match mode {
            DisseminationMode::Idealized => 1,
            DisseminationMode::HopGossip(_) => net.node_count(),
        };
        Disseminator {
            mode,
            neighbors: (0..net.node_count())
                .map(|i| net.undirected_neighbors(NodeId(i as u32)))
                .collect(),
            birth: net.links().iter().map(|l| l.to).collect(),
            views: vec![NetworkStateView::initial(priors); n],
            version: 0,
        }
    }

    pub fn mode(&self) -> DisseminationMode {
        self.mode
    }

    /// Bumped on every publish; lets callers cache per-view computations.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn view(&self, node: NodeId) -> &NetworkStateView {
        match self.mode {
            DisseminationMode::Idealized => &self.views[0],
            DisseminationMode::HopGossip(_) => &self.views[node.index()],
        }
    }

    /// Index of the physical view `node` reads; equal indices mean the same view.
    pub fn view_slot(&self, node: NodeId) -> usize {
        match self.mode {
            DisseminationMode::Idealized => 0,
            DisseminationMode::HopGossip(_) => node.index(),
        }
    }

    /// Delivers the reports produced in `interval`.
    pub fn publish(&mut self, interval: u32, reports: &[LinkStateReport]) {
        self.version += 1;
        match self.mode {
            DisseminationMode::Idealized => {
                let view = &mut self.views[0];
                for r in reports {
                    view.entries[r.link.index()] = ViewEntry {
                        report: *r,
                        born: Some(interval),
                    };
                }
                view.as_of = Some(interval);
            }
            DisseminationMode::HopGossip(k) => {
                // older knowledge spreads k hops, then new reports land at their birth node
                for _ in 0..k {
                    let prev = self.views.clone();
                    for (node, view) in self.views.iter_mut().enumerate() {
                        for nb in &self.neighbors[node] {
                            for (mine, theirs) in
                                view.entries.iter_mut().zip(&prev[nb.index()].entries)
                            {
                                if theirs.born > mine.born {
                                    *mine = *theirs;
                                }
                            }
                        }
                    }
                }
                for r in reports {
                    self.views[self.birth[r.link.index()].index()].entries[r.link.index()] =
                        ViewEntry {
                            report: *r,
                            born: Some(interval),
                        };
                }
                for v in &mut self.views {
                    v.as_of = Some(interval);
                }
            }
        }
    }

    /// Per-intersection views (cloned; the idealized mode shares one).
    pub fn views(&self, node_count: usize) -> Vec<NetworkStateView> {
        (0..node_count)
            .map(|i| self.view(NodeId(i as u32)).clone())
            .collect()
    }
}

/// Delivers one interval's reports and returns each intersection's view.
pub fn disseminate(
    net: &RoadNetwork,
    mode: DisseminationMode,
    priors: &[LinkStateReport],
    rounds: &[(u32, Vec<LinkStateReport>)],
) -> Vec<NetworkStateView> {
    let mut d = Disseminator::new(net, mode, priors);
    for (interval, reports) in rounds {
        d.publish(*interval, reports);
    }
    d.views(net.node_count())
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("vehicle {0:?} is human-driven and cannot communicate with intersections")]
    NotConnected(VehicleId),
}

/// A destination registration that the intersection answers with a next hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoutingQuery {
    pub vehicle: VehicleId,
    pub intersection: NodeId,
    pub dest: NodeId,
}

/// Vehicle-to-infrastructure destination registrations.
#[derive(Debug, Clone, Default)]
pub struct V2iRegistry {
    registrations: BTreeMap<(NodeId, VehicleId), NodeId>,
}

impl V2iRegistry {
    pub fn announce(
        &mut self,
        vehicle: VehicleId,
        kind: VehicleKind,
        intersection: NodeId,
        dest: NodeId,
    ) -> Result<RoutingQuery, ProtocolError> {
        if kind == VehicleKind::Hdv {
            return Err(ProtocolError::NotConnected(vehicle));
        }
        self.registrations.insert((intersection, vehicle), dest);
        Ok(RoutingQuery {
            vehicle,
            intersection,
            dest,
        })
    }

    pub fn destination(&self, intersection: NodeId, vehicle: VehicleId) -> Option<NodeId> {
        self.registrations.get(&(intersection, vehicle)).copied()
    }

    /// Drops a vehicle's registration once it has left the intersection.
    pub fn release(&mut self, intersection: NodeId, vehicle: VehicleId) {
        self.registrations.remove(&(intersection, vehicle));
    }

    pub fn len(&self) -> usize {
        self.registrations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registrations.is_empty()
    }
}
