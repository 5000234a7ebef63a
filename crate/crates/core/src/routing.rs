//! Link costs and shortest-path routing over an intersection's network view.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::VehicleId;
use crate::network::{LinkId, NodeId, RoadNetwork};
use crate::state::{LinkStateReport, NetworkStateView};

/// Social cost of carbon, $ per tonne CO2-eq.
pub const CARBON_PRICE_PER_TONNE: f64 = 15.77;
/// Value of time, $ per minute.
pub const VALUE_OF_TIME_PER_MIN: f64 = 0.35;
/// Emission weight in minutes per gram: 15.77 $/t ÷ 1e6 g/t ÷ 0.35 $/min.
pub const W_CO2_MIN_PER_G: f64 = CARBON_PRICE_PER_TONNE / 1e6 / VALUE_OF_TIME_PER_MIN;

/// Smallest cost a link may carry; keeps every edge weight strictly positive.
pub const MIN_LINK_COST: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("objective has no active term")]
    EmptyObjective,
    #[error("node {dest:?} is unreachable from {origin:?}")]
    Unreachable { origin: NodeId, dest: NodeId },
    #[error("vehicle is already at its destination {0:?}")]
    AtDestination(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Objective {
    /// Travel time only.
    Tt,
    /// Travel time plus idling penalty.
    TtStar,
    /// Emissions only.
    R1,
    /// Travel time, idling and emissions.
    R2,
}

impl Objective {
    pub fn spec(self) -> ObjectiveSpec {
        match self {
            Objective::Tt => ObjectiveSpec::tt(),
            Objective::TtStar => ObjectiveSpec::tt_star(),
            Objective::R1 => ObjectiveSpec::r1(),
            Objective::R2 => ObjectiveSpec::r2(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Tt => "TT",
            Objective::TtStar => "TT*",
            Objective::R1 => "R1",
            Objective::R2 => "R2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tt" => Some(Objective::Tt),
            "tt*" | "tt_star" | "ttstar" => Some(Objective::TtStar),
            "r1" => Some(Objective::R1),
            "r2" => Some(Objective::R2),
            _ => None,
        }
    }
}

impl TryFrom<String> for Objective {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Self::parse(&s).ok_or_else(|| format!("unknown objective {s:?}"))
    }
}

impl From<Objective> for String {
    fn from(o: Objective) -> String {
        o.as_str().to_string()
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub beta_t: bool,
    pub beta_pi: bool,
    pub beta_co2: bool,
    /// minutes per minute
    pub w_t: f64,
    /// minutes per minute
    pub w_pi: f64,
    /// minutes per gram
    pub w_co2: f64,
    /// Relative surcharge on every component of a stale report; 0 uses stale
    /// reports at face value.
    pub stale_penalty: f64,
}

impl ObjectiveSpec {
    fn with_terms(beta_t: bool, beta_pi: bool, beta_co2: bool) -> Self {
        ObjectiveSpec {
            beta_t,
            beta_pi,
            beta_co2,
            w_t: 1.0,
            w_pi: 1.0,
            w_co2: W_CO2_MIN_PER_G,
            stale_penalty: 0.0,
        }
    }

    pub fn tt() -> Self {
        Self::with_terms(true, false, false)
    }

    pub fn tt_star() -> Self {
        Self::with_terms(true, true, false)
    }

    pub fn r1() -> Self {
        Self::with_terms(false, false, true)
    }

    pub fn r2() -> Self {
        Self::with_terms(true, true, true)
    }

    pub fn validate(&self) -> Result<(), RoutingError> {
        if self.beta_t || self.beta_pi || self.beta_co2 {
            Ok(())
        } else {
            Err(RoutingError::EmptyObjective)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkCost {
    pub link: LinkId,
    /// minutes
    pub cost: f64,
    pub tt: f64,
    pub idle: f64,
    pub ghg: f64,
}

/// Cost of traversing a link under `obj`, in minutes.
pub fn link_cost(report: &LinkStateReport, obj: &ObjectiveSpec) -> LinkCost {
    let scale = if report.stale {
        1.0 + obj.stale_penalty
    } else {
        1.0
    };
    let term = |on: bool, v: f64| if on { v * scale } else { 0.0 };
    let tt = term(obj.beta_t, obj.w_t * report.travel_time / 60.0);
    let idle = term(obj.beta_pi, obj.w_pi * report.idling_penalty / 60.0);
    let ghg = term(obj.beta_co2, obj.w_co2 * report.mean_emission());
    let mut c = LinkCost {
        link: report.link,
        cost: tt + idle + ghg,
        tt,
        idle,
        ghg,
    };
    if c.cost < MIN_LINK_COST {
        // only reachable for an all-zero report; attribute the floor to the active term
        let lift = MIN_LINK_COST - c.cost;
        if obj.beta_t {
            c.tt += lift;
        } else if obj.beta_pi {
            c.idle += lift;
        } else {
            c.ghg += lift;
        }
        c.cost = c.tt + c.idle + c.ghg;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RouteChoice {
    NextLink(LinkId),
    Path(Vec<LinkId>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteDecision {
    pub vehicle: VehicleId,
    pub at: NodeId,
    pub choice: RouteChoice,
    /// Routing interval index the decision was made in.
    pub decided_at: u32,
}

impl RouteDecision {
    pub fn first_link(&self) -> LinkId {
        match &self.choice {
            RouteChoice::NextLink(l) => *l,
            RouteChoice::Path(p) => p[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub links: Vec<LinkId>,
    pub nodes: Vec<NodeId>,
    /// minutes
    pub cost: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cost-to-go from every node to `dest` over per-link `costs`.
pub fn distances_to(net: &RoadNetwork, costs: &[f64], dest: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; net.node_count()];
    let mut done = vec![false; net.node_count()];
    let mut heap = BinaryHeap::new();
    dist[dest.index()] = 0.0;
    heap.push(Entry(0.0, dest));
    while let Some(Entry(d, u)) = heap.pop() {
        if done[u.index()] {
            continue;
        }
        done[u.index()] = true;
        for &l in &net.intersection(u).incoming {
            let v = net.link(l).from;
            let cand = costs[l.index()] + d;
            if cand < dist[v.index()] {
                dist[v.index()] = cand;
                heap.push(Entry(cand, v));
            }
        }
    }
    dist
}

/// Best outgoing link at `at` given cost-to-go `dist`. Ties go to the smaller
/// downstream node id, then the smaller link id, which makes repeated hops
/// spell out the lexicographically smallest of the equal-cost paths.
pub fn best_hop(net: &RoadNetwork, costs: &[f64], dist: &[f64], at: NodeId) -> Option<LinkId> {
    let mut best: Option<(f64, NodeId, LinkId)> = None;
    for &l in &net.intersection(at).outgoing {
        let to = net.link(l).to;
        let v = costs[l.index()] + dist[to.index()];
        if !v.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bv, bn, bl)) => v < bv || (v == bv && (to, l) < (bn, bl)),
        };
        if better {
            best = Some((v, to, l));
        }
    }
    best.map(|b| b.2)
}

/// Link costs of one view under one objective, with cost-to-go trees cached
/// per destination. Valid until the view changes.
#[derive(Debug, Clone)]
pub struct Planner {
    costs: Vec<f64>,
    trees: BTreeMap<NodeId, Vec<f64>>,
}

impl Planner {
    pub fn new(view: &NetworkStateView, obj: &ObjectiveSpec) -> Self {
        Self::from_costs(view.reports().map(|r| link_cost(r, obj).cost).collect())
    }

    pub fn from_costs(costs: Vec<f64>) -> Self {
        Planner {
            costs,
            trees: BTreeMap::new(),
        }
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn distances(&mut self, net: &RoadNetwork, dest: NodeId) -> &[f64] {
        let costs = &self.costs;
        self.trees
            .entry(dest)
            .or_insert_with(|| distances_to(net, costs, dest))
    }

    pub fn next_hop(
        &mut self,
        net: &RoadNetwork,
        at: NodeId,
        dest: NodeId,
    ) -> Result<LinkId, RoutingError> {
        if at == dest {
            return Err(RoutingError::AtDestination(dest));
        }
        self.distances(net, dest);
        let dist = &self.trees[&dest];
        best_hop(net, &self.costs, dist, at).ok_or(RoutingError::Unreachable { origin: at, dest })
    }

    pub fn shortest_path(
        &mut self,
        net: &RoadNetwork,
        origin: NodeId,
        dest: NodeId,
    ) -> Result<Path, RoutingError> {
        if origin == dest {
            return Err(RoutingError::AtDestination(dest));
        }
        let cost = self.distances(net, dest)[origin.index()];
        if !cost.is_finite() {
            return Err(RoutingError::Unreachable { origin, dest });
        }
        let mut links = Vec::new();
        let mut nodes = vec![origin];
        let mut at = origin;
        while at != dest {
            let l = self.next_hop(net, at, dest)?;
            links.push(l);
            at = net.link(l).to;
            nodes.push(at);
        }
        Ok(Path { links, nodes, cost })
    }
}

pub fn shortest_path(
    net: &RoadNetwork,
    view: &NetworkStateView,
    obj: &ObjectiveSpec,
    origin: NodeId,
    dest: NodeId,
) -> Result<Path, RoutingError> {
    obj.validate()?;
    Planner::new(view, obj).shortest_path(net, origin, dest)
}

/// En-route decision for a connected vehicle waiting at `at`.
pub fn next_hop(
    net: &RoadNetwork,
    view: &NetworkStateView,
    obj: &ObjectiveSpec,
    vehicle: VehicleId,
    at: NodeId,
    dest: NodeId,
    interval: u32,
) -> Result<RouteDecision, RoutingError> {
    obj.validate()?;
    let l = Planner::new(view, obj).next_hop(net, at, dest)?;
    Ok(RouteDecision {
        vehicle,
        at,
        choice: RouteChoice::NextLink(l),
        decided_at: interval,
    })
}

/// Travel-time shortest path fixed at entry for a human-driven vehicle.
pub fn pretrip_route(
    net: &RoadNetwork,
    view_at_entry: &NetworkStateView,
    vehicle: VehicleId,
    origin: NodeId,
    dest: NodeId,
    interval: u32,
) -> Result<RouteDecision, RoutingError> {
    let p = shortest_path(net, view_at_entry, &ObjectiveSpec::tt(), origin, dest)?;
    Ok(RouteDecision {
        vehicle,
        at: origin,
        choice: RouteChoice::Path(p.links),
        decided_at: interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Connectivity;
    use proptest::prelude::*;

    fn report(tt: f64, idle: f64, ghg: f64) -> LinkStateReport {
        LinkStateReport {
            link: LinkId(0),
            interval: 0,
            space_mean_speed: 10.0,
            travel_time: tt,
            idling_penalty: idle,
            ghg_rate: ghg,
            nox_rate: 0.0,
            density_ratio: 0.0,
            stale: false,
        }
    }

    #[test]
    fn weight_constant() {
        assert!((W_CO2_MIN_PER_G - 4.5057e-5).abs() < 1e-9);
    }

    #[test]
    fn objective_costs() {
        let r = report(60.0, 30.0, 2.0);
        assert_eq!(link_cost(&r, &ObjectiveSpec::tt()).cost, 1.0);
        assert_eq!(link_cost(&r, &ObjectiveSpec::tt_star()).cost, 1.5);
        let c = link_cost(&r, &ObjectiveSpec::r2());
        assert!((c.cost - (1.5 + 120.0 * 15.77 / 1e6 / 0.35)).abs() < 1e-12);
        assert_eq!(c.cost, c.tt + c.idle + c.ghg);
        let r1 = link_cost(&r, &ObjectiveSpec::r1());
        assert_eq!(r1.tt, 0.0);
        assert!(r1.cost > 0.0);
    }

    #[test]
    fn zero_report_still_positive() {
        let c = link_cost(&report(0.0, 0.0, 0.0), &ObjectiveSpec::r1());
        assert_eq!(c.cost, MIN_LINK_COST);
        assert_eq!(c.cost, c.tt + c.idle + c.ghg);
    }

    #[test]
    fn stale_penalty_scales_components() {
        let mut r = report(60.0, 30.0, 0.0);
        r.stale = true;
        let obj = ObjectiveSpec {
            stale_penalty: 0.5,
            ..ObjectiveSpec::tt_star()
        };
        assert_eq!(link_cost(&r, &obj).cost, 2.25);
        assert_eq!(link_cost(&r, &ObjectiveSpec::tt_star()).cost, 1.5);
    }

    #[test]
    fn empty_objective_rejected() {
        let obj = ObjectiveSpec {
            beta_t: false,
            ..ObjectiveSpec::tt()
        };
        assert_eq!(obj.validate(), Err(RoutingError::EmptyObjective));
    }

    fn triangle() -> RoadNetwork {
        RoadNetwork::from_csv_str(
            "from_node,to_node,length_m,speed_kmh,lanes,direction\nA,B,1,1,1,oneway\nB,C,1,1,1,oneway\nA,C,1,1,1,oneway\n",
            Connectivity::Weak,
        )
        .unwrap()
    }

    #[test]
    fn triangle_prefers_two_hops() {
        let net = triangle();
        let mut p = Planner::from_costs(vec![1.0, 1.0, 3.0]);
        let (a, b, c) = (NodeId(0), NodeId(1), NodeId(2));
        let path = p.shortest_path(&net, a, c).unwrap();
        assert_eq!(path.nodes, vec![a, b, c]);
        assert_eq!(path.cost, 2.0);
        assert_eq!(p.next_hop(&net, a, c).unwrap(), LinkId(0));
        assert_eq!(p.next_hop(&net, b, c).unwrap(), LinkId(1));
        assert_eq!(
            p.shortest_path(&net, c, a),
            Err(RoutingError::Unreachable { origin: c, dest: a })
        );
    }

    #[test]
    fn equal_cost_tie_takes_smaller_node_sequence() {
        // A->B->D and A->C->D both cost 2
        let net = RoadNetwork::from_csv_str(
            "from_node,to_node,length_m,speed_kmh,lanes,direction\nA,C,1,1,1,oneway\nC,D,1,1,1,oneway\nA,B,1,1,1,oneway\nB,D,1,1,1,oneway\n",
            Connectivity::Weak,
        )
        .unwrap();
        for _ in 0..3 {
            let mut p = Planner::from_costs(vec![1.0; 4]);
            let path = p
                .shortest_path(&net, net.node("A").unwrap(), net.node("D").unwrap())
                .unwrap();
            let names: Vec<_> = path.nodes.iter().map(|&n| net.node_name(n)).collect();
            assert_eq!(names, ["A", "B", "D"]);
        }
    }

    fn random_net(n: u32, edges: &[(u32, u32)]) -> Option<RoadNetwork> {
        let mut csv = String::from("from_node,to_node,length_m,speed_kmh,lanes,direction\n");
        for &(a, b) in edges {
            if a % n != b % n {
                csv.push_str(&format!("n{},n{},100,50,1,oneway\n", a % n, b % n));
            }
        }
        RoadNetwork::from_csv_str(&csv, Connectivity::Unchecked).ok()
    }

    proptest! {
        #[test]
        fn scaling_costs_keeps_paths(
            edges in proptest::collection::vec((0u32..8, 0u32..8), 4..24),
            raw in proptest::collection::vec(1u32..40, 24),
            shift in 0i32..6,
        ) {
            let Some(net) = random_net(8, &edges) else { return Ok(()); };
            let costs: Vec<f64> = (0..net.link_count()).map(|i| raw[i] as f64 / 8.0).collect();
            let scaled: Vec<f64> = costs.iter().map(|c| c * 2f64.powi(shift) * 3.0).collect();
            let mut p = Planner::from_costs(costs);
            let mut q = Planner::from_costs(scaled);
            for o in 0..net.node_count() as u32 {
                for d in 0..net.node_count() as u32 {
                    if o == d { continue; }
                    let a = p.shortest_path(&net, NodeId(o), NodeId(d)).map(|x| x.links);
                    let b = q.shortest_path(&net, NodeId(o), NodeId(d)).map(|x| x.links);
                    prop_assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn free_flow_tt_matches_length_over_speed() {
        use crate::state::LinkStateReport;
        let net = RoadNetwork::from_csv_str(
            "from_node,to_node,length_m,speed_kmh,lanes,direction\nA,B,900,30,1,twoway\nB,D,900,30,1,twoway\nA,C,1200,80,1,twoway\nC,D,1200,80,1,twoway\n",
            Connectivity::Strong,
        )
        .unwrap();
        let priors: Vec<_> = net
            .links()
            .iter()
            .map(|l| LinkStateReport::free_flow(l, 0, 1.0, 0.0))
            .collect();
        let view = NetworkStateView::initial(&priors);
        let (a, d) = (net.node("A").unwrap(), net.node("D").unwrap());
        let p = shortest_path(&net, &view, &ObjectiveSpec::tt(), a, d).unwrap();
        let oracle: Vec<f64> = net
            .links()
            .iter()
            .map(|l| l.length_m / (l.speed_limit_kmh / 3.6))
            .collect();
        let q = Planner::from_costs(oracle)
            .shortest_path(&net, a, d)
            .unwrap();
        assert_eq!(p.links, q.links);
        assert_eq!(net.node_name(p.nodes[1]), "C");
        let dec = pretrip_route(&net, &view, VehicleId(3), a, d, 0).unwrap();
        assert_eq!(dec.choice, RouteChoice::Path(p.links.clone()));
        let hop = next_hop(&net, &view, &ObjectiveSpec::tt(), VehicleId(3), a, d, 0).unwrap();
        assert_eq!(hop.first_link(), p.links[0]);
    }
}
