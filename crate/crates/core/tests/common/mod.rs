#![allow(dead_code)]

use ecoroute::dynamics::{VehicleClass, VehicleId};
use ecoroute::emission::EmissionRateTable;
use ecoroute::network::{Connectivity, NodeId, RoadNetwork};
use ecoroute::sim::{generate_grid_network, Arrival, FleetComposition, GridSpec, OdDemand};

pub fn data(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

pub fn net_from(csv: &str) -> RoadNetwork {
    RoadNetwork::from_csv_str(csv, Connectivity::Weak).unwrap()
}

pub fn desk() -> (RoadNetwork, Vec<OdDemand>) {
    let (net, profile) = generate_grid_network(4, 6, &GridSpec::desk()).unwrap();
    let demand = profile.resolve(&net).unwrap();
    (net, demand)
}

pub fn rates() -> EmissionRateTable {
    EmissionRateTable::synthetic()
}

pub fn fleet() -> FleetComposition {
    FleetComposition::default_mix()
}

/// Arrivals numbered in order; input must already be sorted by departure.
pub fn arrivals(list: &[(u32, &str, &str)], net: &RoadNetwork) -> Vec<Arrival> {
    list.iter()
        .enumerate()
        .map(|(i, &(depart, o, d))| Arrival {
            vehicle: VehicleId(i as u32),
            depart,
            origin: net.node(o).unwrap(),
            dest: net.node(d).unwrap(),
            class: VehicleClass::PassengerCar,
            model_year: 2015,
        })
        .collect()
}

pub fn node(net: &RoadNetwork, name: &str) -> NodeId {
    net.node(name).unwrap()
}

/// Random weakly connected network on `n` nodes: a random spanning tree with
/// random edge directions, plus extra directed links. No duplicate pairs.
pub fn random_network(rng: &mut impl rand::Rng, n: usize, extra: usize) -> RoadNetwork {
    use std::collections::BTreeSet;
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        pairs.insert(if rng.random_bool(0.5) { (i, j) } else { (j, i) });
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            pairs.insert((a, b));
        }
    }
    let mut csv = String::from("from_node,to_node,length_m,speed_kmh,lanes,direction\n");
    for (a, b) in pairs {
        csv.push_str(&format!(
            "n{a},n{b},{},50,1,oneway\n",
            rng.random_range(100..900)
        ));
    }
    net_from(&csv)
}

/// Every simple path from `o` to `d` as link lists, by depth-first search.
pub fn all_simple_paths(
    net: &RoadNetwork,
    o: NodeId,
    d: NodeId,
) -> Vec<Vec<ecoroute::network::LinkId>> {
    fn go(
        net: &RoadNetwork,
        at: NodeId,
        d: NodeId,
        seen: &mut Vec<bool>,
        path: &mut Vec<ecoroute::network::LinkId>,
        out: &mut Vec<Vec<ecoroute::network::LinkId>>,
    ) {
        if at == d {
            out.push(path.clone());
            return;
        }
        for l in net.links().iter().filter(|l| l.from == at) {
            if !seen[l.to.index()] {
                seen[l.to.index()] = true;
                path.push(l.id);
                go(net, l.to, d, seen, path, out);
                path.pop();
                seen[l.to.index()] = false;
            }
        }
    }
    let mut seen = vec![false; net.node_count()];
    seen[o.index()] = true;
    let mut out = Vec::new();
    go(net, o, d, &mut seen, &mut Vec::new(), &mut out);
    out
}

/// Undirected hop distances from `src`, by breadth-first search over links.
pub fn bfs_hops(net: &RoadNetwork, src: NodeId) -> Vec<Option<u32>> {
    let mut dist = vec![None; net.node_count()];
    dist[src.index()] = Some(0);
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.index()].unwrap();
        for l in net.links() {
            let other = if l.from == u {
                l.to
            } else if l.to == u {
                l.from
            } else {
                continue;
            };
            if dist[other.index()].is_none() {
                dist[other.index()] = Some(du + 1);
                queue.push_back(other);
            }
        }
    }
    dist
}
