//! Synthetic grid networks with speed tiers, an optional lane drop, and
//! west-east commuter demand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::network::{
    Connectivity, Direction, NetworkError, RoadNetwork, StreetRow, DEFAULT_SECTION_COUNT,
};
use crate::sim::demand::{DemandProfile, DemandRow};

/// Eastbound link from `(row, col)` to `(row, col + 1)` with reduced capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bottleneck {
    pub row: u32,
    pub col: u32,
    pub lanes: u32,
    pub speed_kmh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDemand {
    /// Expected vehicles per interval over all pairs.
    pub vehicles_per_interval: Vec<f64>,
    pub interval_length_s: u32,
    /// Fraction of the volume travelling east to west.
    pub reverse_share: f64,
    /// Relative weight of each origin row; equal weights when empty.
    pub origin_row_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub block_m: f64,
    /// East-west street speed per row, cycled.
    pub row_speeds_kmh: Vec<f64>,
    pub row_lanes: Vec<u32>,
    /// North-south street speed per column, cycled.
    pub col_speeds_kmh: Vec<f64>,
    pub col_lanes: Vec<u32>,
    pub bottleneck: Option<Bottleneck>,
    pub demand: GridDemand,
}

impl GridSpec {
    /// Uniform 50 km/h single-lane grid with light demand.
    pub fn uniform() -> Self {
        GridSpec {
            block_m: 300.0,
            row_speeds_kmh: vec![50.0],
            row_lanes: vec![1],
            col_speeds_kmh: vec![50.0],
            col_lanes: vec![1],
            bottleneck: None,
            demand: GridDemand {
                vehicles_per_interval: vec![20.0],
                interval_length_s: 300,
                reverse_share: 0.0,
                origin_row_weights: Vec::new(),
            },
        }
    }

    /// Congested commuter fixture for a 4-row by 6-column grid: an 80 km/h
    /// two-lane arterial in row 1 that drops to one 40 km/h lane halfway,
    /// parallel 60 and 40 km/h streets, and roughly 600 eastbound vehicles
    /// per 15 minutes after a five-minute warm-up, mostly starting on the
    /// arterial.
    pub fn desk() -> Self {
        GridSpec {
            block_m: 400.0,
            row_speeds_kmh: vec![60.0, 80.0, 40.0, 60.0],
            row_lanes: vec![1, 2, 1, 1],
            col_speeds_kmh: vec![40.0, 60.0],
            col_lanes: vec![1],
            bottleneck: Some(Bottleneck {
                row: 1,
                col: 2,
                lanes: 1,
                speed_kmh: 40.0,
            }),
            demand: GridDemand {
                vehicles_per_interval: vec![200.0, 200.0, 200.0, 200.0],
                interval_length_s: 300,
                reverse_share: 0.0,
                origin_row_weights: vec![1.0, 4.0, 1.0, 1.0],
            },
        }
    }
}

pub fn node_name(row: u32, col: u32) -> String {
    format!("r{row}c{col}")
}

fn cycle<T: Copy>(v: &[T], i: u32) -> T {
    v[i as usize % v.len()]
}

/// Builds a two-way `rows` × `cols` grid with node coordinates and its demand.
pub fn generate_grid_network(
    rows: u32,
    cols: u32,
    spec: &GridSpec,
) -> Result<(RoadNetwork, DemandProfile), NetworkError> {
    if rows < 2 || cols < 2 {
        return Err(NetworkError::Invalid {
            line: 0,
            message: format!("grid must be at least 2x2, got {rows}x{cols}"),
        });
    }
    let mut rows_out = Vec::new();
    let row = |from: String,
               to: String,
               speed_kmh: f64,
               lanes: u32,
               direction: Direction,
               name: String| StreetRow {
        from,
        to,
        length_m: spec.block_m,
        speed_kmh,
        lanes,
        direction,
        section_count: DEFAULT_SECTION_COUNT,
        name: Some(name),
    };
    for r in 0..rows {
        for c in 0..cols - 1 {
            let (speed, lanes) = (cycle(&spec.row_speeds_kmh, r), cycle(&spec.row_lanes, r));
            let (a, b) = (node_name(r, c), node_name(r, c + 1));
            match spec.bottleneck {
                Some(bn) if bn.row == r && bn.col == c => {
                    rows_out.push(row(
                        a.clone(),
                        b.clone(),
                        bn.speed_kmh,
                        bn.lanes,
                        Direction::OneWay,
                        format!("row {r} lane drop"),
                    ));
                    rows_out.push(row(
                        b,
                        a,
                        speed,
                        lanes,
                        Direction::OneWay,
                        format!("row {r}"),
                    ));
                }
                _ => rows_out.push(row(
                    a,
                    b,
                    speed,
                    lanes,
                    Direction::TwoWay,
                    format!("row {r}"),
                )),
            }
        }
    }
    for c in 0..cols {
        for r in 0..rows - 1 {
            rows_out.push(row(
                node_name(r, c),
                node_name(r + 1, c),
                cycle(&spec.col_speeds_kmh, c),
                cycle(&spec.col_lanes, c),
                Direction::TwoWay,
                format!("col {c}"),
            ));
        }
    }
    let mut net = RoadNetwork::from_rows(&rows_out, Connectivity::Strong)?;
    let coords: BTreeMap<String, (f64, f64)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            (
                node_name(r, c),
                (c as f64 * spec.block_m, r as f64 * spec.block_m),
            )
        })
        .collect();
    net.attach_coords(&coords)?;
    Ok((net, grid_demand(rows, cols, &spec.demand)))
}

fn grid_demand(rows: u32, cols: u32, d: &GridDemand) -> DemandProfile {
    let weights: Vec<f64> = if d.origin_row_weights.is_empty() {
        vec![1.0; rows as usize]
    } else {
        (0..rows).map(|r| cycle(&d.origin_row_weights, r)).collect()
    };
    let wsum: f64 = weights.iter().sum();
    let mut out = Vec::new();
    for (k, &total) in d.vehicles_per_interval.iter().enumerate() {
        let start = k as u32 * d.interval_length_s;
        for (dir_share, west_to_east) in [(1.0 - d.reverse_share, true), (d.reverse_share, false)] {
            if dir_share <= 0.0 {
                continue;
            }
            for o in 0..rows {
                for t in 0..rows {
                    let expected = total * dir_share * weights[o as usize] / wsum / rows as f64;
                    let (oc, dc) = if west_to_east {
                        (0, cols - 1)
                    } else {
                        (cols - 1, 0)
                    };
                    out.push(DemandRow {
                        origin: node_name(o, oc),
                        destination: node_name(t, dc),
                        interval_start_s: start,
                        interval_length_s: d.interval_length_s,
                        expected_count: expected,
                    });
                }
            }
        }
    }
    DemandProfile { rows: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_has_eight_links() {
        let (net, _) = generate_grid_network(2, 2, &GridSpec::uniform()).unwrap();
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.link_count(), 8);
        assert!(net.coords().is_some());
    }

    #[test]
    fn bottleneck_reduces_exactly_one_link() {
        let spec = GridSpec::desk();
        let (net, demand) = generate_grid_network(4, 6, &spec).unwrap();
        let reduced: Vec<_> = net
            .links()
            .iter()
            .filter(|l| l.name.as_deref() == Some("row 1 lane drop"))
            .collect();
        assert_eq!(reduced.len(), 1);
        assert_eq!((reduced[0].lanes, reduced[0].speed_limit_kmh), (1, 40.0));
        assert_eq!(net.node_name(reduced[0].from), "r1c2");
        let parallel = net
            .link_between(net.node("r1c1").unwrap(), net.node("r1c2").unwrap())
            .unwrap();
        assert_eq!(net.link(parallel).lanes, 2);
        assert!((demand.total_expected() - 800.0).abs() < 1e-9);
        assert!(demand.resolve(&net).is_ok());
    }

    proptest! {
        #[test]
        fn grids_are_strongly_connected(rows in 2u32..7, cols in 2u32..7, bn in proptest::bool::ANY) {
            let mut spec = GridSpec::uniform();
            if bn {
                spec.bottleneck = Some(Bottleneck { row: 0, col: 0, lanes: 1, speed_kmh: 20.0 });
            }
            let (net, _) = generate_grid_network(rows, cols, &spec).unwrap();
            prop_assert_eq!(net.link_count() as u32, 2 * (rows * (cols - 1) + cols * (rows - 1)));
            for o in 0..net.node_count() {
                let reach = net.reachable_set(crate::network::NodeId(o as u32));
                prop_assert!(reach.iter().all(|&r| r));
            }
        }
    }
}
