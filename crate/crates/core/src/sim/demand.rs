//! Origin-destination demand, fleet composition, and Poisson arrivals.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{VehicleClass, VehicleId};
use crate::network::{NodeId, RoadNetwork};

/// Default length of a demand interval, s.
pub const DEMAND_INTERVAL_S: u32 = 300;

/// RNG stream ids. Each subsystem draws from its own stream of the run seed.
pub mod streams {
    pub const ARRIVALS: u64 = 1;
    pub const FLEET: u64 = 2;
}

/// Generator for one subsystem's draws under `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown node {node:?}")]
    UnknownNode { line: usize, node: String },
    #[error("line {line}: destination {dest:?} is unreachable from origin {origin:?}")]
    Unreachable {
        line: usize,
        origin: String,
        dest: String,
    },
    #[error("fleet: {0}")]
    Fleet(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    pub origin: String,
    pub destination: String,
    pub interval_start_s: u32,
    #[serde(default = "default_interval")]
    pub interval_length_s: u32,
    pub expected_count: f64,
}

fn default_interval() -> u32 {
    DEMAND_INTERVAL_S
}

/// Demand row resolved against a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdDemand {
    pub origin: NodeId,
    pub dest: NodeId,
    pub start: u32,
    pub length: u32,
    pub expected: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub rows: Vec<DemandRow>,
}

impl DemandProfile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DemandError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DemandError> {
        Self::from_reader(text.as_bytes())
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DemandError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<DemandRow>().enumerate() {
            let line = i + 2;
            let row = rec.map_err(|e| DemandError::Parse {
                line,
                message: e.to_string(),
            })?;
            if !(row.expected_count >= 0.0) || !row.expected_count.is_finite() {
                return Err(DemandError::Parse {
                    line,
                    message: format!(
                        "expected_count must be a non-negative number, got {}",
                        row.expected_count
                    ),
                });
            }
            if row.interval_length_s == 0 {
                return Err(DemandError::Parse {
                    line,
                    message: "interval_length_s must be positive".into(),
                });
            }
            if row.origin == row.destination {
                return Err(DemandError::Parse {
                    line,
                    message: format!("origin and destination are both {:?}", row.origin),
                });
            }
            rows.push(row);
        }
        Ok(DemandProfile { rows })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn total_expected(&self) -> f64 {
        self.rows.iter().map(|r| r.expected_count).sum()
    }

    /// End of the last demand interval, s.
    pub fn horizon(&self) -> u32 {
        self.rows
            .iter()
            .map(|r| r.interval_start_s + r.interval_length_s)
            .max()
            .unwrap_or(0)
    }

    /// Checks node names and reachability of every pair; line numbers refer
    /// to the demand file.
    pub fn resolve(&self, net: &RoadNetwork) -> Result<Vec<OdDemand>, DemandError> {
        let mut out = Vec::with_capacity(self.rows.len());
        let mut reach: Vec<Option<Vec<bool>>> = vec![None; net.node_count()];
        for (i, r) in self.rows.iter().enumerate() {
            let line = i + 2;
            let node = |name: &str| {
                net.node(name).map_err(|_| DemandError::UnknownNode {
                    line,
                    node: name.to_string(),
                })
            };
            let (o, d) = (node(&r.origin)?, node(&r.destination)?);
            let set = reach[o.index()].get_or_insert_with(|| net.reachable_set(o));
            if !set[d.index()] {
                return Err(DemandError::Unreachable {
                    line,
                    origin: r.origin.clone(),
                    dest: r.destination.clone(),
                });
            }
            out.push(OdDemand {
                origin: o,
                dest: d,
                start: r.interval_start_s,
                length: r.interval_length_s,
                expected: r.expected_count,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetShare {
    pub vehicle_class: String,
    pub model_year_min: u16,
    pub model_year_max: u16,
    pub share: f64,
}

/// Class and model-year mix that arriving vehicles are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetComposition {
    entries: Vec<(VehicleClass, u16, u16, f64)>,
}

impl FleetComposition {
    pub fn new(shares: &[FleetShare]) -> Result<Self, DemandError> {
        let mut entries = Vec::new();
        for s in shares {
            let class = VehicleClass::parse(&s.vehicle_class).ok_or_else(|| {
                DemandError::Fleet(format!("unknown vehicle class {:?}", s.vehicle_class))
            })?;
            if s.model_year_min > s.model_year_max {
                return Err(DemandError::Fleet(format!(
                    "model year range {}-{} is empty",
                    s.model_year_min, s.model_year_max
                )));
            }
            if !(s.share >= 0.0) {
                return Err(DemandError::Fleet(format!("negative share {}", s.share)));
            }
            entries.push((class, s.model_year_min, s.model_year_max, s.share));
        }
        let total: f64 = entries.iter().map(|e| e.3).sum();
        if entries.is_empty() || (total - 1.0).abs() > 1e-6 {
            return Err(DemandError::Fleet(format!(
                "shares sum to {total}, expected 1"
            )));
        }
        Ok(FleetComposition { entries })
    }

    /// Passenger cars spread over three model-year bands.
    pub fn default_mix() -> Self {
        let s = |min, max, share| FleetShare {
            vehicle_class: "passenger_car".into(),
            model_year_min: min,
            model_year_max: max,
            share,
        };
        Self::new(&[
            s(1995, 1999, 0.05),
            s(2000, 2009, 0.35),
            s(2010, 2018, 0.60),
        ])
        .expect("valid mix")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DemandError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DemandError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let shares: Vec<FleetShare> = rdr
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| DemandError::Fleet(e.to_string()))?;
        Self::new(&shares)
    }

    pub fn shares(&self) -> Vec<FleetShare> {
        self.entries
            .iter()
            .map(|&(c, a, b, s)| FleetShare {
                vehicle_class: c.as_str().into(),
                model_year_min: a,
                model_year_max: b,
                share: s,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in self.shares() {
            w.serialize(s).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (VehicleClass, u16) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.entries.last().expect("non-empty");
        for e in &self.entries {
            acc += e.3;
            if u < acc {
                pick = e;
                break;
            }
        }
        (pick.0, rng.random_range(pick.1..=pick.2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub vehicle: VehicleId,
    pub depart: u32,
    pub origin: NodeId,
    pub dest: NodeId,
    pub class: VehicleClass,
    pub model_year: u16,
}

/// Poisson arrivals per (OD, interval) with uniform departure seconds,
/// ordered by departure time and numbered in that order.
pub fn generate_arrivals(demand: &[OdDemand], fleet: &FleetComposition, seed: u64) -> Vec<Arrival> {
    let mut rng = rng_stream(seed, streams::ARRIVALS);
    let mut drawn = Vec::new();
    for (row, d) in demand.iter().enumerate() {
        let n = if d.expected > 0.0 {
            Poisson::new(d.expected)
                .expect("positive mean")
                .sample(&mut rng) as u64
        } else {
            0
        };
        for k in 0..n {
            let depart = d.start + rng.random_range(0..d.length);
            drawn.push((depart, row, k, d.origin, d.dest));
        }
    }
    drawn.sort_by_key(|&(depart, row, k, ..)| (depart, row, k));
    let mut fleet_rng = rng_stream(seed, streams::FLEET);
    drawn
        .into_iter()
        .enumerate()
        .map(|(i, (depart, _, _, origin, dest))| {
            let (class, model_year) = fleet.sample(&mut fleet_rng);
            Arrival {
                vehicle: VehicleId(i as u32),
                depart,
                origin,
                dest,
                class,
                model_year,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Connectivity;

    fn od(expected: f64) -> OdDemand {
        OdDemand {
            origin: NodeId(0),
            dest: NodeId(1),
            start: 0,
            length: 300,
            expected,
        }
    }

    #[test]
    fn zero_mean_gives_no_arrivals() {
        assert!(generate_arrivals(&[od(0.0)], &FleetComposition::default_mix(), 1).is_empty());
    }

    #[test]
    fn arrivals_are_deterministic_and_ordered() {
        let d = [od(30.0), od(12.0)];
        let a = generate_arrivals(&d, &FleetComposition::default_mix(), 9);
        let b = generate_arrivals(&d, &FleetComposition::default_mix(), 9);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].depart <= w[1].depart));
        assert!(a
            .iter()
            .enumerate()
            .all(|(i, x)| x.vehicle.index() == i && x.depart < 300));
        assert_ne!(
            a,
            generate_arrivals(&d, &FleetComposition::default_mix(), 10)
        );
    }

    #[test]
    fn fleet_stream_does_not_move_departures() {
        let truck = FleetComposition::new(&[FleetShare {
            vehicle_class: "truck".into(),
            model_year_min: 2005,
            model_year_max: 2005,
            share: 1.0,
        }])
        .unwrap();
        let a = generate_arrivals(&[od(20.0)], &FleetComposition::default_mix(), 4);
        let b = generate_arrivals(&[od(20.0)], &truck, 4);
        let times = |v: &[Arrival]| v.iter().map(|x| x.depart).collect::<Vec<_>>();
        assert_eq!(times(&a), times(&b));
        assert!(b
            .iter()
            .all(|x| x.class == VehicleClass::Truck && x.model_year == 2005));
    }

    #[test]
    fn demand_file_validation() {
        let net = RoadNetwork::from_csv_str(
            "from_node,to_node,length_m,speed_kmh,lanes,direction\nA,B,100,50,1,oneway\n",
            Connectivity::Weak,
        )
        .unwrap();
        let ok = DemandProfile::from_csv_str(
            "origin,destination,interval_start_s,interval_length_s,expected_count\nA,B,0,300,5\n",
        )
        .unwrap();
        assert_eq!(ok.resolve(&net).unwrap().len(), 1);
        let back = DemandProfile::from_csv_str("origin,destination,interval_start_s,interval_length_s,expected_count\nA,B,0,300,5\nB,A,300,300,2\n").unwrap();
        match back.resolve(&net) {
            Err(DemandError::Unreachable { line, origin, dest }) => {
                assert_eq!((line, origin.as_str(), dest.as_str()), (3, "B", "A"));
            }
            other => panic!("{other:?}"),
        }
        assert!(DemandProfile::from_csv_str(
            "origin,destination,interval_start_s,interval_length_s,expected_count\nA,B,0,300,-1\n"
        )
        .is_err());
        assert!(DemandProfile::from_csv_str(
            "origin,destination,interval_start_s,interval_length_s,expected_count\nA,Z,0,300,1\n"
        )
        .unwrap()
        .resolve(&net)
        .is_err());
        assert_eq!(DemandProfile::from_csv_str(&ok.to_csv()).unwrap(), ok);
    }

    #[test]
    fn fleet_shares_must_sum_to_one() {
        let s = FleetShare {
            vehicle_class: "passenger_car".into(),
            model_year_min: 2000,
            model_year_max: 2010,
            share: 0.5,
        };
        assert!(FleetComposition::new(std::slice::from_ref(&s)).is_err());
        let mix = FleetComposition::default_mix();
        let text = mix.to_csv();
        assert_eq!(FleetComposition::from_reader(text.as_bytes()).unwrap(), mix);
    }
}
