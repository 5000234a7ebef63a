//! Per-trip, per-link-interval, and per-decision records of a run, with their
//! delimited-text forms.

use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::{VehicleClass, VehicleKind};
use crate::emission::Mass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub vehicle: u32,
    pub kind: VehicleKind,
    pub class: VehicleClass,
    pub model_year: u16,
    pub origin: String,
    pub dest: String,
    pub depart_s: u32,
    pub arrive_s: u32,
    pub tt_s: f64,
    pub vkt_km: f64,
    pub ghg_g: f64,
    pub nox_g: f64,
    pub mean_speed_kmh: f64,
    /// Exact emitted masses, ng.
    pub ghg_ng: u64,
    pub nox_ng: u64,
    /// Departed during warm-up; excluded from metrics.
    pub warmup: bool,
}

impl TripRecord {
    pub fn ghg(&self) -> Mass {
        Mass(self.ghg_ng)
    }

    pub fn nox(&self) -> Mass {
        Mass(self.nox_ng)
    }
}

/// One routing interval on one link: the report that was published and the
/// raw totals behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkIntervalRecord {
    pub link: u32,
    pub from: String,
    pub to: String,
    pub interval: u32,
    pub start_s: u32,
    pub end_s: u32,
    pub space_mean_speed: f64,
    pub travel_time: f64,
    pub idling_penalty: f64,
    pub ghg_rate: f64,
    pub nox_rate: f64,
    pub density_ratio: f64,
    pub stale: bool,
    pub vehicle_seconds: f64,
    pub distance_m: f64,
    /// Emitted by every vehicle, ng.
    pub ghg_ng: u64,
    pub nox_ng: u64,
    /// Emitted by vehicles that count toward metrics, ng.
    pub metric_ghg_ng: u64,
    pub metric_nox_ng: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    /// Full path fixed at entry.
    Pretrip,
    /// Next link chosen on arrival at an intersection (or at the origin).
    NextHop,
    /// Next link revised while waiting, after a view update.
    Refresh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub vehicle: u32,
    pub t: u32,
    pub interval: u32,
    pub intersection: String,
    pub link: u32,
    pub toward: String,
    pub objective: String,
    pub kind: DecisionKind,
}

pub fn write_csv<T: Serialize, W: Write>(out: W, rows: &[T]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("in-memory write");
    String::from_utf8(buf).expect("utf8")
}

pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn read_csv_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, csv::Error> {
    read_csv(std::fs::File::open(path)?)
}
