//! Network time series and per-link heatmaps from the link-interval log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::emission::Mass;
use crate::metrics::MetricsError;
use crate::network::RoadNetwork;
use crate::sim::LinkIntervalRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMetric {
    /// Network GHG produced in the bin, g.
    Ghg,
    /// Network NOx produced in the bin, g.
    Nox,
    /// Vehicle-weighted mean speed, km/h.
    Speed,
}

/// Network totals over one time bin. Emissions count metric vehicles only;
/// distance and vehicle-seconds count everyone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub start_s: u32,
    pub end_s: u32,
    pub ghg: Mass,
    pub nox: Mass,
    pub distance_m: f64,
    pub vehicle_seconds: f64,
}

impl SeriesPoint {
    pub fn value(&self, metric: SeriesMetric) -> f64 {
        match metric {
            SeriesMetric::Ghg => self.ghg.grams(),
            SeriesMetric::Nox => self.nox.grams(),
            SeriesMetric::Speed if self.vehicle_seconds > 0.0 => {
                self.distance_m / self.vehicle_seconds * 3.6
            }
            SeriesMetric::Speed => 0.0,
        }
    }
}

/// Bins the log into consecutive `bin_s` windows from t = 0 to the end of
/// the last interval. Bins with no traffic read zero.
pub fn network_series(log: &[LinkIntervalRecord], bin_s: u32) -> Vec<SeriesPoint> {
    let bin_s = bin_s.max(1);
    let end = log.iter().map(|r| r.end_s).max().unwrap_or(0);
    let n = end.div_ceil(bin_s);
    let mut out: Vec<SeriesPoint> = (0..n)
        .map(|k| SeriesPoint {
            start_s: k * bin_s,
            end_s: ((k + 1) * bin_s).min(end),
            ghg: Mass(0),
            nox: Mass(0),
            distance_m: 0.0,
            vehicle_seconds: 0.0,
        })
        .collect();
    for r in log {
        let p = &mut out[(r.start_s / bin_s) as usize];
        p.ghg += Mass(r.metric_ghg_ng);
        p.nox += Mass(r.metric_nox_ng);
        p.distance_m += r.distance_m;
        p.vehicle_seconds += r.vehicle_seconds;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub start_s: u32,
    pub end_s: u32,
    pub value: f64,
}

pub fn time_series(
    log: &[LinkIntervalRecord],
    metric: SeriesMetric,
    bin_s: u32,
) -> Vec<SeriesValue> {
    network_series(log, bin_s)
        .iter()
        .map(|p| SeriesValue {
            start_s: p.start_s,
            end_s: p.end_s,
            value: p.value(metric),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatField {
    /// Reported space-mean speed, km/h.
    Speed,
    DensityRatio,
    /// GHG emitted on the link during the interval, g.
    Ghg,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatCell {
    pub link: u32,
    pub from: String,
    pub to: String,
    pub value: f64,
}

/// One value per link for routing interval `interval`.
pub fn heatmap_grid(
    log: &[LinkIntervalRecord],
    interval: u32,
    field: HeatField,
) -> Result<Vec<HeatCell>, MetricsError> {
    let cells: BTreeMap<u32, HeatCell> = log
        .iter()
        .filter(|r| r.interval == interval)
        .map(|r| {
            let value = match field {
                HeatField::Speed => r.space_mean_speed * 3.6,
                HeatField::DensityRatio => r.density_ratio.clamp(0.0, 1.0),
                HeatField::Ghg => Mass(r.ghg_ng).grams(),
            };
            (
                r.link,
                HeatCell {
                    link: r.link,
                    from: r.from.clone(),
                    to: r.to.clone(),
                    value,
                },
            )
        })
        .collect();
    if cells.is_empty() {
        return Err(MetricsError::UnknownInterval(interval));
    }
    Ok(cells.into_values().collect())
}

/// Square-cell raster in network coordinates; a cell holds the largest value
/// of any link passing through it.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub x0: f64,
    pub y0: f64,
    pub cell_m: f64,
    pub cols: usize,
    pub rows: usize,
    /// Row-major.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct RasterRow {
    row: usize,
    col: usize,
    x: f64,
    y: f64,
    value: f64,
}

impl Raster {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols + col]
    }

    /// Occupied cells as `row,col,x,y,value` with cell-centre coordinates.
    pub fn to_csv(&self) -> String {
        let rows: Vec<RasterRow> = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .filter_map(|(r, c)| {
                self.get(r, c).map(|value| RasterRow {
                    row: r,
                    col: c,
                    x: self.x0 + (c as f64 + 0.5) * self.cell_m,
                    y: self.y0 + (r as f64 + 0.5) * self.cell_m,
                    value,
                })
            })
            .collect();
        crate::sim::records::to_csv_string(&rows)
    }
}

pub fn rasterize(
    net: &RoadNetwork,
    cells: &[HeatCell],
    cell_m: f64,
) -> Result<Raster, MetricsError> {
    let coords = net.coords().ok_or(MetricsError::NoCoordinates)?;
    let cell_m = if cell_m > 0.0 { cell_m } else { 50.0 };
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in coords {
        (x0, y0, x1, y1) = (x0.min(x), y0.min(y), x1.max(x), y1.max(y));
    }
    let cols = ((x1 - x0) / cell_m).floor() as usize + 1;
    let rows = ((y1 - y0) / cell_m).floor() as usize + 1;
    let mut values = vec![None::<f64>; rows * cols];
    for cell in cells {
        let link = net.link(crate::network::LinkId(cell.link));
        let (a, b) = (coords[link.from.index()], coords[link.to.index()]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let steps = (len / (cell_m / 4.0)).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let f = s as f64 / steps as f64;
            let (x, y) = (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1));
            let c = (((x - x0) / cell_m).floor() as usize).min(cols - 1);
            let r = (((y - y0) / cell_m).floor() as usize).min(rows - 1);
            let v = &mut values[r * cols + c];
            *v = Some(v.map_or(cell.value, |old| old.max(cell.value)));
        }
    }
    Ok(Raster {
        x0,
        y0,
        cell_m,
        cols,
        rows,
        values,
    })
}
