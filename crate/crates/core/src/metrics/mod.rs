//! Post-processing of run outputs: network totals, per-trip distributions,
//! time series, heatmaps, and scenario comparisons.

pub mod series;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emission::Mass;
use crate::sim::TripRecord;

pub use series::{
    heatmap_grid, network_series, rasterize, time_series, HeatCell, HeatField, Raster,
    SeriesMetric, SeriesPoint, SeriesValue,
};
pub use stats::{quantile, reg_inc_beta, student_t_cdf, welch_t, Quartiles, WelchResult};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no trips to summarize")]
    NoTrips,
    #[error("degenerate samples: {0}")]
    Degenerate(String),
    #[error("interval {0} is not in the log")]
    UnknownInterval(u32),
    #[error("network has no node coordinates")]
    NoCoordinates,
    #[error("baseline scenario {0} not among the compared runs")]
    UnknownBaseline(String),
    #[error("runs of {a} and {b} used different inputs")]
    Incompatible { a: String, b: String },
    #[error("comparison needs at least two scenario entries")]
    TooFewScenarios,
}

/// Per-trip performance measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Tt,
    Vkt,
    Speed,
    Ghg,
    Nox,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Tt,
        Metric::Vkt,
        Metric::Speed,
        Metric::Ghg,
        Metric::Nox,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Tt => "tt",
            Metric::Vkt => "vkt",
            Metric::Speed => "speed",
            Metric::Ghg => "ghg",
            Metric::Nox => "nox",
        }
    }

    /// tt in s, vkt in km, speed in km/h, emissions in g.
    pub fn of_trip(self, t: &TripRecord) -> f64 {
        match self {
            Metric::Tt => t.tt_s,
            Metric::Vkt => t.vkt_km,
            Metric::Speed => t.mean_speed_kmh,
            Metric::Ghg => t.ghg().grams(),
            Metric::Nox => t.nox().grams(),
        }
    }

    /// Value of a whole run: totals for emissions (GHG in kg, NOx in g),
    /// per-trip means otherwise.
    pub fn of_summary(self, s: &ScenarioSummary) -> f64 {
        match self {
            Metric::Tt => s.mean_tt_s,
            Metric::Vkt => s.mean_vkt_km,
            Metric::Speed => s.mean_speed_kmh,
            Metric::Ghg => s.total_ghg_kg,
            Metric::Nox => s.total_nox_g,
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripQuartiles {
    pub tt_s: Quartiles,
    pub vkt_km: Quartiles,
    pub speed_kmh: Quartiles,
    pub ghg_g: Quartiles,
    pub nox_g: Quartiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub trips: usize,
    pub total_tt_s: f64,
    pub mean_tt_s: f64,
    pub total_vkt_km: f64,
    pub mean_vkt_km: f64,
    pub total_ghg_kg: f64,
    pub total_ghg_ng: u64,
    pub total_nox_g: f64,
    pub total_nox_ng: u64,
    /// Mean of the per-trip mean speeds.
    pub mean_speed_kmh: f64,
    pub quartiles: TripQuartiles,
}

impl ScenarioSummary {
    pub fn total_ghg(&self) -> Mass {
        Mass(self.total_ghg_ng)
    }

    pub fn total_nox(&self) -> Mass {
        Mass(self.total_nox_ng)
    }
}

/// Summarizes the non-warm-up trips.
pub fn summarize<'a>(
    scenario: &str,
    trips: impl IntoIterator<Item = &'a TripRecord>,
) -> Result<ScenarioSummary, MetricsError> {
    let trips: Vec<&TripRecord> = trips.into_iter().filter(|t| !t.warmup).collect();
    if trips.is_empty() {
        return Err(MetricsError::NoTrips);
    }
    let n = trips.len() as f64;
    let col = |m: Metric| trips.iter().map(|t| m.of_trip(t)).collect::<Vec<f64>>();
    let q = |m: Metric| Quartiles::of(&col(m)).expect("non-empty");
    let total_tt_s: f64 = col(Metric::Tt).iter().sum();
    let total_vkt_km: f64 = col(Metric::Vkt).iter().sum();
    let ghg: Mass = trips.iter().map(|t| t.ghg()).sum();
    let nox: Mass = trips.iter().map(|t| t.nox()).sum();
    Ok(ScenarioSummary {
        scenario: scenario.to_string(),
        trips: trips.len(),
        total_tt_s,
        mean_tt_s: total_tt_s / n,
        total_vkt_km,
        mean_vkt_km: total_vkt_km / n,
        total_ghg_kg: ghg.grams() / 1000.0,
        total_ghg_ng: ghg.0,
        total_nox_g: nox.grams(),
        total_nox_ng: nox.0,
        mean_speed_kmh: col(Metric::Speed).iter().sum::<f64>() / n,
        quartiles: TripQuartiles {
            tt_s: q(Metric::Tt),
            vkt_km: q(Metric::Vkt),
            speed_kmh: q(Metric::Speed),
            ghg_g: q(Metric::Ghg),
            nox_g: q(Metric::Nox),
        },
    })
}

/// What one observation of a Welch test is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleUnit {
    /// One value per trip, pooled over seeds.
    #[default]
    Trip,
    /// One value per run (seed): per-trip means, emission totals.
    Run,
}

/// All runs of one scenario. `inputs` fingerprints the network, demand,
/// rate table and fleet; runs are comparable only when it matches.
#[derive(Debug, Clone)]
pub struct ScenarioRuns {
    pub scenario: String,
    pub inputs: String,
    pub runs: Vec<Vec<TripRecord>>,
}

impl ScenarioRuns {
    pub fn samples(&self, metric: Metric, unit: SampleUnit) -> Result<Vec<f64>, MetricsError> {
        match unit {
            SampleUnit::Trip => Ok(self
                .runs
                .iter()
                .flatten()
                .filter(|t| !t.warmup)
                .map(|t| metric.of_trip(t))
                .collect()),
            SampleUnit::Run => self
                .runs
                .iter()
                .map(|r| summarize(&self.scenario, r).map(|s| metric.of_summary(&s)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub a: String,
    pub b: String,
    pub metric: Metric,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Empty when the samples are degenerate.
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentChange {
    pub scenario: String,
    pub metric: Metric,
    pub baseline_mean: f64,
    pub mean: f64,
    pub change_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ComparisonTable {
    pub tests: Vec<PairTest>,
    pub percent: Vec<PercentChange>,
}

impl ComparisonTable {
    pub fn test(&self, a: &str, b: &str, metric: Metric) -> Option<&PairTest> {
        self.tests
            .iter()
            .find(|t| t.a == a && t.b == b && t.metric == metric)
    }

    pub fn change(&self, scenario: &str, metric: Metric) -> Option<&PercentChange> {
        self.percent
            .iter()
            .find(|c| c.scenario == scenario && c.metric == metric)
    }
}

pub fn percent_change(baseline: f64, value: f64) -> f64 {
    (value - baseline) / baseline * 100.0
}

/// Pairwise Welch tests for every metric plus percentage changes against
/// `baseline`.
pub fn compare_scenarios(
    sets: &[ScenarioRuns],
    baseline: &str,
    unit: SampleUnit,
) -> Result<ComparisonTable, MetricsError> {
    if sets.len() < 2 {
        return Err(MetricsError::TooFewScenarios);
    }
    if let Some(other) = sets.iter().find(|s| s.inputs != sets[0].inputs) {
        return Err(MetricsError::Incompatible {
            a: sets[0].scenario.clone(),
            b: other.scenario.clone(),
        });
    }
    let base = sets
        .iter()
        .position(|s| s.scenario == baseline)
        .ok_or_else(|| MetricsError::UnknownBaseline(baseline.to_string()))?;
    let mut samples = Vec::with_capacity(sets.len());
    for s in sets {
        let mut per = Vec::new();
        for m in Metric::ALL {
            let v = s.samples(m, unit)?;
            if v.is_empty() {
                return Err(MetricsError::NoTrips);
            }
            per.push(v);
        }
        samples.push(per);
    }
    let mut out = ComparisonTable::default();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            for (k, m) in Metric::ALL.into_iter().enumerate() {
                let (a, b) = (&samples[i][k], &samples[j][k]);
                let w = welch_t(a, b).ok();
                out.tests.push(PairTest {
                    a: sets[i].scenario.clone(),
                    b: sets[j].scenario.clone(),
                    metric: m,
                    n_a: a.len(),
                    n_b: b.len(),
                    mean_a: stats::mean(a),
                    mean_b: stats::mean(b),
                    t: w.map(|w| w.t),
                    df: w.map(|w| w.df),
                    p: w.map(|w| w.p),
                });
            }
        }
    }
    for (i, s) in sets.iter().enumerate() {
        for (k, m) in Metric::ALL.into_iter().enumerate() {
            let (b, v) = (stats::mean(&samples[base][k]), stats::mean(&samples[i][k]));
            out.percent.push(PercentChange {
                scenario: s.scenario.clone(),
                metric: m,
                baseline_mean: b,
                mean: v,
                change_pct: percent_change(b, v),
            });
        }
    }
    Ok(out)
}
