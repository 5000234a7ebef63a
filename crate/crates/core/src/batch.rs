//! Input validation, scenario batches with manifests, and comparison
//! reports over run directories.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::VehicleClass;
use crate::emission::EmissionRateTable;
use crate::metrics::{
    compare_scenarios, network_series, summarize, ComparisonTable, MetricsError, SampleUnit,
    ScenarioRuns, ScenarioSummary, SeriesMetric,
};
use crate::network::{load_with_nodes, Connectivity, RoadNetwork};
use crate::sim::records::{read_csv_file, write_csv};
use crate::sim::{
    run_scenario, DemandProfile, FleetComposition, LinkIntervalRecord, OdDemand, RunStats,
    ScenarioConfig, ScenarioId, SimError, TripRecord,
};
use crate::state::DisseminationMode;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("{run}: {source}")]
    Run { run: String, source: SimError },
    #[error("{run}: {source}; state dumped to {}", dump.display())]
    Gridlock {
        run: String,
        source: SimError,
        dump: PathBuf,
    },
    #[error(transparent)]
    Compare(#[from] MetricsError),
}

impl BatchError {
    /// 1 for bad or incompatible inputs, 2 for failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            BatchError::Validation(_) | BatchError::Compare(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BatchError + '_ {
    move |source| BatchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    fn push(&mut self, file: &Path, message: impl ToString) {
        self.diagnostics.push(Diagnostic {
            file: file.display().to_string(),
            message: message.to_string(),
        });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{}: {}", d.file, d.message)?;
        }
        Ok(())
    }
}

/// Input files of a run. Without a fleet file the default model-year mix is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputPaths {
    pub network: PathBuf,
    pub nodes: Option<PathBuf>,
    pub demand: PathBuf,
    pub rates: PathBuf,
    pub fleet: Option<PathBuf>,
}

impl InputPaths {
    fn files(&self) -> Vec<(&'static str, &Path)> {
        let mut v = vec![("network", self.network.as_path())];
        if let Some(n) = &self.nodes {
            v.push(("nodes", n));
        }
        v.push(("demand", &self.demand));
        v.push(("rates", &self.rates));
        if let Some(f) = &self.fleet {
            v.push(("fleet", f));
        }
        v
    }
}

/// Loaded and cross-checked inputs.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub network: RoadNetwork,
    pub demand: Vec<OdDemand>,
    pub rates: EmissionRateTable,
    pub fleet: FleetComposition,
}

/// Runs every load-time check, collecting all diagnostics instead of
/// stopping at the first.
pub fn load_inputs(paths: &InputPaths) -> Result<Inputs, ValidationReport> {
    let mut report = ValidationReport::default();
    let network = match &paths.nodes {
        Some(nodes) => load_with_nodes(&paths.network, nodes, Connectivity::Weak),
        None => RoadNetwork::load(&paths.network, Connectivity::Weak),
    }
    .map_err(|e| report.push(&paths.network, e))
    .ok();
    let rates = EmissionRateTable::load(&paths.rates)
        .map_err(|e| report.push(&paths.rates, e))
        .ok();
    let fleet = match &paths.fleet {
        Some(p) => FleetComposition::load(p)
            .map_err(|e| report.push(p, e))
            .ok(),
        None => Some(FleetComposition::default_mix()),
    };
    let profile = DemandProfile::load(&paths.demand)
        .map_err(|e| report.push(&paths.demand, e))
        .ok();
    let demand = match (&network, profile) {
        (Some(net), Some(p)) => p
            .resolve(net)
            .map_err(|e| report.push(&paths.demand, e))
            .ok(),
        _ => None,
    };
    if let (Some(rates), Some(fleet)) = (&rates, &fleet) {
        for s in fleet.shares() {
            let class = VehicleClass::parse(&s.vehicle_class).expect("validated fleet");
            if let Some(year) =
                (s.model_year_min..=s.model_year_max).find(|&y| !rates.covers(class, y))
            {
                let file = paths.fleet.as_deref().unwrap_or(&paths.rates);
                report.push(
                    file,
                    format!(
                        "no emission rates for {} model year {year}",
                        s.vehicle_class
                    ),
                );
            }
        }
    }
    match (network, demand, rates, fleet) {
        (Some(network), Some(demand), Some(rates), Some(fleet)) if report.is_ok() => Ok(Inputs {
            network,
            demand,
            rates,
            fleet,
        }),
        _ => Err(report),
    }
}

pub fn cmd_validate(paths: &InputPaths, config: Option<&Path>) -> ValidationReport {
    let mut report = load_inputs(paths).err().unwrap_or_default();
    if let Some(c) = config {
        if let Err(e) = ScenarioConfig::load(c) {
            report.push(c, e);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce one run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_path: Option<String>,
    pub inputs: Vec<InputHash>,
    /// Digest over the input hashes; runs compare only when it matches.
    pub inputs_fingerprint: String,
    pub scenario: ScenarioId,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    pub config: ScenarioConfig,
}

pub fn sha256_file(path: &Path) -> Result<String, BatchError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn hash_inputs(paths: &InputPaths) -> Result<(Vec<InputHash>, String), BatchError> {
    let mut hashes = Vec::new();
    let mut all = Sha256::new();
    for (role, p) in paths.files() {
        let sha256 = sha256_file(p)?;
        all.update(format!("{role}:{sha256}\n"));
        hashes.push(InputHash {
            role: role.to_string(),
            path: p.display().to_string(),
            sha256,
        });
    }
    Ok((hashes, hex::encode(all.finalize())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub inputs: InputPaths,
    pub config: Option<PathBuf>,
    /// Defaults to the config's scenario, or all five without a config.
    pub scenarios: Vec<ScenarioId>,
    /// Defaults to the config's seed, or 1.
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub dissemination: Option<DisseminationMode>,
    pub gridlock_horizon_s: Option<u32>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: ScenarioId,
    pub seed: u64,
    /// Absent when every trip departed during warm-up.
    pub summary: Option<ScenarioSummary>,
    pub stats: RunStatsRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStatsRecord {
    pub ticks: u32,
    pub injected: u32,
    pub warmup_vehicles: u32,
    pub crossings: u64,
    pub emergencies: u64,
    pub max_on_links: u32,
}

impl From<RunStats> for RunStatsRecord {
    fn from(s: RunStats) -> Self {
        RunStatsRecord {
            ticks: s.ticks,
            injected: s.injected,
            warmup_vehicles: s.warmup_vehicles,
            crossings: s.crossings,
            emergencies: s.emergencies,
            max_on_links: s.max_on_links,
        }
    }
}

pub fn run_dir_name(scenario: ScenarioId, seed: u64) -> String {
    format!("{scenario}_seed{seed}")
}

/// Resolves the per-run configurations of a request.
pub fn plan_runs(req: &RunRequest) -> Result<Vec<ScenarioConfig>, BatchError> {
    let template = match &req.config {
        Some(p) => Some(ScenarioConfig::load(p).map_err(|e| {
            let mut r = ValidationReport::default();
            r.push(p, e);
            BatchError::Validation(r)
        })?),
        None => None,
    };
    let scenarios = match (&req.scenarios[..], &template) {
        ([], Some(t)) => vec![t.scenario],
        ([], None) => ScenarioId::ALL.to_vec(),
        (s, _) => s.to_vec(),
    };
    let seeds = match (&req.seeds[..], &template) {
        ([], Some(t)) => vec![t.seed],
        ([], None) => vec![1],
        (s, _) => s.to_vec(),
    };
    let mut out = Vec::new();
    for &id in &scenarios {
        for &seed in &seeds {
            let mut cfg = match &template {
                Some(t) => {
                    let (fleet, routing, objective) = id.definition();
                    ScenarioConfig {
                        scenario: id,
                        fleet,
                        routing,
                        objective,
                        seed,
                        ..t.clone()
                    }
                }
                None => ScenarioConfig::preset(id, seed),
            };
            if let Some(d) = req.dissemination {
                cfg.dissemination = d;
            }
            if let Some(h) = req.gridlock_horizon_s {
                cfg.gridlock_horizon_s = h;
            }
            cfg.validate().map_err(|e| {
                let mut r = ValidationReport::default();
                r.push(req.config.as_deref().unwrap_or(Path::new("<flags>")), e);
                BatchError::Validation(r)
            })?;
            out.push(cfg);
        }
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BatchError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| BatchError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BatchError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    write_csv(io::BufWriter::new(f), rows).map_err(|e| BatchError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, BatchError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| BatchError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Validates, then runs every (scenario, seed) pair concurrently. Each run
/// directory gets its manifest before the run starts.
pub fn cmd_run(req: &RunRequest) -> Result<Vec<PathBuf>, BatchError> {
    let inputs = load_inputs(&req.inputs).map_err(BatchError::Validation)?;
    let configs = plan_runs(req)?;
    let (hashes, fingerprint) = hash_inputs(&req.inputs)?;
    let seeds: Vec<u64> = {
        let mut s: Vec<u64> = configs.iter().map(|c| c.seed).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    fs::create_dir_all(&req.out).map_err(io_err(&req.out))?;
    let mut dirs = Vec::new();
    for cfg in &configs {
        let dir = req.out.join(run_dir_name(cfg.scenario, cfg.seed));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let manifest = RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            config_path: req.config.as_ref().map(|p| p.display().to_string()),
            inputs: hashes.clone(),
            inputs_fingerprint: fingerprint.clone(),
            scenario: cfg.scenario,
            seed: cfg.seed,
            seeds: seeds.clone(),
            output_dir: req.out.display().to_string(),
            config: cfg.clone(),
        };
        write_json(&dir.join("manifest.json"), &manifest)?;
        dirs.push(dir);
    }
    let results: Vec<Result<(), BatchError>> = configs
        .par_iter()
        .zip(dirs.par_iter())
        .map(|(cfg, dir)| execute(&inputs, cfg, dir))
        .collect();
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    Ok(dirs)
}

fn execute(inputs: &Inputs, cfg: &ScenarioConfig, dir: &Path) -> Result<(), BatchError> {
    let run = run_dir_name(cfg.scenario, cfg.seed);
    let out = match run_scenario(
        &inputs.network,
        &inputs.demand,
        &inputs.fleet,
        &inputs.rates,
        cfg,
    ) {
        Ok(o) => o,
        Err(SimError::Gridlock(dump)) => {
            let path = dir.join("gridlock.json");
            write_json(&path, &*dump)?;
            return Err(BatchError::Gridlock {
                run,
                source: SimError::Gridlock(dump),
                dump: path,
            });
        }
        Err(source) => return Err(BatchError::Run { run, source }),
    };
    write_csv_file(&dir.join("trips.csv"), &out.trips)?;
    write_csv_file(&dir.join("link_intervals.csv"), &out.intervals)?;
    write_csv_file(&dir.join("decisions.csv"), &out.decisions)?;
    let summary = RunSummary {
        scenario: cfg.scenario,
        seed: cfg.seed,
        summary: summarize(cfg.scenario.as_str(), &out.trips).ok(),
        stats: out.stats.into(),
    };
    write_json(&dir.join("summary.json"), &summary)
}

/// A completed run directory read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub trips: Vec<TripRecord>,
    pub intervals: Vec<LinkIntervalRecord>,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun, BatchError> {
    let csv = |name: &str| dir.join(name);
    let read = |name: &str| {
        let p = csv(name);
        fs::metadata(&p).map_err(io_err(&p))?;
        Ok::<PathBuf, BatchError>(p)
    };
    let bad = |p: PathBuf| {
        move |e: csv::Error| BatchError::Output {
            path: p,
            message: e.to_string(),
        }
    };
    let trips_path = read("trips.csv")?;
    let intervals_path = read("link_intervals.csv")?;
    Ok(LoadedRun {
        dir: dir.to_path_buf(),
        manifest: read_json(&dir.join("manifest.json"))?,
        trips: read_csv_file(&trips_path).map_err(bad(trips_path.clone()))?,
        intervals: read_csv_file(&intervals_path).map_err(bad(intervals_path.clone()))?,
    })
}

/// Expands batch output directories into their run directories.
pub fn find_runs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, BatchError> {
    let mut out = Vec::new();
    for p in paths {
        if p.join("manifest.json").is_file() {
            out.push(p.clone());
            continue;
        }
        let mut sub: Vec<PathBuf> = fs::read_dir(p)
            .map_err(io_err(p))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|d| d.join("manifest.json").is_file())
            .collect();
        if sub.is_empty() {
            return Err(BatchError::Output {
                path: p.clone(),
                message: "no run directories found".into(),
            });
        }
        sub.sort();
        out.extend(sub);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRequest {
    pub runs: Vec<PathBuf>,
    pub baseline: String,
    pub out: Option<PathBuf>,
    pub unit: SampleUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SeriesRow {
    scenario: String,
    seed: u64,
    start_s: u32,
    end_s: u32,
    ghg_g: f64,
    nox_g: f64,
    speed_kmh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SummaryRow {
    scenario: String,
    seed: u64,
    trips: usize,
    mean_tt_s: f64,
    mean_vkt_km: f64,
    mean_speed_kmh: f64,
    total_ghg_kg: f64,
    total_nox_g: f64,
}

/// Groups runs by scenario, compares them against `baseline`, and writes
/// `comparison.csv`, `percent_change.csv`, `summaries.csv` and `series.csv`
/// when an output directory is given. Single-scenario input is compared
/// against itself.
pub fn cmd_compare(req: &CompareRequest) -> Result<ComparisonTable, BatchError> {
    let runs: Vec<LoadedRun> = find_runs(&req.runs)?
        .iter()
        .map(|d| load_run(d))
        .collect::<Result<_, _>>()?;
    let mut sets: Vec<ScenarioRuns> = Vec::new();
    for r in &runs {
        let name = r.manifest.scenario.as_str();
        match sets.iter_mut().find(|s| s.scenario == name) {
            Some(s) if s.inputs == r.manifest.inputs_fingerprint => s.runs.push(r.trips.clone()),
            Some(s) => {
                return Err(MetricsError::Incompatible {
                    a: s.scenario.clone(),
                    b: name.to_string(),
                }
                .into())
            }
            None => sets.push(ScenarioRuns {
                scenario: name.to_string(),
                inputs: r.manifest.inputs_fingerprint.clone(),
                runs: vec![r.trips.clone()],
            }),
        }
    }
    if sets.len() == 1 {
        sets.push(sets[0].clone());
    }
    let table = compare_scenarios(&sets, &req.baseline, req.unit)?;
    if let Some(out) = &req.out {
        fs::create_dir_all(out).map_err(io_err(out))?;
        write_csv_file(&out.join("comparison.csv"), &table.tests)?;
        write_csv_file(&out.join("percent_change.csv"), &table.percent)?;
        let mut summaries = Vec::new();
        let mut series = Vec::new();
        for r in &runs {
            let (scenario, seed) = (r.manifest.scenario.to_string(), r.manifest.seed);
            if let Ok(s) = summarize(&scenario, &r.trips) {
                summaries.push(SummaryRow {
                    scenario: scenario.clone(),
                    seed,
                    trips: s.trips,
                    mean_tt_s: s.mean_tt_s,
                    mean_vkt_km: s.mean_vkt_km,
                    mean_speed_kmh: s.mean_speed_kmh,
                    total_ghg_kg: s.total_ghg_kg,
                    total_nox_g: s.total_nox_g,
                });
            }
            for p in network_series(&r.intervals, r.manifest.config.routing_interval_s) {
                series.push(SeriesRow {
                    scenario: scenario.clone(),
                    seed,
                    start_s: p.start_s,
                    end_s: p.end_s,
                    ghg_g: p.value(SeriesMetric::Ghg),
                    nox_g: p.value(SeriesMetric::Nox),
                    speed_kmh: p.value(SeriesMetric::Speed),
                });
            }
        }
        write_csv_file(&out.join("summaries.csv"), &summaries)?;
        write_csv_file(&out.join("series.csv"), &series)?;
    }
    Ok(table)
}

/// Parses `1,2,5` and ranges such as `1-10`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad seed `{x}`"))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty seed range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1-3,7").unwrap(), [1, 2, 3, 7]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            BatchError::Validation(ValidationReport::default()).exit_code(),
            1
        );
        assert_eq!(
            BatchError::Compare(MetricsError::TooFewScenarios).exit_code(),
            1
        );
        let e = BatchError::Run {
            run: "S1_seed1".into(),
            source: SimError::Config("x".into()),
        };
        assert_eq!(e.exit_code(), 2);
    }
}
