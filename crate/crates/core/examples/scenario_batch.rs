//! All five scenarios over three seeds on the sample network, followed by a
//! comparison against the human-driven baseline. Output goes to a temporary
//! directory unless one is given as the first argument.

use std::path::PathBuf;

use ecoroute::batch::{cmd_compare, cmd_run, CompareRequest, InputPaths, RunRequest};
use ecoroute::metrics::{Metric, SampleUnit};
use ecoroute::sim::ScenarioId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data"));
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ecoroute_batch"));
    let runs = cmd_run(&RunRequest {
        inputs: InputPaths {
            network: dir.join("sample_network.csv"),
            nodes: Some(dir.join("sample_nodes.csv")),
            demand: dir.join("sample_demand.csv"),
            rates: dir.join("rates_synthetic.csv"),
            fleet: Some(dir.join("fleet_default.csv")),
        },
        config: None,
        scenarios: ScenarioId::ALL.to_vec(),
        seeds: vec![1, 2, 3],
        out: out.clone(),
        dissemination: None,
        gridlock_horizon_s: None,
    })?;
    println!("{} runs under {}", runs.len(), out.display());
    let table = cmd_compare(&CompareRequest {
        runs: vec![out.clone()],
        baseline: "S1".into(),
        out: Some(out.join("comparison")),
        unit: SampleUnit::Trip,
    })?;
    println!("scenario    TT %   VKT %   GHG %   NOx %");
    for id in ScenarioId::ALL {
        let pct = |m| {
            table
                .change(id.as_str(), m)
                .map_or(f64::NAN, |c| c.change_pct)
        };
        println!(
            "{:<8} {:>6.1} {:>7.1} {:>7.1} {:>7.1}",
            id,
            pct(Metric::Tt),
            pct(Metric::Vkt),
            pct(Metric::Ghg),
            pct(Metric::Nox)
        );
    }
    if let Some(t) = table.test("S1", "S5", Metric::Tt) {
        println!(
            "S1 vs S5 travel time: t = {:.3}, p = {:.4}",
            t.t.unwrap_or(f64::NAN),
            t.p.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
