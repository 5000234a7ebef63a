//! One S5 run on the sample network, then its summary and network GHG series.

use ecoroute::emission::EmissionRateTable;
use ecoroute::metrics::{summarize, time_series, SeriesMetric};
use ecoroute::network::{load_with_nodes, Connectivity};
use ecoroute::sim::{run_scenario, DemandProfile, FleetComposition, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = load_with_nodes(
        format!("{dir}/sample_network.csv"),
        format!("{dir}/sample_nodes.csv"),
        Connectivity::Strong,
    )?;
    let demand = DemandProfile::load(format!("{dir}/sample_demand.csv"))?.resolve(&net)?;
    let rates = EmissionRateTable::load(format!("{dir}/rates_synthetic.csv"))?;
    let fleet = FleetComposition::load(format!("{dir}/fleet_default.csv"))?;
    let cfg = ScenarioConfig::load(format!("{dir}/scenario_s5.toml"))?;

    let out = run_scenario(&net, &demand, &fleet, &rates, &cfg)?;
    let s = summarize(cfg.scenario.as_str(), &out.trips)?;
    println!(
        "{}: {} vehicles ({} warm-up), last arrival t={} s",
        cfg.scenario, out.stats.injected, out.stats.warmup_vehicles, out.stats.ticks
    );
    println!(
        "mean TT  {:.1} s (median {:.1})",
        s.mean_tt_s, s.quartiles.tt_s.median
    );
    println!(
        "mean VKT {:.3} km, mean speed {:.1} km/h",
        s.mean_vkt_km, s.mean_speed_kmh
    );
    println!("GHG {:.2} kg, NOx {:.1} g", s.total_ghg_kg, s.total_nox_g);
    println!("network GHG per minute (g):");
    for p in time_series(&out.intervals, SeriesMetric::Ghg, cfg.routing_interval_s) {
        println!("  {:>5}-{:<5} {:>9.1}", p.start_s, p.end_s, p.value);
    }
    Ok(())
}
