//! Density heatmap of the congested grid fixture at the busiest routing
//! interval, as per-link values and as a 100 m raster.

use ecoroute::emission::EmissionRateTable;
use ecoroute::metrics::{heatmap_grid, rasterize, HeatField};
use ecoroute::sim::{
    generate_grid_network, run_scenario, FleetComposition, GridSpec, ScenarioConfig, ScenarioId,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (net, profile) = generate_grid_network(4, 6, &GridSpec::desk())?;
    let demand = profile.resolve(&net)?;
    let cfg = ScenarioConfig::preset(ScenarioId::S1, 1);
    let out = run_scenario(
        &net,
        &demand,
        &FleetComposition::default_mix(),
        &EmissionRateTable::synthetic(),
        &cfg,
    )?;

    let peak = out
        .intervals
        .iter()
        .max_by(|a, b| a.density_ratio.total_cmp(&b.density_ratio))
        .map(|r| r.interval)
        .unwrap_or(0);
    let mut cells = heatmap_grid(&out.intervals, peak, HeatField::DensityRatio)?;
    cells.sort_by(|a, b| b.value.total_cmp(&a.value));
    println!(
        "interval {peak} (t = {} s), densest links:",
        peak * cfg.routing_interval_s
    );
    for c in cells.iter().take(6) {
        println!("  {:>5} -> {:<5} {:.3}", c.from, c.to, c.value);
    }
    let raster = rasterize(&net, &cells, 100.0)?;
    println!("{} x {} raster, first rows:", raster.cols, raster.rows);
    for line in raster.to_csv().lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
