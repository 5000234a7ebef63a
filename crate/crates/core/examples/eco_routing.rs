//! Routes one trip across the sample network under each objective, with a
//! slow, idling-heavy lane drop on Front St.

use ecoroute::network::{load_with_nodes, Connectivity};
use ecoroute::routing::{shortest_path, Objective};
use ecoroute::state::{LinkStateReport, NetworkStateView};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = load_with_nodes(
        format!("{dir}/sample_network.csv"),
        format!("{dir}/sample_nodes.csv"),
        Connectivity::Strong,
    )?;
    let reports: Vec<LinkStateReport> = net
        .links()
        .iter()
        .map(|l| {
            let base = LinkStateReport::free_flow(l, 1, 2.2 * l.speed_limit_kmh / 50.0, 0.004);
            if l.lanes == 1 && l.name.as_deref() == Some("Front St W lane drop") {
                LinkStateReport {
                    space_mean_speed: 6.0,
                    travel_time: l.length_m / 6.0,
                    idling_penalty: 60.0,
                    ghg_rate: 1.1,
                    density_ratio: 0.8,
                    stale: false,
                    ..base
                }
            } else {
                LinkStateReport {
                    stale: false,
                    ..base
                }
            }
        })
        .collect();
    let view = NetworkStateView::initial(&reports);
    for (o, d) in [("F1", "F3"), ("K1", "F4")] {
        let (o, d) = (net.node(o)?, net.node(d)?);
        for obj in [
            Objective::Tt,
            Objective::TtStar,
            Objective::R1,
            Objective::R2,
        ] {
            let spec = obj.spec();
            let path = shortest_path(&net, &view, &spec, o, d)?;
            let names: Vec<&str> = path.nodes.iter().map(|&n| net.node_name(n)).collect();
            let grams: f64 = path
                .links
                .iter()
                .map(|&l| view.report(l).mean_emission())
                .sum();
            let km: f64 = path
                .links
                .iter()
                .map(|&l| net.link(l).length_m)
                .sum::<f64>()
                / 1000.0;
            println!(
                "{:<3} cost {:>9.4}  {:.2} km  {:>6.1} g  {}",
                obj,
                path.cost,
                km,
                grams,
                names.join(" ")
            );
        }
    }
    Ok(())
}
