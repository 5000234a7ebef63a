//! How far a link report travels per routing interval under hop-limited
//! gossip compared with idealized broadcast, on a 3 x 4 grid.

use ecoroute::network::{LinkId, NodeId};
use ecoroute::sim::{generate_grid_network, GridSpec};
use ecoroute::state::{disseminate, DisseminationMode, LinkStateReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (net, _) = generate_grid_network(3, 4, &GridSpec::uniform())?;
    let priors: Vec<LinkStateReport> = net
        .links()
        .iter()
        .map(|l| LinkStateReport::free_flow(l, 0, 2.0, 0.003))
        .collect();
    // a jam on the first link, reported every interval
    let jam = LinkId(0);
    let rounds: Vec<(u32, Vec<LinkStateReport>)> = (1..=3)
        .map(|j| {
            let mut r = priors.clone();
            r[jam.index()] = LinkStateReport {
                interval: j,
                space_mean_speed: 1.0,
                travel_time: 300.0,
                density_ratio: 0.9,
                stale: false,
                ..r[jam.index()]
            };
            (j, r)
        })
        .collect();
    for mode in [
        DisseminationMode::Idealized,
        DisseminationMode::HopGossip(1),
        DisseminationMode::HopGossip(2),
    ] {
        println!("{mode}: age of the link-0 report in intervals (- = not yet heard)");
        let views = disseminate(&net, mode, &priors, &rounds);
        for r in 0..3 {
            let row: Vec<String> = (0..4)
                .map(|c| {
                    let node = NodeId(r * 4 + c);
                    match views[node.index()].age(jam) {
                        Some(a) => format!("{a:>3}"),
                        None => "  -".into(),
                    }
                })
                .collect();
            println!("  {}", row.join(""));
        }
    }
    Ok(())
}
