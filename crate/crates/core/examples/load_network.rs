//! Loads the bundled downtown sample network and prints its links and the
//! hop distances from the west end.

use ecoroute::network::{load_with_nodes, Connectivity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = load_with_nodes(
        format!("{dir}/sample_network.csv"),
        format!("{dir}/sample_nodes.csv"),
        Connectivity::Strong,
    )?;
    println!(
        "{} intersections, {} directed links",
        net.node_count(),
        net.link_count()
    );
    for l in net.links() {
        println!(
            "{:>3} {:>3} -> {:<3} {:>5.0} m {:>3.0} km/h {} lane(s), {} sections  {}",
            l.id.0,
            net.node_name(l.from),
            net.node_name(l.to),
            l.length_m,
            l.speed_limit_kmh,
            l.lanes,
            l.section_count,
            l.name.as_deref().unwrap_or(""),
        );
    }
    let origin = net.node("Q1")?;
    for (i, d) in net.hop_distances(origin).iter().enumerate() {
        println!(
            "hops Q1 -> {}: {:?}",
            net.node_name(ecoroute::network::NodeId(i as u32)),
            d
        );
    }
    Ok(())
}
