mod common;

use common::*;
use ecoroute::network::LinkId;
use ecoroute::state::{disseminate, DisseminationMode, LinkStateReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rounds(priors: &[LinkStateReport], n: u32) -> Vec<(u32, Vec<LinkStateReport>)> {
    (0..n)
        .map(|j| {
            let reports = priors
                .iter()
                .map(|r| LinkStateReport {
                    interval: j,
                    stale: false,
                    ..*r
                })
                .collect();
            (j, reports)
        })
        .collect()
}

#[test]
fn gossip_ages_follow_hop_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..20 {
        let n = rng.random_range(3..=14);
        let net = random_network(&mut rng, n, n);
        let k = rng.random_range(1..=3);
        let r = rng.random_range(1..=6);
        let priors: Vec<LinkStateReport> = net
            .links()
            .iter()
            .map(|l| LinkStateReport::free_flow(l, 0, 1.0, 0.0))
            .collect();
        let views = disseminate(
            &net,
            DisseminationMode::HopGossip(k),
            &priors,
            &rounds(&priors, r),
        );
        for l in net.links() {
            let hops = bfs_hops(&net, l.to);
            for node in 0..n {
                let d = hops[node].expect("weakly connected");
                let age = d.div_ceil(k);
                let expected = (age < r).then_some(age);
                assert_eq!(
                    views[node].age(l.id),
                    expected,
                    "case {case}: link {} at node {node}, {d} hops, k={k}, {r} rounds",
                    l.id
                );
            }
        }
    }
}

#[test]
fn idealized_views_are_current_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let net = random_network(&mut rng, 8, 6);
    let priors: Vec<LinkStateReport> = net
        .links()
        .iter()
        .map(|l| LinkStateReport::free_flow(l, 0, 1.0, 0.0))
        .collect();
    let views = disseminate(
        &net,
        DisseminationMode::Idealized,
        &priors,
        &rounds(&priors, 3),
    );
    for v in &views {
        assert_eq!(v, &views[0]);
        assert!((0..net.link_count()).all(|l| v.age(LinkId(l as u32)) == Some(0)));
    }
    let untouched = disseminate(&net, DisseminationMode::HopGossip(1), &priors, &[]);
    assert!(untouched
        .iter()
        .all(|v| v.age(LinkId(0)).is_none() && v.report(LinkId(0)).stale));
}
