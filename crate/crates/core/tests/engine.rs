mod common;

use std::collections::BTreeMap;

use common::*;
use ecoroute::dynamics::idm::{idm_accel, IdmParams, Leader};
use ecoroute::dynamics::DynamicsConfig;
use ecoroute::emission::Mass;
use ecoroute::metrics::{heatmap_grid, network_series, summarize, HeatField};
use ecoroute::sim::records::to_csv_string;
use ecoroute::sim::{run_arrivals, run_scenario, RunOptions, ScenarioConfig, ScenarioId, SimError};

const LINE: &str = "from_node,to_node,length_m,speed_kmh,lanes,direction\n\
                    A,B,500,50,1,oneway\n\
                    B,C,300,50,1,oneway\n";

/// Single vehicle under the documented tick law: accelerate from standstill
/// on each link toward the stopline obstacle (free road on the last link),
/// v' = max(0, v + a) capped at the limit, x' = x + v. A vehicle reaching
/// the stopline stands there one tick and crosses on the next.
fn kinematic_tt(links: &[(f64, f64)], p: IdmParams, dyn_cfg: DynamicsConfig) -> u32 {
    let mut t = 0u32;
    for (i, &(length, v0)) in links.iter().enumerate() {
        let last = i + 1 == links.len();
        let p = p.with_desired_speed(v0);
        let (mut x, mut v) = (0.0f64, 0.0f64);
        loop {
            let leader = (!last).then_some(Leader {
                gap: length + p.min_gap + dyn_cfg.stopline_margin - x,
                speed: 0.0,
            });
            let a = idm_accel(v, leader, &p, dyn_cfg.emergency_decel).value;
            let mut nv = (v + a).max(0.0);
            if v <= v0 && nv > v0 {
                nv = v0;
            }
            x += v;
            v = nv;
            t += 1;
            if x >= length {
                break;
            }
        }
        if !last {
            t += 1;
        }
    }
    t
}

#[test]
fn single_vehicle_matches_kinematic_oracle() {
    let net = net_from(LINE);
    let arr = arrivals(&[(0, "A", "C")], &net);
    for id in [ScenarioId::S1, ScenarioId::S5] {
        let cfg = ScenarioConfig::preset(id, 1);
        let out = run_arrivals(&net, &arr, &rates(), &cfg, RunOptions::default()).unwrap();
        let trip = &out.trips[0];
        let p = match id {
            ScenarioId::S1 => IdmParams::hdv_default(),
            _ => IdmParams::cav_default(),
        };
        let v0 = 50.0 / 3.6;
        let expected = kinematic_tt(&[(500.0, v0), (300.0, v0)], p, cfg.dynamics);
        assert_eq!(trip.tt_s, expected as f64, "{id}");
        assert!(trip.tt_s >= 800.0 / v0);
        assert!((trip.vkt_km - 0.8).abs() < 1e-9);
        assert!((trip.mean_speed_kmh - trip.vkt_km / (trip.tt_s / 3600.0)).abs() < 1e-9);
    }
}

#[test]
fn runs_are_deterministic() {
    let (net, demand) = desk();
    let cfg = ScenarioConfig::preset(ScenarioId::S5, 7);
    let a = run_scenario(&net, &demand, &fleet(), &rates(), &cfg).unwrap();
    let b = run_scenario(&net, &demand, &fleet(), &rates(), &cfg).unwrap();
    assert_eq!(to_csv_string(&a.trips), to_csv_string(&b.trips));
    assert_eq!(to_csv_string(&a.intervals), to_csv_string(&b.intervals));
    assert_eq!(to_csv_string(&a.decisions), to_csv_string(&b.decisions));
}

#[test]
fn every_injected_vehicle_arrives() {
    let (net, demand) = desk();
    for id in [ScenarioId::S1, ScenarioId::S3] {
        let out = run_scenario(
            &net,
            &demand,
            &fleet(),
            &rates(),
            &ScenarioConfig::preset(id, 2),
        )
        .unwrap();
        assert_eq!(out.trips.len() as u32, out.stats.injected);
        assert!(out.stats.injected > 500);
        assert!(out
            .trips
            .iter()
            .all(|t| t.tt_s > 0.0 && t.arrive_s > t.depart_s));
        let warm = out.trips.iter().filter(|t| t.warmup).count() as u32;
        assert_eq!(warm, out.stats.warmup_vehicles);
        assert!(out.trips.iter().all(|t| t.warmup == (t.depart_s < 300)));
    }
}

#[test]
fn emission_totals_reconcile_exactly() {
    let (net, demand) = desk();
    let cfg = ScenarioConfig::preset(ScenarioId::S2, 3);
    let arr = ecoroute::sim::generate_arrivals(&demand, &fleet(), cfg.seed);
    let opts = RunOptions {
        record_samples: true,
        record_trajectory: false,
    };
    let out = run_arrivals(&net, &arr, &rates(), &cfg, opts).unwrap();
    let warm: Vec<bool> = out.trips.iter().map(|t| t.warmup).collect();
    let from_samples: Mass = out
        .samples
        .iter()
        .filter(|s| !warm[s.vehicle.index()])
        .map(|s| Mass::from_rate(s.ghg))
        .sum();
    let from_trips: Mass = out.metric_trips().map(|t| t.ghg()).sum();
    let from_intervals: Mass = out.intervals.iter().map(|r| Mass(r.metric_ghg_ng)).sum();
    let from_series: Mass = network_series(&out.intervals, cfg.routing_interval_s)
        .iter()
        .map(|p| p.ghg)
        .sum();
    let summary = summarize("S2", &out.trips).unwrap();
    assert!(from_samples.0 > 0);
    assert_eq!(from_samples, from_trips);
    assert_eq!(from_trips, from_intervals);
    assert_eq!(from_intervals, from_series);
    assert_eq!(from_series, summary.total_ghg());
    let all_nox: Mass = out.samples.iter().map(|s| Mass::from_rate(s.nox)).sum();
    assert_eq!(all_nox, out.intervals.iter().map(|r| Mass(r.nox_ng)).sum());
    // production stops with the last vehicle
    let series = network_series(&out.intervals, cfg.routing_interval_s);
    assert!(series.last().unwrap().end_s <= out.stats.ticks + cfg.routing_interval_s);
}

#[test]
fn reported_speed_matches_trajectory() {
    let (net, demand) = desk();
    let cfg = ScenarioConfig::preset(ScenarioId::S4, 4);
    let arr = ecoroute::sim::generate_arrivals(&demand, &fleet(), cfg.seed);
    let opts = RunOptions {
        record_samples: false,
        record_trajectory: true,
    };
    let out = run_arrivals(&net, &arr, &rates(), &cfg, opts).unwrap();
    let mut acc: BTreeMap<(u32, u32), (f64, f64)> = BTreeMap::new();
    for p in &out.trajectory {
        let e = acc
            .entry((p.link.0, p.t / cfg.routing_interval_s))
            .or_default();
        e.0 += p.distance;
        e.1 += 1.0;
    }
    let mut checked = 0;
    for r in &out.intervals {
        match acc.get(&(r.link, r.interval)) {
            Some(&(d, vs)) => {
                let u = (d / vs).max(cfg.min_report_speed);
                assert!((r.space_mean_speed - u).abs() < 1e-9, "{r:?}");
                assert!(
                    (r.travel_time - net.link(ecoroute::network::LinkId(r.link)).length_m / u)
                        .abs()
                        < 1e-9
                );
                assert!(!r.stale);
                checked += 1;
            }
            None => {
                assert!(r.stale);
                assert_eq!(r.vehicle_seconds, 0.0);
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn objectives_agree_without_alternatives() {
    let net = net_from(LINE);
    let arr = arrivals(
        &[
            (0, "A", "C"),
            (20, "A", "C"),
            (45, "B", "C"),
            (400, "A", "C"),
        ],
        &net,
    );
    let base = run_arrivals(
        &net,
        &arr,
        &rates(),
        &ScenarioConfig::preset(ScenarioId::S2, 1),
        RunOptions::default(),
    )
    .unwrap();
    for id in [ScenarioId::S3, ScenarioId::S4, ScenarioId::S5] {
        let out = run_arrivals(
            &net,
            &arr,
            &rates(),
            &ScenarioConfig::preset(id, 1),
            RunOptions::default(),
        )
        .unwrap();
        assert_eq!(out.trips, base.trips, "{id}");
    }
}

#[test]
fn lane_drop_upstream_link_is_densest_at_peak() {
    let (net, demand) = desk();
    let out = run_scenario(
        &net,
        &demand,
        &fleet(),
        &rates(),
        &ScenarioConfig::preset(ScenarioId::S1, 1),
    )
    .unwrap();
    let peak = out
        .intervals
        .iter()
        .max_by(|a, b| a.density_ratio.total_cmp(&b.density_ratio))
        .unwrap()
        .interval;
    let cells = heatmap_grid(&out.intervals, peak, HeatField::DensityRatio).unwrap();
    assert!(cells.iter().all(|c| (0.0..=1.0).contains(&c.value)));
    let top = cells
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .unwrap();
    assert_eq!((top.from.as_str(), top.to.as_str()), ("r1c1", "r1c2"));
}

#[test]
fn free_flow_network_is_sparse() {
    let net = net_from(LINE);
    let arr = arrivals(&[(0, "A", "C"), (200, "A", "C")], &net);
    let out = run_arrivals(
        &net,
        &arr,
        &rates(),
        &ScenarioConfig::preset(ScenarioId::S2, 1),
        RunOptions::default(),
    )
    .unwrap();
    assert!(out.intervals.iter().all(|r| r.density_ratio < 0.2));
}

#[test]
fn gridlock_aborts_with_dump() {
    // one-way ring of short links, everyone going most of the way around
    let names: Vec<String> = (0..8).map(|i| format!("N{i}")).collect();
    let mut csv = String::from("from_node,to_node,length_m,speed_kmh,lanes,direction\n");
    for i in 0..8 {
        csv.push_str(&format!(
            "{},{},15,30,1,oneway\n",
            names[i],
            names[(i + 1) % 8]
        ));
    }
    let net = net_from(&csv);
    let mut list = Vec::new();
    for k in 0..40u32 {
        for i in 0..8 {
            list.push((k, names[i].as_str(), names[(i + 7) % 8].as_str()));
        }
    }
    let arr = arrivals(&list, &net);
    let mut cfg = ScenarioConfig::preset(ScenarioId::S1, 1);
    cfg.gridlock_horizon_s = 120;
    match run_arrivals(&net, &arr, &rates(), &cfg, RunOptions::default()) {
        Err(SimError::Gridlock(dump)) => {
            assert!(dump.t - dump.last_progress >= 120);
            assert!(dump.on_links > 0);
            assert_eq!(
                dump.vehicles.len() as u32,
                dump.on_links + dump.waiting_at_origins
            );
        }
        other => panic!("expected gridlock, got {:?}", other.map(|o| o.stats)),
    }
}
