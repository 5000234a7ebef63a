mod common;

use common::*;
use ecoroute::sim::{generate_arrivals, DemandProfile, OdDemand};

#[test]
fn poisson_counts_have_the_right_moments() {
    let net =
        net_from("from_node,to_node,length_m,speed_kmh,lanes,direction\nA,B,100,50,1,twoway\n");
    let od = [OdDemand {
        origin: node(&net, "A"),
        dest: node(&net, "B"),
        start: 0,
        length: 300,
        expected: 12.0,
    }];
    let counts: Vec<f64> = (0..10_000u64)
        .map(|seed| generate_arrivals(&od, &fleet(), seed).len() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 12.0).abs() / 12.0 < 0.01, "mean {mean}");
    assert!((var - 12.0).abs() / 12.0 < 0.05, "variance {var}");
}

#[test]
fn departures_stay_inside_their_interval() {
    let net =
        net_from("from_node,to_node,length_m,speed_kmh,lanes,direction\nA,B,100,50,1,twoway\n");
    let profile = DemandProfile::from_csv_str(
        "origin,destination,interval_start_s,interval_length_s,expected_count\nA,B,0,300,30\nB,A,300,300,30\nA,B,600,300,0\n",
    )
    .unwrap();
    let arr = generate_arrivals(&profile.resolve(&net).unwrap(), &fleet(), 4);
    assert!(arr.iter().all(|a| a.depart < 600));
    let a_to_b = node(&net, "A");
    assert!(arr
        .iter()
        .filter(|a| a.origin == a_to_b)
        .all(|a| a.depart < 300));
    assert!(arr
        .windows(2)
        .all(|w| w[0].depart <= w[1].depart && w[0].vehicle.0 + 1 == w[1].vehicle.0));
}

#[test]
fn bundled_files_match_their_generators() {
    let rates = std::fs::read_to_string(data("rates_synthetic.csv")).unwrap();
    assert_eq!(
        rates,
        ecoroute::emission::EmissionRateTable::synthetic().to_csv()
    );
    let fleet_csv = std::fs::read_to_string(data("fleet_default.csv")).unwrap();
    assert_eq!(fleet_csv, fleet().to_csv());
}
