//! Space-mean emission rates: per-vehicle rates averaged within a link section
//! and intermediate interval, then over intervals and sections.

use std::collections::BTreeMap;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleId;
use crate::network::LinkId;

/// Emitted mass in integer nanograms. Sums are exact and order-independent.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Mass(pub u64);

impl Mass {
    /// Mass emitted over one second at `rate` g/s.
    pub fn from_rate(rate_g_per_s: f64) -> Self {
        Mass((rate_g_per_s * 1e9).round() as u64)
    }

    pub fn from_grams(g: f64) -> Self {
        Mass((g * 1e9).round() as u64)
    }

    pub fn grams(self) -> f64 {
        self.0 as f64 / 1e9
    }
}

impl Add for Mass {
    type Output = Mass;
    fn add(self, rhs: Mass) -> Mass {
        Mass(self.0 + rhs.0)
    }
}

impl AddAssign for Mass {
    fn add_assign(&mut self, rhs: Mass) {
        self.0 += rhs.0;
    }
}

impl Sum for Mass {
    fn sum<I: Iterator<Item = Mass>>(iter: I) -> Mass {
        iter.fold(Mass(0), Add::add)
    }
}

/// One vehicle-second of emissions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionSample {
    pub vehicle: VehicleId,
    pub t: u32,
    pub link: LinkId,
    pub section: usize,
    /// g/s
    pub ghg: f64,
    /// g/s
    pub nox: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionMean {
    /// g/veh/s; 0 when no vehicle was present.
    pub value: f64,
    pub empty: bool,
}

/// Mean emission rate per vehicle for one section and intermediate interval.
///
/// `samples` holds `(vehicle, g/s)` for every second a vehicle spent in the
/// section. Each vehicle's seconds are first averaged into its rate, then the
/// rates of the `M` vehicles present are averaged.
pub fn section_mean_rate(samples: &[(VehicleId, f64)]) -> SectionMean {
    let mut per_vehicle: BTreeMap<VehicleId, (f64, u32)> = BTreeMap::new();
    for &(v, rate) in samples {
        let e = per_vehicle.entry(v).or_default();
        e.0 += rate;
        e.1 += 1;
    }
    if per_vehicle.is_empty() {
        return SectionMean {
            value: 0.0,
            empty: true,
        };
    }
    let m = per_vehicle.len() as f64;
    SectionMean {
        value: per_vehicle
            .values()
            .map(|(s, n)| s / *n as f64)
            .sum::<f64>()
            / m,
        empty: false,
    }
}

/// Link space-mean rate from `section_interval[p][ω]` means: average over the
/// Ω intermediate intervals per section, then over the P sections.
pub fn link_mean_rate(section_interval: &[Vec<f64>]) -> f64 {
    let p = section_interval.len() as f64;
    section_interval
        .iter()
        .map(|per_interval| per_interval.iter().sum::<f64>() / per_interval.len() as f64)
        .sum::<f64>()
        / p
}

/// Average emission per vehicle on a link, grams: rate × average travel time.
pub fn link_mean_emission(rate_g_per_veh_s: f64, travel_time_s: f64) -> f64 {
    debug_assert!(travel_time_s >= 0.0);
    rate_g_per_veh_s * travel_time_s
}

/// Per-link collector for one routing interval: per (section, intermediate
/// interval), per vehicle, summed rate and seconds, for both pollutants.
#[derive(Debug, Clone)]
pub struct LinkEmissionWindow {
    sections: usize,
    intervals: usize,
    cells: Vec<BTreeMap<VehicleId, CellAcc>>,
}

#[derive(Debug, Clone, Copy, Default)]
struct CellAcc {
    ghg: f64,
    nox: f64,
    seconds: u32,
}

/// Outcome of aggregating one link window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRates {
    pub ghg: f64,
    pub nox: f64,
    /// Cells with no vehicle, out of `sections × intervals`.
    pub empty_cells: usize,
    pub all_empty: bool,
}

impl LinkEmissionWindow {
    pub fn new(sections: usize, intervals: usize) -> Self {
        LinkEmissionWindow {
            sections,
            intervals,
            cells: vec![BTreeMap::new(); sections * intervals],
        }
    }

    pub fn record(
        &mut self,
        section: usize,
        interval: usize,
        vehicle: VehicleId,
        ghg: f64,
        nox: f64,
    ) {
        let cell = self.cells[section * self.intervals + interval]
            .entry(vehicle)
            .or_default();
        cell.ghg += ghg;
        cell.nox += nox;
        cell.seconds += 1;
    }

    pub fn rates(&self) -> LinkRates {
        let mut ghg = vec![vec![0.0; self.intervals]; self.sections];
        let mut nox = vec![vec![0.0; self.intervals]; self.sections];
        let mut empty_cells = 0;
        for p in 0..self.sections {
            for w in 0..self.intervals {
                let cell = &self.cells[p * self.intervals + w];
                if cell.is_empty() {
                    empty_cells += 1;
                    continue;
                }
                let m = cell.len() as f64;
                ghg[p][w] = cell.values().map(|c| c.ghg / c.seconds as f64).sum::<f64>() / m;
                nox[p][w] = cell.values().map(|c| c.nox / c.seconds as f64).sum::<f64>() / m;
            }
        }
        LinkRates {
            ghg: link_mean_rate(&ghg),
            nox: link_mean_rate(&nox),
            empty_cells,
            all_empty: empty_cells == self.sections * self.intervals,
        }
    }

    pub fn clear(&mut self) {
        self.cells.iter_mut().for_each(BTreeMap::clear);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> VehicleId {
        VehicleId(i)
    }

    #[test]
    fn section_means() {
        assert_eq!(section_mean_rate(&[(v(1), 1.0), (v(2), 3.0)]).value, 2.0);
        assert_eq!(section_mean_rate(&[(v(1), 2.5)]).value, 2.5);
        let e = section_mean_rate(&[]);
        assert!(e.empty && e.value == 0.0);
        // vehicle 1 averages to 2 over two seconds, vehicle 2 is 4
        assert_eq!(
            section_mean_rate(&[(v(1), 1.0), (v(1), 3.0), (v(2), 4.0)]).value,
            3.0
        );
    }

    #[test]
    fn link_mean_nesting() {
        assert_eq!(link_mean_rate(&[vec![1.0, 3.0], vec![2.0, 4.0]]), 2.5);
        assert!((link_mean_rate(&vec![vec![0.7; 3]; 3]) - 0.7).abs() < 1e-15);
        assert_eq!(link_mean_emission(2.0, 60.0), 120.0);
        assert_eq!(link_mean_emission(0.0, 60.0), 0.0);
    }

    #[test]
    fn window_matches_free_functions() {
        let mut w = LinkEmissionWindow::new(2, 2);
        w.record(0, 0, v(1), 1.0, 0.1);
        w.record(0, 0, v(2), 3.0, 0.3);
        w.record(1, 1, v(1), 2.0, 0.2);
        let r = w.rates();
        // cells: [[2, 0], [0, 2]] -> (1 + 1) / 2
        assert_eq!(r.ghg, 1.0);
        assert_eq!(r.empty_cells, 2);
        assert!(!r.all_empty);
        w.clear();
        assert!(w.rates().all_empty);
    }

    #[test]
    fn mass_is_exact() {
        let a = Mass::from_rate(0.1) + Mass::from_rate(0.2);
        assert_eq!(a, Mass::from_rate(0.3));
        assert_eq!(Mass::from_grams(a.grams()), a);
    }

    proptest! {
        #[test]
        fn one_sample_per_vehicle_is_plain_mean(rates in prop::collection::vec(0.0f64..10.0, 1..100)) {
            let samples: Vec<_> = rates.iter().enumerate().map(|(i, &r)| (v(i as u32), r)).collect();
            let mut sum = 0.0;
            for r in &rates { sum += r; }
            let oracle = sum / rates.len() as f64;
            prop_assert!((section_mean_rate(&samples).value - oracle).abs() <= 1e-12);
        }

        #[test]
        fn permutation_invariant(rates in prop::collection::vec(0.0f64..10.0, 1..40)) {
            let samples: Vec<_> = rates.iter().enumerate().map(|(i, &r)| (v(i as u32 % 7), r)).collect();
            let mut rev = samples.clone();
            rev.reverse();
            prop_assert!((section_mean_rate(&samples).value - section_mean_rate(&rev).value).abs() <= 1e-12);
        }
    }
}
