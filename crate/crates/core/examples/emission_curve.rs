//! Steady-speed emission factors of the bundled rate table for a 2015
//! passenger car, plus the opmode of a few driving states.

use ecoroute::dynamics::{IdmParams, VehicleClass, VehicleId, VehicleKind, VehicleSpec};
use ecoroute::emission::{classify_opmode, vsp, EmissionRateTable, Pollutant};

fn main() {
    let rates = EmissionRateTable::synthetic();
    let car = VehicleSpec {
        id: VehicleId(0),
        kind: VehicleKind::Hdv,
        class: VehicleClass::PassengerCar,
        model_year: 2015,
        idm: IdmParams::hdv_default(),
    };
    println!("km/h  opmode  GHG g/km  NOx mg/km");
    for kmh in (10..=110).step_by(10) {
        let v = kmh as f64 / 3.6;
        let op = classify_opmode(v, 0.0);
        let ghg = rates.emission_rate(&car, op, Pollutant::Ghg) * 1000.0 / v;
        let nox = rates.emission_rate(&car, op, Pollutant::Nox) * 1000.0 / v;
        println!(
            "{kmh:>4}  {:>6}  {ghg:>8.1}  {:>9.2}",
            op.to_string(),
            nox * 1000.0
        );
    }
    for (v, a) in [(0.0, 0.0), (8.0, -1.5), (12.0, 1.2), (20.0, 0.8)] {
        let op = classify_opmode(v, a);
        println!(
            "v={v:>4} m/s a={a:>4} m/s2  VSP {:>6.2} kW/t  -> {}",
            vsp(v, a),
            op.description()
        );
    }
}
