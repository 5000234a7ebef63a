//! A platoon of five IDM followers behind a leader that cruises, brakes hard
//! and recovers. Prints the smallest gap and the speeds every ten seconds.

use ecoroute::dynamics::idm::{idm_accel, IdmParams, Leader};

const VEHICLE_LENGTH: f64 = 5.0;

fn main() {
    let p = IdmParams::hdv_default().with_desired_speed(50.0 / 3.6);
    let n = 6;
    let mut pos: Vec<f64> = (0..n).map(|i| -(i as f64) * 30.0).collect();
    let mut vel = vec![10.0; n];
    let mut min_gap = f64::INFINITY;
    for t in 0..120u32 {
        let mut acc = vec![0.0; n];
        for i in 0..n {
            acc[i] = if i == 0 {
                // leader: brakes between t = 40 and 45
                if (40..45).contains(&t) {
                    -3.0
                } else {
                    idm_accel(vel[0], None, &p, 6.0).value
                }
            } else {
                let leader = Leader {
                    gap: pos[i - 1] - pos[i] - VEHICLE_LENGTH,
                    speed: vel[i - 1],
                };
                idm_accel(vel[i], Some(leader), &p, 6.0).value
            };
        }
        for i in 0..n {
            let v = (vel[i] + acc[i]).max(0.0);
            pos[i] += (vel[i] + v) / 2.0;
            vel[i] = v;
        }
        for i in 1..n {
            min_gap = min_gap.min(pos[i - 1] - pos[i] - VEHICLE_LENGTH);
        }
        if t % 10 == 9 {
            let speeds: Vec<String> = vel.iter().map(|v| format!("{:5.2}", v)).collect();
            println!("t={:>3}s  speeds [{}]", t + 1, speeds.join(" "));
        }
    }
    println!("smallest gap over the run: {min_gap:.2} m");
    println!(
        "equilibrium gap at 10 m/s: {:.2} m",
        p.equilibrium_gap(10.0)
    );
}
