//! Operating-mode binning from instantaneous speed and acceleration.
//!
//! Vehicle-specific power (kW/t) for a light-duty vehicle:
//! `VSP = v·(1.1·a + 0.132) + 0.000302·v³` with `v` in m/s and `a` in m/s².
//!
//! | id    | condition                                   |
//! |-------|---------------------------------------------|
//! | 0     | braking, `a <= -0.894`                      |
//! | 1     | idle, `v < 0.45`                            |
//! | 11–16 | `v < 11.2`, VSP bands <0, 0–3, 3–6, 6–9, 9–12, ≥12 |
//! | 21–26 | `11.2 <= v < 22.3`, same VSP bands          |
//! | 31–36 | `v >= 22.3`, same VSP bands                 |

use std::fmt;

use serde::{Deserialize, Serialize};

pub const BRAKING_ACCEL: f64 = -0.894;
pub const IDLE_SPEED: f64 = 0.45;
const SPEED_BANDS: [f64; 2] = [11.2, 22.3];
const VSP_BANDS: [f64; 5] = [0.0, 3.0, 6.0, 9.0, 12.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpMode(pub u8);

impl OpMode {
    pub const BRAKING: OpMode = OpMode(0);
    pub const IDLE: OpMode = OpMode(1);

    /// All 20 operating modes in ascending id order.
    pub fn all() -> Vec<OpMode> {
        let mut out = vec![OpMode::BRAKING, OpMode::IDLE];
        for band in 1..=3u8 {
            for p in 1..=6u8 {
                out.push(OpMode(band * 10 + p));
            }
        }
        out
    }

    pub fn is_valid(self) -> bool {
        matches!(self.0, 0 | 1 | 11..=16 | 21..=26 | 31..=36)
    }

    pub fn description(self) -> String {
        match self.0 {
            0 => "braking".into(),
            1 => "idle".into(),
            id => {
                let speed = ["", "low speed", "moderate speed", "high speed"][(id / 10) as usize];
                let power = [
                    "", "VSP<0", "VSP 0-3", "VSP 3-6", "VSP 6-9", "VSP 9-12", "VSP>=12",
                ][(id % 10) as usize];
                format!("{speed}, {power}")
            }
        }
    }
}

impl fmt::Display for OpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn vsp(speed: f64, accel: f64) -> f64 {
    speed * (1.1 * accel + 0.132) + 0.000302 * speed.powi(3)
}

pub fn classify_opmode(speed: f64, accel: f64) -> OpMode {
    debug_assert!(speed >= 0.0);
    if accel <= BRAKING_ACCEL {
        return OpMode::BRAKING;
    }
    if speed < IDLE_SPEED {
        return OpMode::IDLE;
    }
    let band = 1 + SPEED_BANDS.iter().filter(|&&b| speed >= b).count() as u8;
    let power = vsp(speed, accel);
    let bin = 1 + VSP_BANDS.iter().filter(|&&b| power >= b).count() as u8;
    OpMode(band * 10 + bin)
}
