//! Intelligent Driver Model.

use serde::{Deserialize, Serialize};

/// Parameters of one driver/vehicle combination. `desired_speed` is replaced
/// by the link speed limit while the vehicle drives on a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// v0, m/s
    pub desired_speed: f64,
    /// a_max, m/s²
    pub max_accel: f64,
    /// b, m/s²
    pub comfortable_decel: f64,
    /// T, s
    pub time_headway: f64,
    /// s0, m
    pub min_gap: f64,
    /// δ
    pub accel_exponent: f64,
}

impl IdmParams {
    /// Conventional human-driver defaults.
    pub fn hdv_default() -> Self {
        IdmParams {
            desired_speed: 50.0 / 3.6,
            max_accel: 1.5,
            comfortable_decel: 2.0,
            time_headway: 1.6,
            min_gap: 4.0,
            accel_exponent: 4.0,
        }
    }

    /// Connected/automated profile derived from a human profile: reaction
    /// headway and minimum gap are halved, acceleration limits are kept.
    pub fn automated_from(human: &IdmParams) -> Self {
        IdmParams {
            time_headway: human.time_headway / 2.0,
            min_gap: human.min_gap / 2.0,
            ..*human
        }
    }

    pub fn cav_default() -> Self {
        Self::automated_from(&Self::hdv_default())
    }

    pub fn with_desired_speed(self, desired_speed: f64) -> Self {
        IdmParams {
            desired_speed,
            ..self
        }
    }

    pub fn is_valid(&self) -> bool {
        [
            self.desired_speed,
            self.max_accel,
            self.comfortable_decel,
            self.time_headway,
            self.min_gap,
            self.accel_exponent,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    }

    /// Desired dynamic gap s*(v, Δv).
    pub fn desired_gap(&self, speed: f64, approach_rate: f64) -> f64 {
        self.min_gap
            + speed * self.time_headway
            + speed * approach_rate / (2.0 * (self.max_accel * self.comfortable_decel).sqrt())
    }

    /// Gap at which a vehicle following a leader at the same speed `v` has zero
    /// acceleration. Undefined (infinite) at `v >= v0`.
    pub fn equilibrium_gap(&self, speed: f64) -> f64 {
        let free = 1.0 - (speed / self.desired_speed).powf(self.accel_exponent);
        self.desired_gap(speed, 0.0) / free.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader {
    /// Bumper-to-bumper gap, m.
    pub gap: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceleration {
    pub value: f64,
    /// Set when the gap to the leader was non-positive.
    pub emergency: bool,
}

/// IDM acceleration, clamped below at `-emergency_decel`.
pub fn idm_accel(
    speed: f64,
    leader: Option<Leader>,
    p: &IdmParams,
    emergency_decel: f64,
) -> Acceleration {
    let free = p.max_accel * (1.0 - (speed / p.desired_speed).powf(p.accel_exponent));
    let (raw, emergency) = match leader {
        None => (free, false),
        Some(l) if l.gap <= 0.0 => (-emergency_decel, true),
        Some(l) => {
            let s_star = p.desired_gap(speed, speed - l.speed).max(0.0);
            (free - p.max_accel * (s_star / l.gap).powi(2), false)
        }
    };
    Acceleration {
        value: raw.max(-emergency_decel),
        emergency,
    }
}
