//! Differential-drive propagation for the ego-agent.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{normalize_angle, Pose2, Vec2};

/// Forward-speed threshold below which the unified controller stops entirely.
pub const CLIP_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicLimits {
    pub v_max: f64,
    pub w_max: f64,
    pub dt: f64,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            w_max: 1.0,
            dt: 0.2,
        }
    }
}

impl KinematicLimits {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, value) in [("v_max", self.v_max), ("w_max", self.w_max), ("dt", self.dt)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        Ok(())
    }
}

/// Linear and angular velocity command, always inside the limits it was
/// built against.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NavAction {
    v: f64,
    w: f64,
}

impl NavAction {
    pub const ZERO: NavAction = NavAction { v: 0.0, w: 0.0 };

    /// Clamps `v` into `[0, v_max]` and `w` into `[-w_max, w_max]`.
    /// Non-finite components become zero.
    pub fn new(v: f64, w: f64, limits: &KinematicLimits) -> Self {
        let sane = |x: f64| if x.is_finite() { x } else { 0.0 };
        Self {
            v: sane(v).clamp(0.0, limits.v_max),
            w: sane(w).clamp(-limits.w_max, limits.w_max),
        }
    }

    #[inline]
    pub fn v(&self) -> f64 {
        self.v
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn within(&self, limits: &KinematicLimits) -> bool {
        (0.0..=limits.v_max).contains(&self.v) && self.w.abs() <= limits.w_max
    }
}

/// Explicit Euler step of the unicycle model.
pub fn step_differential(state: &Pose2, action: &NavAction, dt: f64) -> Pose2 {
    let theta = state.heading();
    let position = Vec2::new(
        state.position.x + action.v * theta.cos() * dt,
        state.position.y + action.v * theta.sin() * dt,
    );
    Pose2::new(position, normalize_angle(theta + action.w * dt))
}

/// Zeroes the whole command when the forward speed is below `threshold`.
pub fn clip_action(raw: NavAction, threshold: f64) -> NavAction {
    if raw.v < threshold {
        NavAction::ZERO
    } else {
        raw
    }
}
