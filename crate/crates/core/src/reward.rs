//! Four-case navigation reward: goal arrival, collision, discomfort and open
//! space, plus the optional angular-rate smoothness penalty.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Arrival,
    Collision,
    Timeout,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Arrival => "arrival",
            Terminal::Collision => "collision",
            Terminal::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    pub r_robot: f64,
    pub r_dis: f64,
    pub w_dis: f64,
    pub w_goal: f64,
    pub w_ang: f64,
    pub terminal_bonus: f64,
    pub collision_penalty: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            r_robot: 0.3,
            r_dis: 0.5,
            w_dis: 0.4,
            w_goal: 1.4,
            w_ang: 0.01,
            terminal_bonus: 0.5,
            collision_penalty: -0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    pub d_goal_prev: f64,
    pub d_goal: f64,
    /// Minimum range of the current raw scan.
    pub d_min: f64,
    pub w_prev: f64,
    pub w_now: f64,
}

/// Reward for one step and the terminal condition it implies, if any.
///
/// Cases are checked in order: arrival, collision, discomfort, open space.
pub fn nav_reward(inputs: &RewardInputs, params: &RewardParams) -> (f64, Option<Terminal>) {
    let RewardInputs { d_goal_prev, d_goal, d_min, .. } = *inputs;
    if d_goal <= params.r_robot {
        return (params.terminal_bonus, Some(Terminal::Arrival));
    }
    if d_min <= params.r_robot {
        return (params.collision_penalty, Some(Terminal::Collision));
    }
    let goal_term = params.w_goal * (d_goal_prev - d_goal);
    if d_min <= params.r_robot + params.r_dis {
        let discomfort = params.w_dis * (d_min - params.r_robot - params.r_dis);
        (discomfort + goal_term, None)
    } else {
        (goal_term, None)
    }
}

pub fn angular_penalty(w_prev: f64, w_now: f64, w_ang: f64) -> f64 {
    -w_ang * (w_now - w_prev).abs()
}
