//! Classical planners used as benchmarks: a dynamic-window search and ORCA
//! driven through a differential-drive conversion.
//!
//! Both consume privileged state (true circles and velocities) instead of
//! LiDAR.

use serde::{Deserialize, Serialize};

use crate::crowd::{orca_velocity, AgentDisc, OrcaParams};
use crate::env::{Observation, Policy, PolicyError, WorldView};
use crate::error::Error;
use crate::geometry::{normalize_angle, Circle, Pose2, Vec2};
use crate::kinematics::{step_differential, KinematicLimits, NavAction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DwaParams {
    pub v_samples: usize,
    pub w_samples: usize,
    /// Rollout length in seconds, sampled at the kinematic `dt`.
    pub horizon: f64,
    pub w_heading: f64,
    pub w_clearance: f64,
    pub w_velocity: f64,
    pub clearance_cap: f64,
    /// Extra gap a rollout must keep from every body to be admissible.
    pub safety_margin: f64,
}

impl Default for DwaParams {
    fn default() -> Self {
        Self {
            v_samples: 11,
            w_samples: 21,
            horizon: 2.0,
            w_heading: 0.3,
            w_clearance: 1.0,
            w_velocity: 1.0,
            clearance_cap: 1.0,
            safety_margin: 0.3,
        }
    }
}

impl DwaParams {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.v_samples < 2 || self.w_samples < 2 {
            return bad("dwa.samples", "need at least 2 samples per axis");
        }
        if !(self.horizon > 0.0) {
            return bad("dwa.horizon", "must be positive");
        }
        if !(self.clearance_cap > 0.0) {
            return bad("dwa.clearance_cap", "must be positive");
        }
        if !(self.safety_margin >= 0.0 && self.safety_margin.is_finite()) {
            return bad("dwa.safety_margin", "must be non-negative");
        }
        if [self.w_heading, self.w_clearance, self.w_velocity]
            .iter()
            .any(|w| !(*w >= 0.0 && w.is_finite()))
        {
            return bad("dwa.weights", "must be non-negative");
        }
        Ok(())
    }
}

/// A body the planner must avoid, extrapolated at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingCircle {
    pub circle: Circle,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwaDecision {
    pub action: NavAction,
    /// No candidate was admissible; `action` is the rotate-in-place escape.
    pub escaped: bool,
}

/// Score of one admissible candidate, or `None` if its rollout collides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub action: NavAction,
    pub min_separation: f64,
    pub score: Option<f64>,
}

/// Rolls `action` forward and returns the smallest gap to any body over the
/// horizon, plus the final pose.
pub fn rollout(
    ego: &Pose2,
    action: &NavAction,
    ego_radius: f64,
    bodies: &[MovingCircle],
    horizon_steps: usize,
    dt: f64,
) -> (f64, Pose2) {
    let mut pose = *ego;
    let mut min_sep = f64::INFINITY;
    for k in 1..=horizon_steps {
        pose = step_differential(&pose, action, dt);
        let t = k as f64 * dt;
        for b in bodies {
            let center = b.circle.center + b.velocity * t;
            let sep = pose.position.distance(center) - b.circle.radius() - ego_radius;
            min_sep = min_sep.min(sep);
        }
    }
    (min_sep, pose)
}

/// 1 when the final pose faces the goal, 0 when it faces directly away.
fn heading_score(pose: &Pose2, goal: Vec2) -> f64 {
    let to_goal = goal - pose.position;
    if to_goal.norm() < 1e-9 {
        return 1.0;
    }
    let err = normalize_angle(to_goal.angle() - pose.heading()).abs();
    1.0 - err / std::f64::consts::PI
}

fn candidate_grid(params: &DwaParams, limits: &KinematicLimits) -> impl Iterator<Item = NavAction> {
    let limits = *limits;
    let nv = params.v_samples;
    let nw = params.w_samples;
    (0..nv).flat_map(move |i| {
        let v = limits.v_max * i as f64 / (nv - 1) as f64;
        (0..nw).map(move |j| {
            let w = -limits.w_max + 2.0 * limits.w_max * j as f64 / (nw - 1) as f64;
            NavAction::new(v, w, &limits)
        })
    })
}

/// Scores every candidate of the grid, in grid order (v-major).
pub fn score_candidates(
    ego: &Pose2,
    ego_radius: f64,
    goal: Vec2,
    bodies: &[MovingCircle],
    params: &DwaParams,
    limits: &KinematicLimits,
) -> Vec<CandidateScore> {
    let horizon_steps = (params.horizon / limits.dt).round().max(1.0) as usize;
    candidate_grid(params, limits)
        .map(|action| {
            let (min_sep, end) = rollout(ego, &action, ego_radius, bodies, horizon_steps, limits.dt);
            let score = (min_sep >= 0.0).then(|| {
                params.w_heading * heading_score(&end, goal)
                    + params.w_clearance * min_sep.min(params.clearance_cap) / params.clearance_cap
                    + params.w_velocity * action.v() / limits.v_max
            });
            CandidateScore {
                action,
                min_separation: min_sep,
                score,
            }
        })
        .collect()
}

/// Dynamic-window choice over the full velocity box.
///
/// Ties go to the smaller `|w|`, then to the earlier grid index, so the
/// result never depends on evaluation order.
pub fn dwa_plan(
    ego: &Pose2,
    ego_radius: f64,
    goal: Vec2,
    bodies: &[MovingCircle],
    params: &DwaParams,
    limits: &KinematicLimits,
) -> DwaDecision {
    let scored = score_candidates(ego, ego_radius, goal, bodies, params, limits);
    // Candidates that keep the safety margin win over those that merely
    // avoid contact.
    let buffered = scored
        .iter()
        .any(|c| c.score.is_some() && c.min_separation >= params.safety_margin);
    let mut best: Option<(f64, f64)> = None;
    let mut best_action = None;
    for c in &scored {
        let Some(score) = c.score else { continue };
        if buffered && c.min_separation < params.safety_margin {
            continue;
        }
        let key = (score, -c.action.w().abs());
        let better = match best {
            None => true,
            Some((s, w)) => score > s || (score == s && key.1 > w),
        };
        if better {
            best = Some(key);
            best_action = Some(c.action);
        }
    }
    match best_action {
        Some(action) => DwaDecision { action, escaped: false },
        None => {
            let bearing = normalize_angle((goal - ego.position).angle() - ego.heading());
            let w = if bearing < 0.0 { -limits.w_max } else { limits.w_max };
            DwaDecision {
                action: NavAction::new(0.0, w, limits),
                escaped: true,
            }
        }
    }
}

/// Proportional gain from heading error to yaw rate in the ORCA conversion.
pub const ORCA_HEADING_GAIN: f64 = 2.0;

/// Padding added to the ego disc so the unicycle can lag the holonomic
/// velocity without touching anything.
pub const ORCA_EGO_RADIUS_MARGIN: f64 = 0.3;
/// Agent time horizon used when planning for the ego, in seconds.
pub const ORCA_EGO_TIME_HORIZON: f64 = 4.0;

/// Holonomic ORCA velocity for the ego, converted to a unicycle command.
///
/// Pedestrians may ignore the ego, so it takes the whole avoidance effort
/// (reciprocity 1) rather than half.
pub fn orca_ego_plan(
    ego: &Pose2,
    ego_velocity: &NavAction,
    ego_radius: f64,
    pedestrians: &[AgentDisc],
    obstacles: &[Circle],
    goal: Vec2,
    limits: &KinematicLimits,
) -> NavAction {
    let agent = AgentDisc {
        position: ego.position,
        velocity: ego.forward() * ego_velocity.v(),
        radius: ego_radius + ORCA_EGO_RADIUS_MARGIN,
        max_speed: limits.v_max,
    };
    let to_goal = goal - ego.position;
    let dist = to_goal.norm();
    let preferred = if dist > limits.v_max * limits.dt {
        to_goal * (limits.v_max / dist)
    } else {
        to_goal / limits.dt
    };
    let params = OrcaParams {
        dt: limits.dt,
        time_horizon_agents: ORCA_EGO_TIME_HORIZON,
        reciprocity: 1.0,
        ..OrcaParams::default()
    };
    let u = orca_velocity(&agent, pedestrians, obstacles, preferred, &params).velocity;
    differential_from_holonomic(ego, u, limits)
}

/// Projects a planar velocity onto the heading and steers toward it.
pub fn differential_from_holonomic(ego: &Pose2, u: Vec2, limits: &KinematicLimits) -> NavAction {
    let v = u.dot(ego.forward()).max(0.0);
    let w = if u.norm() > 0.0 {
        ORCA_HEADING_GAIN * normalize_angle(u.angle() - ego.heading())
    } else {
        0.0
    };
    NavAction::new(v, w, limits)
}

fn moving_bodies(world: &WorldView<'_>) -> Vec<MovingCircle> {
    world
        .obstacles
        .iter()
        .map(|&circle| MovingCircle {
            circle,
            velocity: Vec2::ZERO,
        })
        .chain(world.pedestrians.iter().map(|p| MovingCircle {
            circle: p.body(),
            velocity: p.velocity,
        }))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct DwaPolicy {
    pub params: DwaParams,
    /// Steps on which no candidate was admissible.
    pub escapes: usize,
}

impl DwaPolicy {
    pub fn new(params: DwaParams) -> Self {
        Self { params, escapes: 0 }
    }
}

impl Policy for DwaPolicy {
    fn act(&mut self, _: &Observation, world: &WorldView<'_>) -> Result<NavAction, PolicyError> {
        let bodies = moving_bodies(world);
        let d = dwa_plan(&world.ego, world.ego_radius, world.goal, &bodies, &self.params, &world.limits);
        self.escapes += usize::from(d.escaped);
        Ok(d.action)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OrcaEgoPolicy;

impl Policy for OrcaEgoPolicy {
    fn act(&mut self, _: &Observation, world: &WorldView<'_>) -> Result<NavAction, PolicyError> {
        let peds: Vec<AgentDisc> = world
            .pedestrians
            .iter()
            .map(|p| AgentDisc {
                position: p.position,
                velocity: p.velocity,
                radius: p.radius,
                max_speed: p.preferred_speed,
            })
            .collect();
        Ok(orca_ego_plan(
            &world.ego,
            &world.ego_action,
            world.ego_radius,
            &peds,
            world.obstacles,
            world.goal,
            &world.limits,
        ))
    }
}
