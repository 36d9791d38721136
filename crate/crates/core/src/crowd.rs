//! Pedestrian motion via Optimal Reciprocal Collision Avoidance.
//!
//! Each agent turns every neighbour (and every static disc) into a half-plane
//! of permitted velocities and picks the permitted velocity closest to its
//! preferred one by solving a small linear program in velocity space. When the
//! half-planes have no common point inside the speed disc, the solver falls
//! back to the velocity that minimises the largest violation of the agent
//! constraints while keeping the obstacle constraints hard.
//!
//! The linear-program routines follow the structure of the RVO2 reference
//! library (Univ. of North Carolina, Apache-2.0).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Circle, Pose2, Vec2};

/// Pedestrian body radius.
pub const PEDESTRIAN_RADIUS: f64 = 0.3;
/// Bounds of the per-pedestrian preferred walking speed.
pub const PEDESTRIAN_SPEED_RANGE: (f64, f64) = (0.8, 1.2);
/// A pedestrian only sees the ego when its own speed is at least this
/// multiple of the ego's speed.
pub const EGO_VISIBILITY_RATIO: f64 = 1.5;
/// Lateral nudge applied to a perfectly head-on relative velocity.
pub const HEAD_ON_EPSILON: f64 = 1e-6;

const LP_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrcaParams {
    pub time_horizon_agents: f64,
    pub time_horizon_obstacles: f64,
    pub neighbor_distance: f64,
    pub max_neighbors: usize,
    /// Share of the avoidance effort each agent takes for a reciprocal pair.
    pub reciprocity: f64,
    /// Padding added to every combined radius when building constraints.
    pub safety_margin: f64,
    pub dt: f64,
}

impl Default for OrcaParams {
    fn default() -> Self {
        Self {
            time_horizon_agents: 2.0,
            time_horizon_obstacles: 1.0,
            neighbor_distance: 10.0,
            max_neighbors: 10,
            reciprocity: 0.5,
            safety_margin: 0.05,
            dt: 0.2,
        }
    }
}

/// The part of an agent ORCA reasons about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentDisc {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrcaOutcome {
    pub velocity: Vec2,
    /// The agent already overlapped another body; `velocity` is a plain
    /// push-apart instead of an ORCA solution.
    pub overlap: bool,
}

/// Directed line; the permitted half-plane lies to its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    pub direction: Vec2,
}

impl HalfPlane {
    /// Positive when `v` lies on the forbidden (right-hand) side.
    #[inline]
    pub fn violation(&self, v: Vec2) -> f64 {
        self.direction.cross(self.point - v)
    }
}

/// Half-plane induced on `agent` by a disc moving at `other_velocity`.
///
/// `share` is the fraction of the required correction the agent takes on
/// itself (0.5 for a reciprocating neighbour, 1.0 for a static obstacle).
/// When the discs already intersect the correction resolves the overlap
/// within one step of length `dt`.
fn constraint(
    agent: &AgentDisc,
    other_position: Vec2,
    other_velocity: Vec2,
    other_radius: f64,
    time_horizon: f64,
    share: f64,
    dt: f64,
) -> HalfPlane {
    let rel_pos = other_position - agent.position;
    let mut velocity = agent.velocity;
    let mut rel_vel = velocity - other_velocity;
    if rel_pos.cross(rel_vel) == 0.0 && rel_pos.dot(rel_vel) > 0.0 {
        let left = rel_pos.perp().normalized_or_zero();
        velocity += left * HEAD_ON_EPSILON;
        rel_vel = velocity - other_velocity;
    }

    let dist_sq = rel_pos.norm_squared();
    let combined = agent.radius + other_radius;
    let combined_sq = combined * combined;
    let inv_tau = 1.0 / time_horizon;

    let w = rel_vel - rel_pos * inv_tau;
    let w_len_sq = w.norm_squared();
    let dot1 = w.dot(rel_pos);

    let (direction, u) = if dist_sq <= combined_sq {
        let w = rel_vel - rel_pos / dt;
        let w_len = w.norm();
        let unit_w = if w_len > 0.0 { w / w_len } else { -rel_pos.normalized_or_zero() };
        let direction = Vec2::new(unit_w.y, -unit_w.x);
        (direction, unit_w * (combined / dt - w_len))
    } else if dot1 < 0.0 && dot1 * dot1 > combined_sq * w_len_sq {
        // Closest boundary point is on the truncation circle.
        let w_len = w_len_sq.sqrt();
        let unit_w = w / w_len;
        let direction = Vec2::new(unit_w.y, -unit_w.x);
        (direction, unit_w * (combined * inv_tau - w_len))
    } else {
        // Closest boundary point is on one of the two cone legs.
        let leg = (dist_sq - combined_sq).sqrt();
        let direction = if rel_pos.cross(w) > 0.0 {
            Vec2::new(
                rel_pos.x * leg - rel_pos.y * combined,
                rel_pos.x * combined + rel_pos.y * leg,
            ) / dist_sq
        } else {
            -Vec2::new(
                rel_pos.x * leg + rel_pos.y * combined,
                -rel_pos.x * combined + rel_pos.y * leg,
            ) / dist_sq
        };
        let u = direction * rel_vel.dot(direction) - rel_vel;
        (direction, u)
    };

    HalfPlane {
        point: velocity + u * share,
        direction,
    }
}

/// Optimises along line `idx` subject to lines `0..idx`.
fn linear_program1(
    lines: &[HalfPlane],
    idx: usize,
    radius: f64,
    opt: Vec2,
    direction_opt: bool,
) -> Option<Vec2> {
    let line = &lines[idx];
    let dot = line.point.dot(line.direction);
    let disc = dot * dot + radius * radius - line.point.norm_squared();
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let mut t_left = -dot - sqrt_disc;
    let mut t_right = -dot + sqrt_disc;

    for other in &lines[..idx] {
        let denominator = line.direction.cross(other.direction);
        let numerator = other.direction.cross(line.point - other.point);
        if denominator.abs() <= LP_EPSILON {
            if numerator < 0.0 {
                return None;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return None;
        }
    }

    let t = if direction_opt {
        if opt.dot(line.direction) > 0.0 {
            t_right
        } else {
            t_left
        }
    } else {
        line.direction.dot(opt - line.point).clamp(t_left, t_right)
    };
    Some(line.point + line.direction * t)
}

/// Returns the best velocity found and the index of the first line that
/// could not be satisfied (`lines.len()` on success).
fn linear_program2(lines: &[HalfPlane], radius: f64, opt: Vec2, direction_opt: bool) -> (Vec2, usize) {
    let mut result = if direction_opt {
        opt * radius
    } else if opt.norm_squared() > radius * radius {
        opt.normalized_or_zero() * radius
    } else {
        opt
    };
    for i in 0..lines.len() {
        if lines[i].violation(result) > 0.0 {
            match linear_program1(lines, i, radius, opt, direction_opt) {
                Some(v) => result = v,
                None => return (result, i),
            }
        }
    }
    (result, lines.len())
}

/// Least-violation fallback: keeps the first `n_obstacle` lines hard and
/// minimises the largest violation of the remaining ones.
fn linear_program3(lines: &[HalfPlane], n_obstacle: usize, begin: usize, radius: f64, mut result: Vec2) -> Vec2 {
    let mut distance = 0.0;
    for i in begin..lines.len() {
        if lines[i].violation(result) <= distance {
            continue;
        }
        let mut projected: Vec<HalfPlane> = lines[..n_obstacle].to_vec();
        for j in n_obstacle..i {
            let det = lines[i].direction.cross(lines[j].direction);
            let point = if det.abs() <= LP_EPSILON {
                if lines[i].direction.dot(lines[j].direction) > 0.0 {
                    continue;
                }
                (lines[i].point + lines[j].point) * 0.5
            } else {
                lines[i].point
                    + lines[i].direction
                        * (lines[j].direction.cross(lines[i].point - lines[j].point) / det)
            };
            projected.push(HalfPlane {
                point,
                direction: (lines[j].direction - lines[i].direction).normalized_or_zero(),
            });
        }
        let opt = Vec2::new(-lines[i].direction.y, lines[i].direction.x);
        let (candidate, failed) = linear_program2(&projected, radius, opt, true);
        // Rounding can make the projected program look infeasible; keep the
        // previous result in that case.
        if failed == projected.len() {
            result = candidate;
        }
        distance = lines[i].violation(result);
    }
    result
}

/// Solves the ORCA program for `lines`, the first `n_obstacle` of which
/// are hard obstacle constraints.
pub fn solve_velocity(lines: &[HalfPlane], n_obstacle: usize, max_speed: f64, preferred: Vec2) -> Vec2 {
    let (result, failed) = linear_program2(lines, max_speed, preferred, false);
    if failed < lines.len() {
        linear_program3(lines, n_obstacle, failed, max_speed, result)
    } else {
        result
    }
}

/// Builds the half-planes `agent` must respect: obstacle lines first.
pub fn orca_constraints(
    agent: &AgentDisc,
    neighbors: &[AgentDisc],
    obstacles: &[Circle],
    params: &OrcaParams,
) -> (Vec<HalfPlane>, usize) {
    let mut lines: Vec<HalfPlane> = obstacles
        .iter()
        .filter(|o| o.signed_distance(agent.position) - agent.radius <= params.neighbor_distance)
        .map(|o| {
            constraint(
                agent,
                o.center,
                Vec2::ZERO,
                o.radius() + params.safety_margin,
                params.time_horizon_obstacles,
                1.0,
                params.dt,
            )
        })
        .collect();
    let n_obstacle = lines.len();

    let mut near: Vec<(f64, usize)> = neighbors
        .iter()
        .enumerate()
        .map(|(i, n)| (n.position.distance(agent.position), i))
        .filter(|&(d, _)| d <= params.neighbor_distance)
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    near.truncate(params.max_neighbors);
    lines.extend(near.into_iter().map(|(_, i)| {
        let n = &neighbors[i];
        constraint(
            agent,
            n.position,
            n.velocity,
            n.radius + params.safety_margin,
            params.time_horizon_agents,
            params.reciprocity,
            params.dt,
        )
    }));
    (lines, n_obstacle)
}

/// Collision-avoiding velocity for `agent`.
///
/// If the agent already overlaps a neighbour or obstacle the result is a
/// push-apart velocity at `max_speed` and `overlap` is set.
pub fn orca_velocity(
    agent: &AgentDisc,
    neighbors: &[AgentDisc],
    obstacles: &[Circle],
    preferred_velocity: Vec2,
    params: &OrcaParams,
) -> OrcaOutcome {
    let mut push = Vec2::ZERO;
    let mut overlap = false;
    let bodies = neighbors
        .iter()
        .map(|n| (n.position, n.radius))
        .chain(obstacles.iter().map(|o| (o.center, o.radius())));
    for (center, radius) in bodies {
        let away = agent.position - center;
        if away.norm() < agent.radius + radius {
            overlap = true;
            push += away.normalized_or_zero();
        }
    }
    if overlap {
        let dir = if push == Vec2::ZERO { Vec2::new(1.0, 0.0) } else { push.normalized_or_zero() };
        return OrcaOutcome {
            velocity: dir * agent.max_speed,
            overlap,
        };
    }

    let (lines, n_obstacle) = orca_constraints(agent, neighbors, obstacles, params);
    OrcaOutcome {
        velocity: solve_velocity(&lines, n_obstacle, agent.max_speed, preferred_velocity),
        overlap: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub preferred_speed: f64,
    pub goal: Vec2,
}

impl PedestrianState {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn body(&self) -> Circle {
        Circle::new(self.position, self.radius).expect("pedestrian radius is positive")
    }

    /// Heads for the goal at the preferred speed without overshooting it
    /// within one step.
    pub fn preferred_velocity(&self, dt: f64) -> Vec2 {
        let to_goal = self.goal - self.position;
        let dist = to_goal.norm();
        if dist <= self.preferred_speed * dt {
            to_goal / dt
        } else {
            to_goal * (self.preferred_speed / dist)
        }
    }

    fn disc(&self) -> AgentDisc {
        AgentDisc {
            position: self.position,
            velocity: self.velocity,
            radius: self.radius,
            max_speed: self.preferred_speed,
        }
    }
}

/// What the crowd knows about the ego-agent for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoDisc {
    pub pose: Pose2,
    /// Speed used both for the visibility rule and as the ego's velocity
    /// magnitude along its heading.
    pub speed: f64,
    pub radius: f64,
}

impl EgoDisc {
    fn disc(&self) -> AgentDisc {
        AgentDisc {
            position: self.pose.position,
            velocity: self.pose.forward() * self.speed,
            radius: self.radius,
            max_speed: self.speed,
        }
    }
}

/// Whether a pedestrian moving at `pedestrian_speed` accounts for an ego
/// moving at `ego_speed`.
#[inline]
pub fn sees_ego(pedestrian_speed: f64, ego_speed: f64) -> bool {
    pedestrian_speed >= EGO_VISIBILITY_RATIO * ego_speed
}

#[derive(Debug, Clone)]
pub struct CrowdState {
    pub pedestrians: Vec<PedestrianState>,
    rng: ChaCha8Rng,
    /// Half-width of the uniform per-axis velocity perturbation; 0 disables it.
    velocity_noise: f64,
}

impl CrowdState {
    pub fn new(pedestrians: Vec<PedestrianState>, rng: ChaCha8Rng, velocity_noise: f64) -> Self {
        Self {
            pedestrians,
            rng,
            velocity_noise,
        }
    }

    pub fn velocity_noise(&self) -> f64 {
        self.velocity_noise
    }

    pub fn bodies(&self) -> impl Iterator<Item = Circle> + '_ {
        self.pedestrians.iter().map(PedestrianState::body)
    }
}

/// Advances every pedestrian by one synchronous ORCA step.
///
/// All velocities are computed from the pre-step snapshot before any
/// position is committed.
pub fn step_crowd(crowd: &mut CrowdState, ego: Option<&EgoDisc>, obstacles: &[Circle], params: &OrcaParams) {
    let dt = params.dt;
    let snapshot: Vec<AgentDisc> = crowd.pedestrians.iter().map(PedestrianState::disc).collect();
    let mut neighbors = Vec::with_capacity(snapshot.len());

    let mut velocities: Vec<Vec2> = crowd
        .pedestrians
        .iter()
        .enumerate()
        .map(|(i, ped)| {
            neighbors.clear();
            neighbors.extend(snapshot.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, d)| *d));
            if let Some(ego) = ego {
                if sees_ego(ped.speed(), ego.speed) {
                    neighbors.push(ego.disc());
                }
            }
            orca_velocity(&snapshot[i], &neighbors, obstacles, ped.preferred_velocity(dt), params).velocity
        })
        .collect();

    let noise = crowd.velocity_noise;
    for (ped, v) in crowd.pedestrians.iter_mut().zip(velocities.iter_mut()) {
        let mut cap = ped.preferred_speed;
        if noise > 0.0 {
            v.x += crowd.rng.gen_range(-noise..=noise);
            v.y += crowd.rng.gen_range(-noise..=noise);
            cap += noise * std::f64::consts::SQRT_2;
        }
        let speed = v.norm();
        if speed > cap {
            *v = *v * (cap / speed);
        }
        ped.velocity = *v;
        ped.position += *v * dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn disc(x: f64, y: f64, vx: f64, vy: f64) -> AgentDisc {
        AgentDisc {
            position: Vec2::new(x, y),
            velocity: Vec2::new(vx, vy),
            radius: 0.3,
            max_speed: 1.0,
        }
    }

    #[test]
    fn unconstrained_returns_preferred() {
        let a = disc(0.0, 0.0, 0.0, 0.0);
        let pref = Vec2::new(0.6, -0.3);
        let out = orca_velocity(&a, &[], &[], pref, &OrcaParams::default());
        assert_eq!(out.velocity, pref);
        assert!(!out.overlap);
    }

    #[test]
    fn preferred_is_capped_by_max_speed() {
        let a = disc(0.0, 0.0, 0.0, 0.0);
        let out = orca_velocity(&a, &[], &[], Vec2::new(3.0, 4.0), &OrcaParams::default());
        assert!((out.velocity - Vec2::new(0.6, 0.8)).norm() < 1e-12);
    }

    #[test]
    fn static_obstacle_reduces_approach_speed() {
        let a = disc(0.0, 0.0, 1.0, 0.0);
        let wall = Circle::new(Vec2::new(1.2, 0.0), 0.5).unwrap();
        let params = OrcaParams::default();
        let pref = Vec2::new(1.0, 0.0);
        let (lines, n_obstacle) = orca_constraints(&a, &[], &[wall], &params);
        assert_eq!(n_obstacle, 1);
        let out = orca_velocity(&a, &[], &[wall], pref, &params);
        assert!(out.velocity.x < pref.x - 1e-3, "{:?}", out.velocity);
        for line in &lines {
            assert!(line.violation(out.velocity) <= 1e-9);
        }
        // The permitted velocity cannot reach the obstacle within its horizon.
        let reach = a.position + out.velocity * params.time_horizon_obstacles;
        assert!(wall.signed_distance(reach) >= a.radius - 1e-9);
    }

    #[test]
    fn overlap_pushes_apart() {
        let a = disc(0.0, 0.0, 0.0, 0.0);
        let b = disc(0.4, 0.0, 0.0, 0.0);
        let out = orca_velocity(&a, &[b], &[], Vec2::new(1.0, 0.0), &OrcaParams::default());
        assert!(out.overlap);
        assert_eq!(out.velocity, Vec2::new(-1.0, 0.0));
    }

    #[test]
    fn truncation_circle_case() {
        // Neighbour close, relative velocity small: the projection lands on
        // the truncation circle of radius R/τ centred at p/τ.
        let a = disc(0.0, 0.0, 0.0, 0.0);
        let b = disc(1.0, 0.0, 0.0, 0.0);
        let params = OrcaParams {
            time_horizon_agents: 1.0,
            safety_margin: 0.0,
            ..OrcaParams::default()
        };
        let (lines, _) = orca_constraints(&a, &[b], &[], &params);
        // w = -p/τ, u = (R/τ - |w|)·ŵ = (0.6 - 1)(-1, 0) = (0.4, 0), half of it taken.
        assert!((lines[0].point - Vec2::new(0.2, 0.0)).norm() < 1e-12);
        assert!((lines[0].direction - Vec2::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn inside_margin_separates_within_one_step() {
        // Bodies 0.02 apart, inside the padded radius: one step covers the
        // agent's half of the 0.03 m shortfall.
        let a = disc(0.0, 0.0, 0.0, 0.0);
        let b = disc(0.62, 0.0, 0.0, 0.0);
        let params = OrcaParams {
            safety_margin: 0.05,
            ..OrcaParams::default()
        };
        let out = orca_velocity(&a, &[b], &[], Vec2::new(1.0, 0.0), &params);
        assert!(!out.overlap);
        let gap = (a.position + out.velocity * params.dt).distance(b.position);
        assert!(gap >= 0.6 + 0.05 / 2.0 + 0.01 - 1e-9, "{gap}");
    }

    #[test]
    fn visibility_rule() {
        assert!(!sees_ego(0.5, 0.5));
        assert!(sees_ego(1.0, 0.5));
        assert!(sees_ego(0.75, 0.5));
        assert!(sees_ego(0.0, 0.0));
    }

    fn ped(x: f64, y: f64, gx: f64, gy: f64, speed: f64) -> PedestrianState {
        PedestrianState {
            position: Vec2::new(x, y),
            velocity: Vec2::ZERO,
            radius: PEDESTRIAN_RADIUS,
            preferred_speed: speed,
            goal: Vec2::new(gx, gy),
        }
    }

    #[test]
    fn lone_pedestrian_walks_straight() {
        let mut crowd = CrowdState::new(vec![ped(0.0, 0.0, 5.0, 0.0, 1.0)], ChaCha8Rng::seed_from_u64(1), 0.0);
        let params = OrcaParams::default();
        for k in 1..=10 {
            step_crowd(&mut crowd, None, &[], &params);
            let p = crowd.pedestrians[0].position;
            assert!((p.x - 0.2 * k as f64).abs() < 1e-12 && p.y == 0.0);
        }
    }

    #[test]
    fn distance_to_goal_never_increases_alone() {
        let mut crowd = CrowdState::new(vec![ped(1.0, -2.0, -3.0, 2.5, 0.9)], ChaCha8Rng::seed_from_u64(3), 0.0);
        let params = OrcaParams::default();
        let mut prev = crowd.pedestrians[0].position.distance(crowd.pedestrians[0].goal);
        for _ in 0..60 {
            step_crowd(&mut crowd, None, &[], &params);
            let d = crowd.pedestrians[0].position.distance(crowd.pedestrians[0].goal);
            assert!(d <= prev + 1e-12);
            prev = d;
        }
        assert!(prev < 1e-9);
    }

    #[test]
    fn ego_visibility_changes_neighbour_set() {
        // Pedestrian heading straight at a stationary-looking ego one meter ahead.
        let params = OrcaParams::default();
        let ego = EgoDisc {
            pose: Pose2::new(Vec2::new(1.2, 0.0), std::f64::consts::PI),
            speed: 0.5,
            radius: 0.3,
        };
        let run = |speed: f64| {
            let mut p = ped(0.0, 0.0, 5.0, 0.0, 1.2);
            p.velocity = Vec2::new(speed, 0.0);
            let mut crowd = CrowdState::new(vec![p], ChaCha8Rng::seed_from_u64(0), 0.0);
            step_crowd(&mut crowd, Some(&ego), &[], &params);
            crowd.pedestrians[0].velocity
        };
        // 0.5 < 0.75: ego ignored, pedestrian keeps its preferred velocity.
        assert_eq!(run(0.5), Vec2::new(1.2, 0.0));
        // 1.0 ≥ 0.75: ego avoided.
        let avoided = run(1.0);
        assert!(avoided.x < 1.2 - 1e-3 || avoided.y.abs() > 1e-3, "{avoided:?}");
    }

    #[test]
    fn noise_is_bounded_and_seeded() {
        let make = || {
            CrowdState::new(
                vec![ped(0.0, 0.0, 9.0, 0.0, 1.0), ped(0.0, 3.0, 9.0, 3.0, 1.0)],
                ChaCha8Rng::seed_from_u64(11),
                0.15,
            )
        };
        let params = OrcaParams::default();
        let (mut a, mut b) = (make(), make());
        for _ in 0..20 {
            step_crowd(&mut a, None, &[], &params);
            step_crowd(&mut b, None, &[], &params);
            for p in &a.pedestrians {
                assert!(p.speed() <= 1.0 + 0.15 * std::f64::consts::SQRT_2 + 1e-12);
            }
        }
        assert_eq!(a.pedestrians, b.pedestrians);
        assert_ne!(a.pedestrians[0].position.y, 0.0);
    }

    #[test]
    fn head_on_pair_is_point_symmetric_and_safe() {
        let mut crowd = CrowdState::new(
            vec![ped(-3.0, 0.0, 3.0, 0.0, 1.0), ped(3.0, 0.0, -3.0, 0.0, 1.0)],
            ChaCha8Rng::seed_from_u64(0),
            0.0,
        );
        let params = OrcaParams::default();
        let mut max_lateral: f64 = 0.0;
        for _ in 0..100 {
            step_crowd(&mut crowd, None, &[], &params);
            let (a, b) = (&crowd.pedestrians[0], &crowd.pedestrians[1]);
            assert!((a.position + b.position).norm() <= 1e-9);
            assert!((a.velocity + b.velocity).norm() <= 1e-9);
            assert!(a.position.distance(b.position) >= a.radius + b.radius);
            max_lateral = max_lateral.max(a.velocity.y.abs());
        }
        assert!(max_lateral > 1e-3);
        assert!(crowd.pedestrians[0].position.distance(Vec2::new(3.0, 0.0)) < 1e-6);
    }
}
