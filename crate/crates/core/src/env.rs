//! Episode engine: scenario randomisation, the observe/act/step/reward loop,
//! termination and trace export.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crowd::{
    step_crowd, CrowdState, EgoDisc, OrcaParams, PedestrianState, PEDESTRIAN_RADIUS, PEDESTRIAN_SPEED_RANGE,
};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, world_to_frame, Circle, Pose2, Vec2};
use crate::kinematics::{clip_action, step_differential, KinematicLimits, NavAction, CLIP_THRESHOLD};
use crate::lidar::{build_observation, cast_scan, ScanStack, TransformedStack, DEFAULT_MAX_RANGE};
use crate::reward::{angular_penalty, nav_reward, RewardInputs, RewardParams, Terminal};

/// Rejection-sampling budget per placed body.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
/// Distance at which a pedestrian counts as having reached its goal.
const PEDESTRIAN_GOAL_TOLERANCE: f64 = 0.1;
/// Extra free space kept around the ego start when placing bodies.
const START_CLEARANCE: f64 = 1.0;
/// Minimum gap between spawned bodies.
const SPAWN_GAP: f64 = 0.2;
/// Inset of the ego start and goal from the arena edge.
const EDGE_INSET: f64 = 1.0;
/// Shortest walk handed to a pedestrian.
const PEDESTRIAN_MIN_TRIP: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub arena_half_extent: f64,
    pub n_obstacles_range: [usize; 2],
    pub n_pedestrians_range: [usize; 2],
    pub obstacle_radius_range: [f64; 2],
    pub obstacle_position_noise: f64,
    pub pedestrian_velocity_noise: f64,
    pub goal_min_distance: f64,
    pub timeout_steps: usize,
    pub seed: u64,
    pub unified_mode: bool,
    pub noise_enabled: bool,
    pub reward: RewardParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            arena_half_extent: 5.0,
            n_obstacles_range: [2, 4],
            n_pedestrians_range: [3, 5],
            obstacle_radius_range: [0.2, 0.8],
            obstacle_position_noise: 0.03,
            pedestrian_velocity_noise: 0.15,
            goal_min_distance: 6.0,
            timeout_steps: 200,
            seed: 0,
            unified_mode: false,
            noise_enabled: true,
            reward: RewardParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// No obstacles and no pedestrians.
    pub fn empty_world() -> Self {
        Self {
            n_obstacles_range: [0, 0],
            n_pedestrians_range: [0, 0],
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.arena_half_extent > EDGE_INSET) {
            return bad("arena_half_extent", format!("must exceed {EDGE_INSET}"));
        }
        if self.n_obstacles_range[0] > self.n_obstacles_range[1] {
            return bad("n_obstacles_range", "min exceeds max".into());
        }
        if self.n_pedestrians_range[0] > self.n_pedestrians_range[1] {
            return bad("n_pedestrians_range", "min exceeds max".into());
        }
        let [r0, r1] = self.obstacle_radius_range;
        if !(r0 > 0.0 && r0 <= r1 && r1.is_finite()) {
            return bad("obstacle_radius_range", format!("need 0 < min <= max, got [{r0}, {r1}]"));
        }
        for (name, v) in [
            ("obstacle_position_noise", self.obstacle_position_noise),
            ("pedestrian_velocity_noise", self.pedestrian_velocity_noise),
            ("goal_min_distance", self.goal_min_distance),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, format!("must be non-negative, got {v}"));
            }
        }
        if self.timeout_steps == 0 {
            return bad("timeout_steps", "must be positive".into());
        }
        let r = &self.reward;
        if !(r.r_robot > 0.0 && r.r_dis > 0.0) {
            return bad("reward", "r_robot and r_dis must be positive".into());
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex_digest(json.as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Initial placement of every body in an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnLayout {
    pub ego: Pose2,
    pub goal: Vec2,
    pub obstacles: Vec<Circle>,
    pub pedestrians: Vec<PedestrianState>,
}

impl SpawnLayout {
    /// Hex SHA-256 over the layout; equal layouts hash equal.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("layout serialises");
        hex_digest(json.as_bytes())
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn uniform_count(rng: &mut impl Rng, [lo, hi]: [usize; 2]) -> usize {
    rng.gen_range(lo..=hi)
}

fn placement<T>(constraint: &str, mut attempt: impl FnMut() -> Option<T>) -> Result<T> {
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        if let Some(v) = attempt() {
            return Ok(v);
        }
    }
    Err(Error::ScenarioGeneration {
        constraint: constraint.to_string(),
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

/// Samples a pedestrian goal that is inside the arena, clear of obstacles
/// and at least a few meters from `from`.
fn sample_pedestrian_goal(rng: &mut impl Rng, half: f64, from: Vec2, obstacles: &[Circle]) -> Result<Vec2> {
    let span = half - PEDESTRIAN_RADIUS;
    placement("pedestrian goal clear of obstacles", || {
        let g = Vec2::new(uniform(rng, -span, span), uniform(rng, -span, span));
        let clear = obstacles
            .iter()
            .all(|o| o.signed_distance(g) >= PEDESTRIAN_RADIUS + SPAWN_GAP);
        (clear && g.distance(from) >= PEDESTRIAN_MIN_TRIP).then_some(g)
    })
}

/// Draws a layout: ego start and goal on opposite arena sides at the same
/// lateral offset, then obstacles, then pedestrians.
pub fn generate_layout(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<SpawnLayout> {
    config.validate()?;
    let half = config.arena_half_extent;
    let r_robot = config.reward.r_robot;
    let edge = half - EDGE_INSET;

    let (start, goal) = placement("ego start/goal separation >= goal_min_distance", || {
        let side = rng.gen_range(0..4u8);
        let lateral = uniform(rng, -edge, edge);
        let (s, g) = match side {
            0 => (Vec2::new(-edge, lateral), Vec2::new(edge, lateral)),
            1 => (Vec2::new(edge, lateral), Vec2::new(-edge, lateral)),
            2 => (Vec2::new(lateral, -edge), Vec2::new(lateral, edge)),
            _ => (Vec2::new(lateral, edge), Vec2::new(lateral, -edge)),
        };
        (s.distance(g) >= config.goal_min_distance).then_some((s, g))
    })?;
    let ego = Pose2::new(start, (goal - start).angle());

    let n_obstacles = uniform_count(rng, config.n_obstacles_range);
    let [r_lo, r_hi] = config.obstacle_radius_range;
    let mut obstacles: Vec<Circle> = Vec::with_capacity(n_obstacles);
    for _ in 0..n_obstacles {
        let c = placement("obstacle clear of ego start, goal and other obstacles", || {
            let r = uniform(rng, r_lo, r_hi);
            let span = half - r;
            let center = Vec2::new(uniform(rng, -span, span), uniform(rng, -span, span));
            let ok = center.distance(start) >= r + r_robot + START_CLEARANCE
                && center.distance(goal) >= r + r_robot + SPAWN_GAP
                && obstacles
                    .iter()
                    .all(|o| center.distance(o.center) >= r + o.radius() + SPAWN_GAP);
            ok.then(|| Circle::new(center, r).expect("sampled radius is positive"))
        })?;
        obstacles.push(c);
    }

    let n_pedestrians = uniform_count(rng, config.n_pedestrians_range);
    let mut pedestrians: Vec<PedestrianState> = Vec::with_capacity(n_pedestrians);
    let span = half - PEDESTRIAN_RADIUS;
    for _ in 0..n_pedestrians {
        let position = placement("pedestrian clear of ego, obstacles and other pedestrians", || {
            let p = Vec2::new(uniform(rng, -span, span), uniform(rng, -span, span));
            let ok = p.distance(start) >= PEDESTRIAN_RADIUS + r_robot + START_CLEARANCE
                && obstacles
                    .iter()
                    .all(|o| o.signed_distance(p) >= PEDESTRIAN_RADIUS + SPAWN_GAP)
                && pedestrians
                    .iter()
                    .all(|q| p.distance(q.position) >= 2.0 * PEDESTRIAN_RADIUS + SPAWN_GAP);
            ok.then_some(p)
        })?;
        let goal = sample_pedestrian_goal(rng, half, position, &obstacles)?;
        let preferred_speed = uniform(rng, PEDESTRIAN_SPEED_RANGE.0, PEDESTRIAN_SPEED_RANGE.1);
        pedestrians.push(PedestrianState {
            position,
            velocity: Vec2::ZERO,
            radius: PEDESTRIAN_RADIUS,
            preferred_speed,
            goal,
        });
    }

    if config.noise_enabled && config.obstacle_position_noise > 0.0 {
        let n = config.obstacle_position_noise;
        for o in &mut obstacles {
            o.center += Vec2::new(rng.gen_range(-n..=n), rng.gen_range(-n..=n));
        }
    }

    Ok(SpawnLayout {
        ego,
        goal,
        obstacles,
        pedestrians,
    })
}

/// Goal expressed as range and bearing in the ego frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalPolar {
    pub r: f64,
    pub theta: f64,
}

impl GoalPolar {
    pub fn from_poses(ego: &Pose2, goal: Vec2) -> Self {
        let local = world_to_frame(goal, ego);
        Self {
            r: local.norm(),
            theta: normalize_angle(local.angle()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub scan_stack: TransformedStack,
    pub goal_polar: GoalPolar,
    pub prev_action: NavAction,
}

impl Observation {
    /// Float32 view for learners: the stack row-major (oldest scan first),
    /// then `[r_goal, theta_goal]`, then `[v, w]` of the previous action.
    pub fn to_f32(&self) -> (Vec<f32>, [f32; 2], [f32; 2]) {
        (
            self.scan_stack.as_slice().iter().map(|&x| x as f32).collect(),
            [self.goal_polar.r as f32, self.goal_polar.theta as f32],
            [self.prev_action.v() as f32, self.prev_action.w() as f32],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepInfo {
    pub step_index: usize,
    /// Smallest gap between the ego body and any other body (negative when
    /// they overlap), measured geometrically rather than by LiDAR.
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: Option<Terminal>,
    pub info: StepInfo,
}

impl StepResult {
    /// Episode ended by arrival or collision.
    pub fn terminated(&self) -> bool {
        matches!(self.terminal, Some(Terminal::Arrival | Terminal::Collision))
    }

    /// Episode cut off by the step budget.
    pub fn truncated(&self) -> bool {
        self.terminal == Some(Terminal::Timeout)
    }
}

/// Ground-truth scene handed to model-based planners.
#[derive(Debug, Clone, Copy)]
pub struct WorldView<'a> {
    pub ego: Pose2,
    /// Command executed on the previous step.
    pub ego_action: NavAction,
    pub goal: Vec2,
    pub obstacles: &'a [Circle],
    pub pedestrians: &'a [PedestrianState],
    pub limits: KinematicLimits,
    pub ego_radius: f64,
}

pub type PolicyError = Box<dyn std::error::Error + Send + Sync>;

/// Anything that maps an observation (and, for planners, the privileged
/// scene) to a velocity command.
pub trait Policy {
    fn act(&mut self, observation: &Observation, world: &WorldView<'_>) -> Result<NavAction, PolicyError>;
}

impl<F> Policy for F
where
    F: FnMut(&Observation, &WorldView<'_>) -> Result<NavAction, PolicyError>,
{
    fn act(&mut self, observation: &Observation, world: &WorldView<'_>) -> Result<NavAction, PolicyError> {
        self(observation, world)
    }
}

/// One live episode. Not meant to be shared between threads mid-episode,
/// but the whole value can be moved.
#[derive(Debug, Clone)]
pub struct NavEnv {
    config: ScenarioConfig,
    limits: KinematicLimits,
    orca: OrcaParams,
    max_range: f64,
    layout: SpawnLayout,
    ego: Pose2,
    goal: Vec2,
    obstacles: Vec<Circle>,
    crowd: CrowdState,
    stack: ScanStack,
    regoal_rng: ChaCha8Rng,
    prev_action: NavAction,
    d_goal_prev: f64,
    step_index: usize,
    terminal: Option<Terminal>,
}

impl NavEnv {
    /// Draws a fresh scenario from `seed` and returns the first observation.
    pub fn reset(config: &ScenarioConfig, seed: u64) -> Result<(Self, Observation)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = generate_layout(config, &mut rng)?;
        Self::from_layout(config, layout, seed)
    }

    /// Starts an episode from a fixed layout. `seed` still drives the
    /// pedestrian noise and re-goaling streams.
    pub fn from_layout(config: &ScenarioConfig, layout: SpawnLayout, seed: u64) -> Result<(Self, Observation)> {
        config.validate()?;
        let mut crowd_rng = ChaCha8Rng::seed_from_u64(seed);
        crowd_rng.set_stream(1);
        let mut regoal_rng = ChaCha8Rng::seed_from_u64(seed);
        regoal_rng.set_stream(2);
        let noise = if config.noise_enabled {
            config.pedestrian_velocity_noise
        } else {
            0.0
        };
        let limits = KinematicLimits::default();
        let orca = OrcaParams {
            dt: limits.dt,
            ..OrcaParams::default()
        };
        let crowd = CrowdState::new(layout.pedestrians.clone(), crowd_rng, noise);
        let ego = layout.ego;
        let goal = layout.goal;
        let obstacles = layout.obstacles.clone();
        let max_range = DEFAULT_MAX_RANGE;
        let first = cast_scan(&ego, &scene_circles(&obstacles, &crowd), max_range);
        let env = Self {
            config: config.clone(),
            limits,
            orca,
            max_range,
            layout,
            ego,
            goal,
            obstacles,
            crowd,
            stack: ScanStack::warm(first),
            regoal_rng,
            prev_action: NavAction::ZERO,
            d_goal_prev: ego.position.distance(goal),
            step_index: 0,
            terminal: None,
        };
        let obs = env.observation();
        Ok((env, obs))
    }

    pub fn observation(&self) -> Observation {
        Observation {
            scan_stack: build_observation(&self.stack, &self.ego),
            goal_polar: GoalPolar::from_poses(&self.ego, self.goal),
            prev_action: self.prev_action,
        }
    }

    pub fn world(&self) -> WorldView<'_> {
        WorldView {
            ego: self.ego,
            ego_action: self.prev_action,
            goal: self.goal,
            obstacles: &self.obstacles,
            pedestrians: &self.crowd.pedestrians,
            limits: self.limits,
            ego_radius: self.config.reward.r_robot,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn layout(&self) -> &SpawnLayout {
        &self.layout
    }

    pub fn limits(&self) -> &KinematicLimits {
        &self.limits
    }

    pub fn ego(&self) -> &Pose2 {
        &self.ego
    }

    pub fn goal(&self) -> Vec2 {
        self.goal
    }

    pub fn obstacles(&self) -> &[Circle] {
        &self.obstacles
    }

    pub fn pedestrians(&self) -> &[PedestrianState] {
        &self.crowd.pedestrians
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn terminal(&self) -> Option<Terminal> {
        self.terminal
    }

    /// Geometric gap between the ego body and the nearest other body.
    pub fn min_separation(&self) -> f64 {
        let r = self.config.reward.r_robot;
        scene_circles(&self.obstacles, &self.crowd)
            .iter()
            .map(|c| c.signed_distance(self.ego.position) - r)
            .fold(f64::INFINITY, f64::min)
    }

    /// Applies `action` for one planning period.
    ///
    /// Order within a step: ego moves, then pedestrians (seeing the ego's
    /// pre-step speed), then the new scan is cast and scored.
    pub fn step(&mut self, action: NavAction) -> Result<StepResult> {
        if let Some(t) = self.terminal {
            return Err(Error::EpisodeTerminated(t));
        }
        let mut action = NavAction::new(action.v(), action.w(), &self.limits);
        if self.config.unified_mode {
            action = clip_action(action, CLIP_THRESHOLD);
        }
        let dt = self.limits.dt;
        let ego_speed = self.prev_action.v();

        self.ego = step_differential(&self.ego, &action, dt);
        let ego_disc = EgoDisc {
            pose: self.ego,
            speed: ego_speed,
            radius: self.config.reward.r_robot,
        };
        step_crowd(&mut self.crowd, Some(&ego_disc), &self.obstacles, &self.orca);
        self.regoal_pedestrians();

        let scan = cast_scan(&self.ego, &scene_circles(&self.obstacles, &self.crowd), self.max_range);
        let d_min = scan.min_range();
        self.stack.push(scan);

        let d_goal = self.ego.position.distance(self.goal);
        let params = &self.config.reward;
        let inputs = RewardInputs {
            d_goal_prev: self.d_goal_prev,
            d_goal,
            d_min,
            w_prev: self.prev_action.w(),
            w_now: action.w(),
        };
        let (mut reward, mut terminal) = nav_reward(&inputs, params);
        if self.config.unified_mode {
            reward += angular_penalty(inputs.w_prev, inputs.w_now, params.w_ang);
        }

        self.step_index += 1;
        if terminal.is_none() && self.step_index >= self.config.timeout_steps {
            terminal = Some(Terminal::Timeout);
        }
        self.terminal = terminal;
        self.prev_action = action;
        self.d_goal_prev = d_goal;

        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminal,
            info: StepInfo {
                step_index: self.step_index,
                min_separation: self.min_separation(),
            },
        })
    }

    fn regoal_pedestrians(&mut self) {
        let half = self.config.arena_half_extent;
        for ped in &mut self.crowd.pedestrians {
            if ped.position.distance(ped.goal) <= PEDESTRIAN_GOAL_TOLERANCE {
                // On failure the pedestrian keeps its goal and idles there.
                if let Ok(g) = sample_pedestrian_goal(&mut self.regoal_rng, half, ped.position, &self.obstacles) {
                    ped.goal = g;
                }
            }
        }
    }
}

fn scene_circles(obstacles: &[Circle], crowd: &CrowdState) -> Vec<Circle> {
    obstacles.iter().copied().chain(crowd.bodies()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub ego: [f64; 3],
    pub peds: Vec<[f64; 2]>,
    pub action: [f64; 2],
    pub reward: f64,
    pub terminal: Option<Terminal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub terminal: Terminal,
    pub steps: usize,
    pub nav_time_s: f64,
    pub goal: [f64; 2],
    /// `[x, y, radius]` per static obstacle.
    pub obstacles: Vec<[f64; 3]>,
    /// Smallest geometric ego gap seen during the episode.
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    /// Record 0 is the reset state; record `k` follows step `k`.
    pub records: Vec<TraceRecord>,
    pub summary: TraceSummary,
    pub layout_digest: String,
}

impl EpisodeTrace {
    pub fn terminal(&self) -> Terminal {
        self.summary.terminal
    }

    pub fn steps(&self) -> usize {
        self.summary.steps
    }

    /// Writes one JSON object per record, then `{"summary": {...}}`.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut out, &serde_json::json!({ "summary": self.summary }))?;
        out.write_all(b"\n")
    }

    /// Parses what [`EpisodeTrace::write_jsonl`] produced.
    pub fn read_jsonl(text: &str) -> Result<(Vec<TraceRecord>, TraceSummary)> {
        #[derive(Deserialize)]
        struct SummaryLine {
            summary: TraceSummary,
        }
        let mut records = Vec::new();
        let mut summary = None;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            if summary.is_some() {
                return Err(Error::Config(format!("line {}: data after summary line", n + 1)));
            }
            if line.contains("\"summary\"") {
                summary = Some(serde_json::from_str::<SummaryLine>(line)?.summary);
            } else {
                records.push(serde_json::from_str(line)?);
            }
        }
        let summary = summary.ok_or_else(|| Error::Config("trace has no summary line".into()))?;
        Ok((records, summary))
    }
}

fn record(env: &NavEnv, action: NavAction, reward: f64, terminal: Option<Terminal>) -> TraceRecord {
    let ego = env.ego();
    TraceRecord {
        t: env.step_index(),
        ego: [ego.position.x, ego.position.y, ego.heading()],
        peds: env.pedestrians().iter().map(|p| [p.position.x, p.position.y]).collect(),
        action: [action.v(), action.w()],
        reward,
        terminal,
    }
}

/// Runs one episode to its terminal state.
pub fn run_episode(config: &ScenarioConfig, seed: u64, policy: &mut dyn Policy) -> Result<EpisodeTrace> {
    let (env, obs) = NavEnv::reset(config, seed)?;
    run_from(env, obs, policy)
}

/// Runs an already-reset environment to its terminal state.
pub fn run_from(mut env: NavEnv, mut obs: Observation, policy: &mut dyn Policy) -> Result<EpisodeTrace> {
    let mut records = vec![record(&env, NavAction::ZERO, 0.0, None)];
    let mut min_separation = env.min_separation();
    let terminal = loop {
        let action = policy.act(&obs, &env.world()).map_err(|e| Error::Policy {
            step: env.step_index(),
            message: e.to_string(),
        })?;
        let result = env.step(action)?;
        min_separation = min_separation.min(result.info.min_separation);
        records.push(record(&env, result.observation.prev_action, result.reward, result.terminal));
        obs = result.observation;
        if let Some(t) = result.terminal {
            break t;
        }
    };
    let steps = env.step_index();
    let summary = TraceSummary {
        terminal,
        steps,
        nav_time_s: steps as f64 * env.limits().dt,
        goal: [env.goal().x, env.goal().y],
        obstacles: env
            .obstacles()
            .iter()
            .map(|o| [o.center.x, o.center.y, o.radius()])
            .collect(),
        min_separation,
    };
    Ok(EpisodeTrace {
        records,
        summary,
        layout_digest: env.layout().digest(),
    })
}

/// Rotates toward the goal and drives at full speed when roughly aligned.
/// Ignores everything else in the scene.
#[derive(Debug, Clone, Copy, Default)]
pub struct StraightPolicy;

impl Policy for StraightPolicy {
    fn act(&mut self, obs: &Observation, world: &WorldView<'_>) -> Result<NavAction, PolicyError> {
        let theta = obs.goal_polar.theta;
        let v = world.limits.v_max * theta.cos().max(0.0);
        Ok(NavAction::new(v, 2.0 * theta, &world.limits))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn act(&mut self, _: &Observation, _: &WorldView<'_>) -> Result<NavAction, PolicyError> {
        Ok(NavAction::ZERO)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lidar::{N_BEAMS, STACK_DEPTH};

    fn straight_layout(d: f64) -> SpawnLayout {
        SpawnLayout {
            ego: Pose2::new(Vec2::ZERO, 0.0),
            goal: Vec2::new(d, 0.0),
            obstacles: vec![],
            pedestrians: vec![],
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let (a, _) = NavEnv::reset(&cfg, 42).unwrap();
        let (b, _) = NavEnv::reset(&cfg, 42).unwrap();
        assert_eq!(a.layout(), b.layout());
        let (c, _) = NavEnv::reset(&cfg, 43).unwrap();
        assert_ne!(a.layout(), c.layout());
    }

    #[test]
    fn empty_world_first_scan_is_max_range() {
        let (env, obs) = NavEnv::reset(&ScenarioConfig::empty_world(), 5).unwrap();
        assert!(env.obstacles().is_empty() && env.pedestrians().is_empty());
        assert_eq!(obs.scan_stack.rows(), STACK_DEPTH);
        assert!(obs.scan_stack.as_slice().iter().all(|&r| r == DEFAULT_MAX_RANGE));
    }

    #[test]
    fn spawn_layout_respects_constraints() {
        let cfg = ScenarioConfig::default();
        for seed in 0..200 {
            let (env, _) = NavEnv::reset(&cfg, seed).unwrap();
            let l = env.layout();
            let start = l.ego.position;
            assert!(start.distance(l.goal) >= cfg.goal_min_distance);
            let (lo, hi) = (cfg.n_obstacles_range, cfg.n_pedestrians_range);
            assert!((lo[0]..=lo[1]).contains(&l.obstacles.len()));
            assert!((hi[0]..=hi[1]).contains(&l.pedestrians.len()));
            let bodies: Vec<Circle> = l.obstacles.iter().copied().chain(l.pedestrians.iter().map(|p| p.body())).collect();
            for (i, a) in bodies.iter().enumerate() {
                assert!(a.signed_distance(start) > cfg.reward.r_robot + cfg.reward.r_dis);
                for b in &bodies[i + 1..] {
                    assert!(a.center.distance(b.center) >= a.radius() + b.radius());
                }
            }
            assert!(env.min_separation() > 0.0);
        }
    }

    #[test]
    fn one_step_empty_world_reward() {
        let cfg = ScenarioConfig::empty_world();
        let (mut env, obs) = NavEnv::from_layout(&cfg, straight_layout(2.0), 0).unwrap();
        assert!((obs.goal_polar.r - 2.0).abs() < 1e-15);
        let res = env.step(NavAction::new(0.5, 0.0, env.limits())).unwrap();
        assert!((res.observation.goal_polar.r - 1.9).abs() < 1e-12);
        assert!((res.reward - 0.14).abs() < 1e-12, "{}", res.reward);
        assert_eq!(res.terminal, None);
    }

    #[test]
    fn spawn_within_arrival_radius_arrives_on_first_step() {
        let cfg = ScenarioConfig::empty_world();
        let (mut env, _) = NavEnv::from_layout(&cfg, straight_layout(0.2), 0).unwrap();
        let res = env.step(NavAction::ZERO).unwrap();
        assert_eq!(res.terminal, Some(Terminal::Arrival));
        assert_eq!(res.reward, 0.5);
        assert!(res.terminated() && !res.truncated());
        assert!(matches!(env.step(NavAction::ZERO), Err(Error::EpisodeTerminated(Terminal::Arrival))));
    }

    #[test]
    fn timeout_on_budget() {
        let cfg = ScenarioConfig::empty_world();
        let (mut env, _) = NavEnv::from_layout(&cfg, straight_layout(5.0), 0).unwrap();
        for k in 1..cfg.timeout_steps {
            let r = env.step(NavAction::ZERO).unwrap();
            assert_eq!(r.terminal, None, "step {k}");
        }
        let r = env.step(NavAction::ZERO).unwrap();
        assert_eq!(r.terminal, Some(Terminal::Timeout));
        assert!(r.truncated());
    }

    #[test]
    fn collision_when_walking_into_obstacle() {
        let cfg = ScenarioConfig {
            noise_enabled: false,
            ..ScenarioConfig::empty_world()
        };
        let mut layout = straight_layout(8.0);
        layout.obstacles.push(Circle::new(Vec2::new(2.05, 0.0), 0.5).unwrap());
        let (env, obs) = NavEnv::from_layout(&cfg, layout, 0).unwrap();
        let trace = run_from(env, obs, &mut StraightPolicy).unwrap();
        assert_eq!(trace.terminal(), Terminal::Collision);
        // 2.05 - 0.5 - 0.3 = 1.25 m of free travel at 0.1 m per step
        assert_eq!(trace.steps(), 13);
    }

    #[test]
    fn unified_mode_clips_and_penalises() {
        let cfg = ScenarioConfig {
            unified_mode: true,
            ..ScenarioConfig::empty_world()
        };
        let (mut env, _) = NavEnv::from_layout(&cfg, straight_layout(5.0), 0).unwrap();
        let l = *env.limits();
        let r = env.step(NavAction::new(0.2, 0.9, &l)).unwrap();
        assert_eq!(r.observation.prev_action, NavAction::ZERO);
        assert_eq!(env.ego().position, Vec2::ZERO);
        let r = env.step(NavAction::new(0.5, 1.0, &l)).unwrap();
        // goal term 1.4·(5 - d) plus -0.01·|1.0 - 0|
        let d = env.ego().position.distance(Vec2::new(5.0, 0.0));
        assert!((r.reward - (1.4 * (5.0 - d) - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn goal_polar_matches_independent_transform() {
        let cfg = ScenarioConfig::default();
        let (mut env, _) = NavEnv::reset(&cfg, 9).unwrap();
        let l = *env.limits();
        for k in 0..30 {
            let r = env.step(NavAction::new(0.3, 0.5 * ((k % 5) as f64 - 2.0), &l)).unwrap();
            let ego = env.ego();
            let d = env.goal() - ego.position;
            let th = ego.heading();
            let (lx, ly) = (th.cos() * d.x + th.sin() * d.y, -th.sin() * d.x + th.cos() * d.y);
            assert!((r.observation.goal_polar.r - lx.hypot(ly)).abs() < 1e-9);
            assert!((r.observation.goal_polar.theta - ly.atan2(lx)).abs() < 1e-9);
            assert!(r.observation.scan_stack.as_slice().iter().all(|&x| x > 0.0 && x <= DEFAULT_MAX_RANGE));
            assert_eq!(r.observation.scan_stack.as_slice().len(), STACK_DEPTH * N_BEAMS);
            if r.terminal.is_some() {
                break;
            }
        }
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let err = ScenarioConfig::from_json(r#"{"arena_half_extent": 5.0, "bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let cfg = ScenarioConfig::from_json(r#"{"timeout_steps": 50}"#).unwrap();
        assert_eq!(cfg.timeout_steps, 50);
        assert!(ScenarioConfig::from_json(r#"{"timeout_steps": 0}"#).is_err());
    }

    #[test]
    fn impossible_spawn_reports_constraint() {
        let cfg = ScenarioConfig {
            arena_half_extent: 1.5,
            n_obstacles_range: [30, 30],
            obstacle_radius_range: [0.5, 0.5],
            goal_min_distance: 0.0,
            ..ScenarioConfig::default()
        };
        match NavEnv::reset(&cfg, 1) {
            Err(Error::ScenarioGeneration { constraint, attempts }) => {
                assert!(constraint.contains("obstacle"), "{constraint}");
                assert_eq!(attempts, MAX_PLACEMENT_ATTEMPTS);
            }
            other => panic!("expected scenario error, got {other:?}"),
        }
    }

    #[test]
    fn trace_jsonl_round_trip() {
        let cfg = ScenarioConfig::default();
        let trace = run_episode(&cfg, 3, &mut StraightPolicy).unwrap();
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("{\"summary\":"));
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["t", "ego", "peds", "action", "reward", "terminal"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
        let (records, summary) = EpisodeTrace::read_jsonl(&text).unwrap();
        assert_eq!(records, trace.records);
        assert_eq!(summary, trace.summary);
    }
}
