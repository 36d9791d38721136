//! Deterministic 2D social-navigation simulator.
//!
//! A differential-drive ego-agent moves among static discs and ORCA-driven
//! pedestrians, sensing them with a simulated 1800-beam LiDAR whose history
//! is re-projected into the current frame. The crate provides the episode
//! engine, the four-case navigation reward, DWA and ORCA baseline planners
//! and a seeded batch evaluator.

pub mod baselines;
pub mod crowd;
pub mod env;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod kinematics;
pub mod lidar;
pub mod reward;

pub use baselines::{DwaParams, DwaPolicy, OrcaEgoPolicy};
pub use env::{
    run_episode, EpisodeTrace, NavEnv, Observation, Policy, ScenarioConfig, SpawnLayout, StepResult, WorldView,
};
pub use error::{Error, Result};
pub use eval::{run_benchmark, MetricsReport, PolicySpec};
pub use geometry::{Circle, Pose2, Vec2};
pub use kinematics::{KinematicLimits, NavAction};
pub use reward::{RewardParams, Terminal};
