//! Seeded batch evaluation: success, collision and timeout rates plus mean
//! navigation time over successful trials.
//!
//! Trial `i` always uses seed `base_seed + i`, so two policies evaluated with
//! the same base seed face identical initial scenes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{DwaParams, DwaPolicy, OrcaEgoPolicy};
use crate::env::{run_from, NavEnv, Policy, ScenarioConfig, StraightPolicy, ZeroPolicy};
use crate::error::{Error, Result};
use crate::reward::Terminal;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Zero,
    Straight,
    Dwa(DwaParams),
    Orca,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Zero => "zero",
            PolicySpec::Straight => "straight",
            PolicySpec::Dwa(_) => "dwa",
            PolicySpec::Orca => "orca",
        }
    }

    pub fn build(&self) -> Box<dyn Policy + Send> {
        match self {
            PolicySpec::Zero => Box::new(ZeroPolicy),
            PolicySpec::Straight => Box::new(StraightPolicy),
            PolicySpec::Dwa(p) => Box::new(DwaPolicy::new(*p)),
            PolicySpec::Orca => Box::new(OrcaEgoPolicy),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(PolicySpec::Zero),
            "straight" => Ok(PolicySpec::Straight),
            "dwa" => Ok(PolicySpec::Dwa(DwaParams::default())),
            "orca" => Ok(PolicySpec::Orca),
            other => Err(Error::Config(format!(
                "unknown policy `{other}` (expected zero, straight, dwa or orca)"
            ))),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "message")]
pub enum TrialStatus {
    Arrival,
    Collision,
    Timeout,
    /// The policy or scenario generator raised an error.
    Failure(String),
}

impl TrialStatus {
    pub fn is_failure(&self) -> bool {
        matches!(self, TrialStatus::Failure(_))
    }
}

impl From<Terminal> for TrialStatus {
    fn from(t: Terminal) -> Self {
        match t {
            Terminal::Arrival => TrialStatus::Arrival,
            Terminal::Collision => TrialStatus::Collision,
            Terminal::Timeout => TrialStatus::Timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub status: TrialStatus,
    pub steps: usize,
    pub nav_time_s: f64,
    /// SHA-256 of the spawn layout; empty when generation failed.
    pub spawn_digest: String,
    /// The ego body geometrically overlapped another body at some step.
    pub geometric_collision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_trials: usize,
    pub sr: f64,
    pub cr: f64,
    pub tr: f64,
    /// Fraction of trials that ended in a policy or generator failure.
    pub fr: f64,
    /// `None` when no trial succeeded.
    pub nt_mean_s: Option<f64>,
    /// Population standard deviation over successful trials.
    pub nt_std_s: Option<f64>,
    pub geometric_collision_rate: f64,
    pub policy: String,
    pub config_digest: String,
    pub base_seed: u64,
    #[serde(skip)]
    pub per_seed_outcomes: Vec<TrialOutcome>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialise")
    }

    /// Fixed-width summary for terminals.
    pub fn table(&self) -> String {
        let nt = match (self.nt_mean_s, self.nt_std_s) {
            (Some(m), Some(s)) => format!("{m:.2} ± {s:.2}"),
            _ => "n/a".to_string(),
        };
        format!(
            "policy    trials  SR     CR     TR     NT (s)\n\
             {:<9} {:>6}  {:.3}  {:.3}  {:.3}  {}\n",
            self.policy, self.n_trials, self.sr, self.cr, self.tr, nt
        )
    }
}

pub fn run_trial(config: &ScenarioConfig, spec: &PolicySpec, trial: usize, seed: u64) -> TrialOutcome {
    let failure = |message: String, spawn_digest: String| TrialOutcome {
        trial,
        seed,
        status: TrialStatus::Failure(message),
        steps: 0,
        nav_time_s: 0.0,
        spawn_digest,
        geometric_collision: false,
    };
    let (env, obs) = match NavEnv::reset(config, seed) {
        Ok(v) => v,
        Err(e) => return failure(e.to_string(), String::new()),
    };
    let digest = env.layout().digest();
    let mut policy = spec.build();
    match run_from(env, obs, policy.as_mut()) {
        Ok(trace) => TrialOutcome {
            trial,
            seed,
            status: trace.terminal().into(),
            steps: trace.steps(),
            nav_time_s: trace.summary.nav_time_s,
            spawn_digest: digest,
            geometric_collision: trace.summary.min_separation < 0.0,
        },
        Err(e) => failure(e.to_string(), digest),
    }
}

/// Runs `n_trials` seeded episodes, in parallel over `threads` workers
/// (`None` uses the global pool). The report does not depend on the
/// worker count.
pub fn run_benchmark(
    config: &ScenarioConfig,
    spec: &PolicySpec,
    n_trials: usize,
    base_seed: u64,
    threads: Option<usize>,
) -> Result<MetricsReport> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter {
            name: "n_trials",
            reason: "must be at least 1".into(),
        });
    }
    config.validate()?;
    if let PolicySpec::Dwa(p) = spec {
        p.validate()?;
    }

    let run = || -> Vec<TrialOutcome> {
        (0..n_trials)
            .into_par_iter()
            .map(|i| run_trial(config, spec, i, base_seed.wrapping_add(i as u64)))
            .collect()
    };
    let mut outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    outcomes.sort_by_key(|o| o.trial);
    Ok(aggregate(config, spec, base_seed, outcomes))
}

pub fn aggregate(config: &ScenarioConfig, spec: &PolicySpec, base_seed: u64, outcomes: Vec<TrialOutcome>) -> MetricsReport {
    let n = outcomes.len();
    let count = |f: &dyn Fn(&TrialStatus) -> bool| outcomes.iter().filter(|o| f(&o.status)).count();
    let arrivals = count(&|s| *s == TrialStatus::Arrival);
    let collisions = count(&|s| *s == TrialStatus::Collision);
    let timeouts = count(&|s| *s == TrialStatus::Timeout);
    let failures = n - arrivals - collisions - timeouts;

    let times: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.status == TrialStatus::Arrival)
        .map(|o| o.nav_time_s)
        .collect();
    let (nt_mean_s, nt_std_s) = if times.is_empty() {
        (None, None)
    } else {
        let m = times.iter().sum::<f64>() / times.len() as f64;
        let var = times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / times.len() as f64;
        (Some(m), Some(var.sqrt()))
    };
    let rate = |k: usize| k as f64 / n as f64;
    MetricsReport {
        n_trials: n,
        sr: rate(arrivals),
        cr: rate(collisions),
        tr: rate(timeouts),
        fr: rate(failures),
        nt_mean_s,
        nt_std_s,
        geometric_collision_rate: rate(outcomes.iter().filter(|o| o.geometric_collision).count()),
        policy: spec.name().to_string(),
        config_digest: config.digest(),
        base_seed,
        per_seed_outcomes: outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_policy_times_out_everywhere() {
        let cfg = ScenarioConfig::empty_world();
        let r = run_benchmark(&cfg, &PolicySpec::Zero, 10, 0, Some(2)).unwrap();
        assert_eq!((r.sr, r.cr, r.tr, r.fr), (0.0, 0.0, 1.0, 0.0));
        assert_eq!(r.nt_mean_s, None);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = ScenarioConfig::empty_world();
        assert!(run_benchmark(&cfg, &PolicySpec::Zero, 0, 0, None).is_err());
    }

    #[test]
    fn straight_policy_nav_time_matches_travel_time() {
        let cfg = ScenarioConfig::empty_world();
        let r = run_benchmark(&cfg, &PolicySpec::Straight, 20, 100, Some(2)).unwrap();
        assert_eq!(r.sr, 1.0);
        // Start and goal are 8 m apart; arrival is declared within r_robot
        // of the goal, reached after ceil((8 - 0.3) / 0.1) steps.
        let steps = ((8.0f64 - 0.3) / (0.5 * 0.2)).ceil();
        let expected = steps * 0.2;
        let mean = r.nt_mean_s.unwrap();
        assert!((mean - expected).abs() <= 0.2 + 1e-9, "{mean} vs {expected}");
        assert!(r.nt_std_s.unwrap() < 1e-9);
    }

    #[test]
    fn policies_share_spawn_layouts() {
        let cfg = ScenarioConfig::default();
        let a = run_benchmark(&cfg, &PolicySpec::Dwa(DwaParams::default()), 6, 77, Some(2)).unwrap();
        let b = run_benchmark(&cfg, &PolicySpec::Orca, 6, 77, Some(3)).unwrap();
        for (x, y) in a.per_seed_outcomes.iter().zip(&b.per_seed_outcomes) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.spawn_digest, y.spawn_digest);
        }
    }

    #[test]
    fn rates_partition_trials() {
        let cfg = ScenarioConfig::default();
        let r = run_benchmark(&cfg, &PolicySpec::Straight, 16, 5, None).unwrap();
        assert!((r.sr + r.cr + r.tr + r.fr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn population_std() {
        let mk = |t: f64, i: usize| TrialOutcome {
            trial: i,
            seed: i as u64,
            status: TrialStatus::Arrival,
            steps: 0,
            nav_time_s: t,
            spawn_digest: String::new(),
            geometric_collision: false,
        };
        let r = aggregate(
            &ScenarioConfig::default(),
            &PolicySpec::Zero,
            0,
            vec![mk(10.0, 0), mk(14.0, 1)],
        );
        assert_eq!(r.nt_mean_s, Some(12.0));
        assert_eq!(r.nt_std_s, Some(2.0));
    }

    #[test]
    fn parse_policy_names() {
        assert_eq!("orca".parse::<PolicySpec>().unwrap(), PolicySpec::Orca);
        assert!("rl".parse::<PolicySpec>().is_err());
    }
}
