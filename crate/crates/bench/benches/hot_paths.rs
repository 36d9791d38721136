use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use crowdnav::baselines::{dwa_plan, MovingCircle};
use crowdnav::crowd::{step_crowd, CrowdState, EgoDisc, OrcaParams};
use crowdnav::lidar::{build_observation, cast_scan, ScanStack, DEFAULT_MAX_RANGE};
use crowdnav::kinematics::step_differential;
use crowdnav::{Circle, DwaParams, NavAction, NavEnv, ScenarioConfig, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A mid-episode scene: the default scenario after a few straight steps.
fn scene() -> NavEnv {
    let config = ScenarioConfig {
        n_pedestrians_range: [5, 5],
        n_obstacles_range: [4, 4],
        ..ScenarioConfig::default()
    };
    let (mut env, _) = NavEnv::reset(&config, 11).expect("layout");
    let action = NavAction::new(0.5, 0.1, env.limits());
    for _ in 0..6 {
        env.step(action).expect("step");
    }
    env
}

fn bodies(env: &NavEnv) -> Vec<Circle> {
    env.obstacles()
        .iter()
        .copied()
        .chain(env.pedestrians().iter().map(|p| p.body()))
        .collect()
}

fn bench_cast_scan(c: &mut Criterion) {
    let env = scene();
    let circles = bodies(&env);
    let ego = *env.ego();
    c.bench_function("cast_scan", |b| {
        b.iter(|| cast_scan(black_box(&ego), black_box(&circles), DEFAULT_MAX_RANGE))
    });
}

fn bench_build_observation(c: &mut Criterion) {
    let env = scene();
    let circles = bodies(&env);
    let mut pose = *env.ego();
    let mut stack = ScanStack::warm(cast_scan(&pose, &circles, DEFAULT_MAX_RANGE));
    let action = NavAction::new(0.5, 0.2, env.limits());
    for _ in 0..5 {
        pose = step_differential(&pose, &action, 0.2);
        stack.push(cast_scan(&pose, &circles, DEFAULT_MAX_RANGE));
    }
    c.bench_function("build_observation", |b| {
        b.iter(|| build_observation(black_box(&stack), black_box(&pose)))
    });
}

fn bench_dwa_plan(c: &mut Criterion) {
    let env = scene();
    let world = env.world();
    let moving: Vec<MovingCircle> = env
        .obstacles()
        .iter()
        .map(|&circle| MovingCircle {
            circle,
            velocity: Vec2::new(0.0, 0.0),
        })
        .chain(env.pedestrians().iter().map(|p| MovingCircle {
            circle: p.body(),
            velocity: p.velocity,
        }))
        .collect();
    let params = DwaParams::default();
    c.bench_function("dwa_plan", |b| {
        b.iter(|| {
            dwa_plan(
                black_box(&world.ego),
                world.ego_radius,
                world.goal,
                black_box(&moving),
                &params,
                &world.limits,
            )
        })
    });
}

fn bench_step_crowd(c: &mut Criterion) {
    let env = scene();
    let world = env.world();
    let crowd = CrowdState::new(env.pedestrians().to_vec(), ChaCha8Rng::seed_from_u64(0), 0.15);
    let ego = EgoDisc {
        pose: world.ego,
        speed: world.ego_action.v(),
        radius: world.ego_radius,
    };
    let params = OrcaParams::default();
    c.bench_function("step_crowd", |b| {
        b.iter_batched(
            || crowd.clone(),
            |mut crowd| {
                step_crowd(&mut crowd, Some(&ego), env.obstacles(), &params);
                crowd
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_env_step(c: &mut Criterion) {
    let env = scene();
    let action = NavAction::new(0.4, 0.0, env.limits());
    c.bench_function("env_step", |b| {
        b.iter_batched(
            || env.clone(),
            |mut env| env.step(action).map(|r| r.reward),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    hot_paths,
    bench_cast_scan,
    bench_build_observation,
    bench_dwa_plan,
    bench_step_crowd,
    bench_env_step
);
criterion_main!(hot_paths);
