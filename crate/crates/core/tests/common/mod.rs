//! Random worlds shared by the integration tests.
#![allow(dead_code)]

use bitkomo::cspace::Bounds;
use bitkomo::{Configuration, Obstacle, RobotModel, Scenario};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_bounds() -> Bounds {
    Bounds(vec![[0.0, 1.0], [0.0, 1.0]])
}

pub fn random_obstacle(rng: &mut impl Rng) -> Obstacle {
    let c = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
    match rng.random_range(0..3) {
        0 => Obstacle::disc(c, rng.random_range(0.02..0.12)),
        1 => {
            let (w, h) = (rng.random_range(0.02..0.2), rng.random_range(0.02..0.2));
            Obstacle::aabb([c[0] - w / 2.0, c[1] - h / 2.0], [c[0] + w / 2.0, c[1] + h / 2.0])
        }
        _ => {
            // Regular polygon with a random phase, counter-clockwise.
            let k = rng.random_range(3..7);
            let r = rng.random_range(0.03..0.12);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let vertices = (0..k)
                .map(|i| {
                    let a = phase + std::f64::consts::TAU * i as f64 / k as f64;
                    [c[0] + r * a.cos(), c[1] + r * a.sin()]
                })
                .collect();
            Obstacle::polygon(vertices)
        }
    }
}

/// Disc robot among `count` random discs, boxes and polygons, with random
/// free endpoints.
pub fn random_disc_world(seed: u64, count: usize) -> Scenario {
    let mut rng = rng(seed);
    let radius = rng.random_range(0.005..0.03);
    let obstacles: Vec<Obstacle> = (0..count).map(|_| random_obstacle(&mut rng)).collect();
    loop {
        let start = random_point(&mut rng);
        let goal = random_point(&mut rng);
        // The constructor rejects endpoints in collision.
        if let Ok(s) = Scenario::new(
            format!("random-{seed}"),
            unit_bounds(),
            obstacles.clone(),
            RobotModel::Disc { radius },
            start,
            goal,
        ) {
            return s;
        }
    }
}

pub fn random_point(rng: &mut impl Rng) -> Configuration {
    [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)].into()
}

/// Uniform valid configuration of `scenario`, by rejection.
pub fn free_config(rng: &mut impl Rng, scenario: &Scenario) -> Configuration {
    loop {
        let q: Vec<f64> = scenario.bounds.0.iter().map(|[lo, hi]| rng.random_range(*lo..*hi)).collect();
        if scenario.is_valid(&q) {
            return q.into();
        }
    }
}

pub fn empty_unit_square(start: [f64; 2], goal: [f64; 2]) -> Scenario {
    Scenario::new(
        "empty",
        unit_bounds(),
        vec![],
        RobotModel::Disc { radius: 0.01 },
        start.into(),
        goal.into(),
    )
    .unwrap()
}
