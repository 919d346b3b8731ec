//! Bundled scenario files and the random-boxes generator.

use bitkomo::cspace::{Bounds, ScenarioError};
use bitkomo::{Obstacle, RobotModel, Scenario};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DISC_ROOMS: &str = include_str!("../scenarios/disc-rooms.toml");
pub const RANDOM_BOXES: &str = include_str!("../scenarios/random-boxes.toml");
pub const PLANAR_ARM_7: &str = include_str!("../scenarios/planar-arm-7.toml");

/// Generator arguments of the checked-in random-boxes file.
pub const RANDOM_BOXES_SEED: u64 = 7;
pub const RANDOM_BOXES_COUNT: usize = 24;

const BUNDLED: [(&str, &str); 3] = [
    ("disc-rooms", DISC_ROOMS),
    ("random-boxes", RANDOM_BOXES),
    ("planar-arm-7", PLANAR_ARM_7),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// A bundled scenario by name.
pub fn bundled(name: &str) -> Option<Result<Scenario, ScenarioError>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::load(text))
}

/// Loads `arg` as a file path, falling back to a bundled name when no such
/// file exists.
pub fn resolve(arg: &str) -> Result<Scenario, ScenarioError> {
    if !std::path::Path::new(arg).exists() {
        if let Some(s) = bundled(arg) {
            return s;
        }
    }
    Scenario::load_file(arg)
}

const BOX_SIDE: (f64, f64) = (0.04, 0.14);
const ROBOT_RADIUS: f64 = 0.01;
/// Free space kept around start and goal.
const ENDPOINT_KEEPOUT: f64 = 0.04;

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// `count` axis-aligned boxes with sides in `[0.04, 0.14]` scattered over
/// the unit square, for a disc robot going corner to corner. More boxes
/// make a denser world; boxes that would cover an endpoint are redrawn.
/// Coordinates are rounded to three decimals so the document is exact.
pub fn random_boxes(seed: u64, count: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (start, goal) = ([0.05, 0.05], [0.95, 0.95]);
    let clear = ROBOT_RADIUS + ENDPOINT_KEEPOUT;
    let covers = |lo: [f64; 2], hi: [f64; 2], p: [f64; 2]| {
        (0..2).all(|i| lo[i] - clear < p[i] && p[i] < hi[i] + clear)
    };
    let mut obstacles = Vec::with_capacity(count);
    while obstacles.len() < count {
        let w = rng.random_range(BOX_SIDE.0..BOX_SIDE.1);
        let h = rng.random_range(BOX_SIDE.0..BOX_SIDE.1);
        let lo = [round3(rng.random_range(0.0..1.0 - w)), round3(rng.random_range(0.0..1.0 - h))];
        let hi = [round3(lo[0] + w), round3(lo[1] + h)];
        if covers(lo, hi, start) || covers(lo, hi, goal) {
            continue;
        }
        obstacles.push(Obstacle::aabb(lo, hi));
    }
    Scenario::new(
        "random-boxes",
        Bounds(vec![[0.0, 1.0], [0.0, 1.0]]),
        obstacles,
        RobotModel::Disc { radius: ROBOT_RADIUS },
        start.into(),
        goal.into(),
    )
    .expect("endpoints are kept clear of every box")
    .with_time_limit(Some(10.0))
}
