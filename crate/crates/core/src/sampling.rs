//! Batch sampling of free configurations, uniform or restricted to the
//! informed set of a cost bound, and the r-disc connection radius.

use crate::bitstar::PlannerState;
use crate::cspace::{distance, Configuration, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use thiserror::Error;

pub const DEFAULT_BATCH_SIZE: usize = 100;
pub const DEFAULT_REJECTION_CAP: usize = 10_000;
pub const DEFAULT_RADIUS_ETA: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("sampler starved after {draws} draws (acceptance rate {acceptance_rate:.3e})")]
    Starved { draws: usize, acceptance_rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub batch_size: usize,
    pub rng_seed: u64,
    /// Maximum draws spent on a single accepted sample.
    pub rejection_cap: usize,
}

impl SamplerConfig {
    pub fn new(batch_size: usize, rng_seed: u64) -> Self {
        SamplerConfig {
            batch_size: batch_size.max(1),
            rng_seed,
            rejection_cap: DEFAULT_REJECTION_CAP,
        }
    }
}

/// The prolate hyperspheroid `{x : |x - a| + |x - b| <= c}` of configurations
/// that could lie on a path cheaper than `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformedSet {
    pub focus_a: Configuration,
    pub focus_b: Configuration,
    pub c_i: f64,
}

impl InformedSet {
    /// Bounds below the focal distance are raised to it.
    pub fn new(focus_a: Configuration, focus_b: Configuration, c_i: f64) -> Self {
        let c_min = distance(&focus_a, &focus_b);
        InformedSet {
            focus_a,
            focus_b,
            c_i: if c_i < c_min { c_min } else { c_i },
        }
    }

    pub fn unbounded(scenario: &Scenario) -> Self {
        InformedSet::new(scenario.start.clone(), scenario.goal.clone(), f64::INFINITY)
    }

    pub fn heuristic_cost(&self, x: &[f64]) -> f64 {
        distance(x, &self.focus_a) + distance(x, &self.focus_b)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.heuristic_cost(x) <= self.c_i
    }
}

/// Lebesgue measure of the unit ball in `d` dimensions.
pub fn unit_ball_measure(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_measure(d - 2) * 2.0 * PI / d as f64,
    }
}

/// r-disc connection radius for a graph of `n_samples` states in `dim`
/// dimensions, decreasing like `(log n / n)^(1/d)`.
pub fn connection_radius(n_samples: usize, dim: usize, free_measure: f64, eta: f64) -> f64 {
    let n = n_samples.max(2) as f64;
    let d = dim as f64;
    eta * 2.0
        * (1.0 + 1.0 / d).powf(1.0 / d)
        * (free_measure / unit_ball_measure(dim)).powf(1.0 / d)
        * (n.ln() / n).powf(1.0 / d)
}

/// Owns the random stream of one planning run.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: SamplerConfig,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig) -> Self {
        Sampler {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
        }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Draws `batch_size` valid configurations, inside the informed set when
    /// its bound is finite.
    pub fn sample_batch(
        &mut self,
        scenario: &Scenario,
        informed: &InformedSet,
    ) -> Result<Vec<Configuration>, SamplingError> {
        let m = self.cfg.batch_size;
        let draw = Proposal::new(scenario, informed);
        let mut out = Vec::with_capacity(m);
        let mut draws = 0usize;
        while out.len() < m {
            let mut attempts = 0;
            loop {
                if attempts == self.cfg.rejection_cap {
                    return Err(SamplingError::Starved {
                        draws,
                        acceptance_rate: out.len() as f64 / draws.max(1) as f64,
                    });
                }
                attempts += 1;
                draws += 1;
                let x = draw.propose(&mut self.rng);
                if scenario.bounds.contains(&x) && informed.contains(&x) && scenario.is_valid(&x) {
                    out.push(Configuration(x));
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Proposal distribution: uniform over the bounds, or uniform over the
/// informed ellipsoid when that is smaller.
enum Proposal<'a> {
    Box(&'a Scenario),
    Ellipsoid {
        center: Vec<f64>,
        /// Unit transverse axis.
        axis: Vec<f64>,
        r_major: f64,
        r_minor: f64,
    },
}

impl<'a> Proposal<'a> {
    fn new(scenario: &'a Scenario, informed: &InformedSet) -> Self {
        if !informed.c_i.is_finite() {
            return Proposal::Box(scenario);
        }
        let d = scenario.dim();
        let c = informed.c_i;
        let c_min = distance(&informed.focus_a, &informed.focus_b);
        let r_major = c / 2.0;
        let r_minor = (c * c - c_min * c_min).max(0.0).sqrt() / 2.0;
        let ellipsoid_measure = unit_ball_measure(d) * r_major * r_minor.powi(d as i32 - 1);
        if ellipsoid_measure >= scenario.bounds.measure() {
            return Proposal::Box(scenario);
        }
        let center = informed
            .focus_a
            .iter()
            .zip(informed.focus_b.iter())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mut axis = vec![0.0; d];
        if c_min > 0.0 {
            for (i, v) in axis.iter_mut().enumerate() {
                *v = (informed.focus_b[i] - informed.focus_a[i]) / c_min;
            }
        } else {
            axis[0] = 1.0;
        }
        Proposal::Ellipsoid {
            center,
            axis,
            r_major,
            r_minor,
        }
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Proposal::Box(s) => s
                .bounds
                .0
                .iter()
                .map(|[lo, hi]| lo + rng.random::<f64>() * (hi - lo))
                .collect(),
            Proposal::Ellipsoid {
                center,
                axis,
                r_major,
                r_minor,
            } => {
                let d = center.len();
                // Uniform in the unit ball: Gaussian direction, radius U^(1/d).
                let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let radius = rng.random::<f64>().powf(1.0 / d as f64);
                let scale = if norm > 0.0 { radius / norm } else { 0.0 };
                x[0] *= scale * r_major;
                for v in x.iter_mut().skip(1) {
                    *v *= scale * r_minor;
                }
                // Householder reflection taking e_1 onto the transverse axis.
                let mut h: Vec<f64> = axis.iter().map(|a| -a).collect();
                h[0] += 1.0;
                let hh: f64 = h.iter().map(|v| v * v).sum();
                if hh > 1e-24 {
                    let k = 2.0 * h.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / hh;
                    for (xi, hi) in x.iter_mut().zip(&h) {
                        *xi -= k * hi;
                    }
                }
                x.iter().zip(center).map(|(v, c)| v + c).collect()
            }
        }
    }
}

/// Drops every sample and tree vertex whose heuristic total `g^ + h^`
/// exceeds `c_i`; surviving descendants of removed vertices become
/// unconnected samples. The start and goal are never removed.
pub fn prune(state: &mut PlannerState, c_i: f64) {
    state.prune(c_i);
}
