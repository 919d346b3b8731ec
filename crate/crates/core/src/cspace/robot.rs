use super::geometry::{Segment, Shape, Vec2};
use serde::{Deserialize, Serialize};

/// Robot body model. The configuration dimension is 2 for a disc and the
/// number of links for a planar arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RobotModel {
    /// Disc translating in the plane; the configuration is its centre.
    Disc { radius: f64 },
    /// Serial chain of revolute joints with capsule links. Joint angles are
    /// relative to the previous link.
    PlanarArm {
        base: [f64; 2],
        link_lengths: Vec<f64>,
        link_radius: f64,
    },
}

impl RobotModel {
    pub fn dim(&self) -> usize {
        match self {
            RobotModel::Disc { .. } => 2,
            RobotModel::PlanarArm { link_lengths, .. } => link_lengths.len(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            RobotModel::Disc { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(format!("disc radius must be > 0, got {radius}"));
                }
            }
            RobotModel::PlanarArm {
                base,
                link_lengths,
                link_radius,
            } => {
                if link_lengths.is_empty() {
                    return Err("planar arm needs at least one link".into());
                }
                if let Some(l) = link_lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
                    return Err(format!("link lengths must be > 0, got {l}"));
                }
                if !(link_radius.is_finite() && *link_radius >= 0.0) {
                    return Err(format!("link radius must be >= 0, got {link_radius}"));
                }
                if !base.iter().all(|v| v.is_finite()) {
                    return Err("non-finite arm base".into());
                }
            }
        }
        Ok(())
    }

    /// Joint positions `J_0 = base, ..., J_n = tip` of a planar arm.
    /// For a disc robot this is the single centre point.
    pub fn joint_positions(&self, q: &[f64]) -> Vec<Vec2> {
        match self {
            RobotModel::Disc { .. } => vec![Vec2::new(q[0], q[1])],
            RobotModel::PlanarArm {
                base, link_lengths, ..
            } => {
                let mut pts = Vec::with_capacity(link_lengths.len() + 1);
                let mut p: Vec2 = (*base).into();
                let mut theta = 0.0;
                pts.push(p);
                for (len, qi) in link_lengths.iter().zip(q) {
                    theta += qi;
                    p = p + Vec2::new(theta.cos(), theta.sin()) * *len;
                    pts.push(p);
                }
                pts
            }
        }
    }

    /// Link segments of a planar arm at `q`, base first. Empty for a disc.
    pub fn forward_kinematics(&self, q: &[f64]) -> Vec<Segment> {
        match self {
            RobotModel::Disc { .. } => Vec::new(),
            RobotModel::PlanarArm { .. } => self
                .joint_positions(q)
                .windows(2)
                .map(|w| Segment { a: w[0], b: w[1] })
                .collect(),
        }
    }

    /// Minimum signed clearance to `shapes` and its gradient with respect to
    /// `q`. Ties keep the first obstacle in list order (then the first link).
    pub(crate) fn clearance(&self, shapes: &[Shape], q: &[f64]) -> (f64, Vec<f64>) {
        let n = self.dim();
        let mut grad = vec![0.0; n];
        if shapes.is_empty() {
            return (f64::INFINITY, grad);
        }
        match self {
            RobotModel::Disc { radius } => {
                let p = Vec2::new(q[0], q[1]);
                let mut best = (f64::INFINITY, Vec2::ZERO);
                for s in shapes {
                    let (d, g) = s.point_sd(p);
                    if d < best.0 {
                        best = (d, g);
                    }
                }
                grad[0] = best.1.x;
                grad[1] = best.1.y;
                (best.0 - radius, grad)
            }
            RobotModel::PlanarArm { link_radius, .. } => {
                let joints = self.joint_positions(q);
                let mut best = (f64::INFINITY, 0usize, Vec2::ZERO, Vec2::ZERO);
                for s in shapes {
                    for link in 0..n {
                        // The separating-axis bound never exceeds the distance.
                        if s.segment_sd_lower_bound(joints[link], joints[link + 1]) >= best.0 {
                            continue;
                        }
                        let (d, ga, gb) = s.segment_sd(joints[link], joints[link + 1]);
                        if d < best.0 {
                            best = (d, link, ga, gb);
                        }
                    }
                }
                let (d, link, ga, gb) = best;
                link_gradient(&joints, link, ga, gb, &mut grad);
                (d - link_radius, grad)
            }
        }
    }

    /// Signed clearance of every (obstacle, body part) pair, obstacle-major:
    /// one term per shape for a disc, one per shape and link for an arm. The
    /// minimum over the terms is [`RobotModel::clearance`]. Gradients are left
    /// empty unless `gradients` is set.
    pub(crate) fn clearance_terms(&self, shapes: &[Shape], q: &[f64], gradients: bool) -> Vec<(f64, Vec<f64>)> {
        let n = self.dim();
        match self {
            RobotModel::Disc { radius } => {
                let p = Vec2::new(q[0], q[1]);
                shapes
                    .iter()
                    .map(|s| {
                        if gradients {
                            let (d, g) = s.point_sd(p);
                            (d - radius, vec![g.x, g.y])
                        } else {
                            (s.point_sd_value(p) - radius, Vec::new())
                        }
                    })
                    .collect()
            }
            RobotModel::PlanarArm { link_radius, .. } => {
                let joints = self.joint_positions(q);
                let mut out = Vec::with_capacity(shapes.len() * n);
                for s in shapes {
                    for link in 0..n {
                        let (a, b) = (joints[link], joints[link + 1]);
                        if gradients {
                            let (d, ga, gb) = s.segment_sd(a, b);
                            let mut grad = vec![0.0; n];
                            link_gradient(&joints, link, ga, gb, &mut grad);
                            out.push((d - link_radius, grad));
                        } else {
                            out.push((s.segment_sd_value(a, b) - link_radius, Vec::new()));
                        }
                    }
                }
                out
            }
        }
    }

    /// Clearance value without gradient.
    pub(crate) fn clearance_value(&self, shapes: &[Shape], q: &[f64]) -> f64 {
        match self {
            RobotModel::Disc { radius } => {
                let p = Vec2::new(q[0], q[1]);
                shapes
                    .iter()
                    .map(|s| s.point_sd_value(p))
                    .fold(f64::INFINITY, f64::min)
                    - radius
            }
            RobotModel::PlanarArm { link_radius, .. } => {
                let joints = self.joint_positions(q);
                let mut best = f64::INFINITY;
                for s in shapes {
                    for w in joints.windows(2) {
                        if s.segment_sd_lower_bound(w[0], w[1]) < best {
                            best = best.min(s.segment_sd_value(w[0], w[1]));
                        }
                    }
                }
                best - link_radius
            }
        }
    }

    /// True iff the body at `q` overlaps some shape (clearance < 0).
    pub(crate) fn collides(&self, shapes: &[Shape], q: &[f64]) -> bool {
        match self {
            RobotModel::Disc { radius } => {
                let p = Vec2::new(q[0], q[1]);
                shapes.iter().any(|s| s.point_sd_value(p) < *radius)
            }
            RobotModel::PlanarArm { link_radius, .. } => {
                let joints = self.joint_positions(q);
                shapes.iter().any(|s| {
                    joints.windows(2).any(|w| {
                        s.segment_sd_lower_bound(w[0], w[1]) < *link_radius
                            && s.segment_sd_value(w[0], w[1]) < *link_radius
                    })
                })
            }
        }
    }
}

/// Chain rule from the workspace gradients `ga`, `gb` of a distance with
/// respect to the endpoints of `link` to joint space:
/// dJ_i/dq_k = perp(J_i - J_{k-1}) for k <= i (1-based joints).
fn link_gradient(joints: &[Vec2], link: usize, ga: Vec2, gb: Vec2, grad: &mut [f64]) {
    for (k, g) in grad.iter_mut().enumerate() {
        let pivot = joints[k];
        let mut acc = 0.0;
        if k < link {
            acc += ga.dot((joints[link] - pivot).perp());
        }
        if k <= link {
            acc += gb.dot((joints[link + 1] - pivot).perp());
        }
        *g = acc;
    }
}
