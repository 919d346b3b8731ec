//! Closed-form signed distances for planar primitives.
//!
//! Convention: positive outside, negative inside. Gradients are taken with
//! respect to the query point (or segment endpoints).

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A workspace line segment, e.g. one link of a planar arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

/// Static workspace obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    Disc { center: [f64; 2], radius: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
    /// Strictly convex, counter-clockwise.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Obstacle {
    pub fn disc(center: [f64; 2], radius: f64) -> Self {
        Obstacle::Disc { center, radius }
    }

    pub fn aabb(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Obstacle::Box { lo, hi }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Self {
        Obstacle::Polygon { vertices }
    }

    /// Checks the shape invariants; returns a reason on failure.
    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Obstacle::Disc { center, radius } => {
                if !finite(center) || !radius.is_finite() {
                    return Err("non-finite disc parameters".into());
                }
                if *radius <= 0.0 {
                    return Err(format!("disc radius must be > 0, got {radius}"));
                }
            }
            Obstacle::Box { lo, hi } => {
                if !finite(lo) || !finite(hi) {
                    return Err("non-finite box corners".into());
                }
                if lo[0] >= hi[0] || lo[1] >= hi[1] {
                    return Err(format!("box requires lo < hi, got {lo:?} / {hi:?}"));
                }
            }
            Obstacle::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err("polygon needs at least 3 vertices".into());
                }
                if !vertices.iter().all(|v| finite(v)) {
                    return Err("non-finite polygon vertex".into());
                }
                let pts: Vec<Vec2> = vertices.iter().map(|&v| v.into()).collect();
                let k = pts.len();
                let mut turning = 0.0;
                for i in 0..k {
                    let e0 = pts[(i + 1) % k] - pts[i];
                    let e1 = pts[(i + 2) % k] - pts[(i + 1) % k];
                    if e0.cross(e1) <= 0.0 {
                        return Err(format!(
                            "polygon is not strictly convex counter-clockwise at vertex {}",
                            (i + 1) % k
                        ));
                    }
                    turning += e0.cross(e1).atan2(e0.dot(e1));
                }
                // A star polygon has only left turns but winds more than once.
                if (turning - std::f64::consts::TAU).abs() > 1e-6 {
                    return Err("polygon winds more than once".into());
                }
            }
        }
        Ok(())
    }

    pub(crate) fn shape(&self) -> Shape {
        match self {
            Obstacle::Disc { center, radius } => Shape::Disc {
                center: (*center).into(),
                radius: *radius,
            },
            Obstacle::Box { lo, hi } => Shape::Polygon(ConvexPolygon::new(vec![
                Vec2::new(lo[0], lo[1]),
                Vec2::new(hi[0], lo[1]),
                Vec2::new(hi[0], hi[1]),
                Vec2::new(lo[0], hi[1]),
            ])),
            Obstacle::Polygon { vertices } => {
                Shape::Polygon(ConvexPolygon::new(vertices.iter().map(|&v| v.into()).collect()))
            }
        }
    }
}

/// Preprocessed obstacle geometry.
#[derive(Debug, Clone)]
pub(crate) enum Shape {
    Disc { center: Vec2, radius: f64 },
    Polygon(ConvexPolygon),
}

#[derive(Debug, Clone)]
pub(crate) struct ConvexPolygon {
    verts: Vec<Vec2>,
    /// Outward unit normal of edge `i -> i + 1`.
    normals: Vec<Vec2>,
    /// `normals[i] . verts[i]`: support value along the edge's own normal.
    offsets: Vec<f64>,
    /// Smallest projection of the polygon onto `normals[i]`.
    min_proj: Vec<f64>,
}

impl ConvexPolygon {
    fn new(verts: Vec<Vec2>) -> Self {
        let k = verts.len();
        let normals: Vec<Vec2> = (0..k)
            .map(|i| {
                let d = verts[(i + 1) % k] - verts[i];
                let l = d.norm();
                Vec2::new(d.y / l, -d.x / l)
            })
            .collect();
        let offsets = (0..k).map(|i| normals[i].dot(verts[i])).collect();
        let min_proj = normals
            .iter()
            .map(|n| verts.iter().map(|v| n.dot(*v)).fold(f64::INFINITY, f64::min))
            .collect();
        ConvexPolygon {
            verts,
            normals,
            offsets,
            min_proj,
        }
    }

    fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let k = self.verts.len();
        (0..k).map(move |i| (self.verts[i], self.verts[(i + 1) % k]))
    }
}

/// Closest point on segment `[a, b]` to `p`: returns (distance, closest point, parameter).
pub(crate) fn point_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, Vec2, f64) {
    let d = b - a;
    let len2 = d.dot(d);
    let t = if len2 > 0.0 {
        ((p - a).dot(d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = a + d * t;
    ((p - c).norm(), c, t)
}

fn unit_or(v: Vec2, len: f64, fallback: Vec2) -> Vec2 {
    if len > 0.0 {
        v * (1.0 / len)
    } else {
        fallback
    }
}

impl Shape {
    /// Signed distance from a point and its gradient.
    pub(crate) fn point_sd(&self, p: Vec2) -> (f64, Vec2) {
        match self {
            Shape::Disc { center, radius } => {
                let r = p - *center;
                let l = r.norm();
                (l - radius, unit_or(r, l, Vec2::new(1.0, 0.0)))
            }
            Shape::Polygon(poly) => {
                let mut s_max = f64::NEG_INFINITY;
                let mut arg = 0;
                for (i, n) in poly.normals.iter().enumerate() {
                    let s = n.dot(p) - poly.offsets[i];
                    if s > s_max {
                        s_max = s;
                        arg = i;
                    }
                }
                if s_max <= 0.0 {
                    return (s_max, poly.normals[arg]);
                }
                let mut best = (f64::INFINITY, Vec2::ZERO);
                for (a, b) in poly.edges() {
                    let (d, c, _) = point_segment(p, a, b);
                    if d < best.0 {
                        best = (d, c);
                    }
                }
                let r = p - best.1;
                (best.0, unit_or(r, best.0, poly.normals[arg]))
            }
        }
    }

    /// Signed distance value only.
    pub(crate) fn point_sd_value(&self, p: Vec2) -> f64 {
        match self {
            Shape::Disc { center, radius } => (p - *center).norm() - radius,
            Shape::Polygon(poly) => {
                let s_max = poly
                    .normals
                    .iter()
                    .zip(&poly.offsets)
                    .map(|(n, o)| n.dot(p) - o)
                    .fold(f64::NEG_INFINITY, f64::max);
                if s_max <= 0.0 {
                    return s_max;
                }
                poly.edges()
                    .map(|(a, b)| point_segment(p, a, b).0)
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Signed distance between a segment and the shape, with gradients with
    /// respect to both endpoints.
    ///
    /// Separated pairs report the Euclidean distance. Overlapping pairs report
    /// minus the penetration depth along the best separating axis.
    pub(crate) fn segment_sd(&self, a: Vec2, b: Vec2) -> (f64, Vec2, Vec2) {
        match self {
            Shape::Disc { center, radius } => {
                let (d, c, t) = point_segment(*center, a, b);
                let axis = b - a;
                let u = unit_or(c - *center, d, unit_or(axis.perp(), axis.norm(), Vec2::new(1.0, 0.0)));
                (d - radius, u * (1.0 - t), u * t)
            }
            Shape::Polygon(poly) => {
                let sat = sat_separation(poly, a, b);
                if sat.0 <= 0.0 {
                    return sat;
                }
                segment_polygon_distance(poly, a, b)
            }
        }
    }

    pub(crate) fn segment_sd_value(&self, a: Vec2, b: Vec2) -> f64 {
        match self {
            Shape::Disc { center, radius } => point_segment(*center, a, b).0 - radius,
            Shape::Polygon(poly) => {
                let s = sat_separation(poly, a, b).0;
                if s <= 0.0 {
                    s
                } else {
                    segment_polygon_distance(poly, a, b).0
                }
            }
        }
    }

    /// Lower bound on the segment distance that is cheap to evaluate.
    pub(crate) fn segment_sd_lower_bound(&self, a: Vec2, b: Vec2) -> f64 {
        match self {
            Shape::Disc { .. } => self.segment_sd_value(a, b),
            Shape::Polygon(poly) => sat_separation(poly, a, b).0,
        }
    }
}

/// Largest separation over candidate axes (polygon normals and the segment
/// normal). Positive iff the segment and the polygon are disjoint.
fn sat_separation(poly: &ConvexPolygon, a: Vec2, b: Vec2) -> (f64, Vec2, Vec2) {
    let mut best = (f64::NEG_INFINITY, Vec2::ZERO, Vec2::ZERO);
    for (i, n) in poly.normals.iter().enumerate() {
        let (pa, pb) = (n.dot(a), n.dot(b));
        // Segment beyond the edge on its outer side.
        let s_out = pa.min(pb) - poly.offsets[i];
        if s_out > best.0 {
            best = if pa <= pb {
                (s_out, *n, Vec2::ZERO)
            } else {
                (s_out, Vec2::ZERO, *n)
            };
        }
        // Segment beyond the polygon on the opposite side.
        let s_in = poly.min_proj[i] - pa.max(pb);
        if s_in > best.0 {
            best = if pa >= pb {
                (s_in, -*n, Vec2::ZERO)
            } else {
                (s_in, Vec2::ZERO, -*n)
            };
        }
    }

    let d = b - a;
    let len = d.norm();
    if len > 0.0 {
        let m = d.perp() * (1.0 / len);
        let (mut vmin, mut vmax) = (poly.verts[0], poly.verts[0]);
        for v in &poly.verts {
            if m.dot(*v) < m.dot(vmin) {
                vmin = *v;
            }
            if m.dot(*v) > m.dot(vmax) {
                vmax = *v;
            }
        }
        for (sigma, v) in [(1.0, vmax), (-1.0, vmin)] {
            let w = a - v;
            let s = sigma * m.dot(w);
            if s > best.0 {
                // s = sigma * (perp(d) . w) / |d|
                let rt_w = Vec2::new(w.y, -w.x);
                let dd = (rt_w * (1.0 / len) - d * (m.dot(w) / (len * len))) * sigma;
                let dw = m * sigma;
                best = (s, dw - dd, dd);
            }
        }
    }
    best
}

/// Euclidean distance between a segment and a polygon known to be disjoint.
fn segment_polygon_distance(poly: &ConvexPolygon, a: Vec2, b: Vec2) -> (f64, Vec2, Vec2) {
    let mut best = (f64::INFINITY, Vec2::ZERO, Vec2::ZERO);
    for (which, p) in [(0, a), (1, b)] {
        for (e0, e1) in poly.edges() {
            let (dist, c, _) = point_segment(p, e0, e1);
            if dist < best.0 {
                let u = unit_or(p - c, dist, Vec2::ZERO);
                best = if which == 0 {
                    (dist, u, Vec2::ZERO)
                } else {
                    (dist, Vec2::ZERO, u)
                };
            }
        }
    }
    for v in &poly.verts {
        let (dist, c, t) = point_segment(*v, a, b);
        if dist < best.0 {
            let u = unit_or(c - *v, dist, Vec2::ZERO);
            best = (dist, u * (1.0 - t), u * t);
        }
    }
    best
}
