//! Minimal 2D geometry: points and arc-length-parameterized polylines.
//!
//! Actors follow polyline routes addressed by arc length, which keeps the
//! kinematics one-dimensional and the collision math exact.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// 2D point / vector in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
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

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
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

/// Endpoint-exact linear interpolation: `t = 0` gives `a`, `t = 1` gives `b`.
fn lerp(a: Vec2, b: Vec2, t: f64) -> Vec2 {
    a * (1.0 - t) + b * t
}

/// Result of projecting a point onto a polyline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    /// Arc length of the closest point on the polyline.
    pub arc: f64,
    /// Euclidean distance from the query point to that closest point.
    pub lateral: f64,
}

/// Polyline with precomputed cumulative arc lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

impl Polyline {
    /// Builds a polyline. Returns `None` for fewer than two points or a pair
    /// of equal consecutive points.
    pub fn new(points: Vec<Vec2>) -> Option<Self> {
        if points.len() < 2 {
            return None;
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for w in points.windows(2) {
            let seg = w[0].dist(w[1]);
            if seg <= 0.0 {
                return None;
            }
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        Some(Polyline { points, cumulative })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Index of the segment that owns arc length `s`: the segment `[i, i+1)`
    /// in cumulative arc length, so an interior vertex belongs to the segment
    /// that follows it. `s` past the end maps to the last segment.
    fn segment_index(&self, s: f64) -> usize {
        for i in 0..self.points.len() - 1 {
            if s < self.cumulative[i + 1] {
                return i;
            }
        }
        self.points.len() - 2
    }

    /// Point at arc length `s`, clamped to `[0, length]`.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_index(s);
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let t = ((s - self.cumulative[i]) / seg_len).clamp(0.0, 1.0);
        lerp(self.points[i], self.points[i + 1], t)
    }

    /// Unit tangent of the segment that owns arc length `s`.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_index(s);
        let d = self.points[i + 1] - self.points[i];
        let n = d.norm();
        Vec2::new(d.x / n, d.y / n)
    }

    /// Projects `p` onto the polyline: closest point over all segments, ties
    /// resolved toward the lower segment index.
    pub fn project(&self, p: Vec2) -> Projection {
        let mut best = Projection {
            arc: 0.0,
            lateral: f64::INFINITY,
        };
        for i in 0..self.points.len() - 1 {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let seg_len2 = ab.dot(ab);
            let t = ((p - a).dot(ab) / seg_len2).clamp(0.0, 1.0);
            let q = lerp(a, b, t);
            let d = p.dist(q);
            if d < best.lateral {
                let seg_len = self.cumulative[i + 1] - self.cumulative[i];
                best = Projection {
                    arc: self.cumulative[i] + t * seg_len,
                    lateral: d,
                };
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_shape() -> Polyline {
        Polyline::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 5.0),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(Polyline::new(vec![Vec2::ZERO]).is_none());
        assert!(Polyline::new(vec![Vec2::ZERO, Vec2::ZERO]).is_none());
    }

    #[test]
    fn length_and_point_lookup() {
        let p = l_shape();
        assert_eq!(p.length(), 15.0);
        assert_eq!(p.point_at(0.0), Vec2::new(0.0, 0.0));
        assert_eq!(p.point_at(10.0), Vec2::new(10.0, 0.0));
        assert_eq!(p.point_at(12.5), Vec2::new(10.0, 2.5));
        // Clamping at both ends.
        assert_eq!(p.point_at(-3.0), Vec2::new(0.0, 0.0));
        assert_eq!(p.point_at(99.0), Vec2::new(10.0, 5.0));
    }

    #[test]
    fn endpoints_are_bit_exact() {
        let p = Polyline::new(vec![Vec2::new(0.1, 0.2), Vec2::new(0.3, 0.7)]).unwrap();
        assert_eq!(p.point_at(0.0), Vec2::new(0.1, 0.2));
        assert_eq!(p.point_at(p.length()), Vec2::new(0.3, 0.7));
    }

    #[test]
    fn tangent_switches_at_vertex() {
        let p = l_shape();
        assert_eq!(p.tangent_at(5.0), Vec2::new(1.0, 0.0));
        // Vertex at arc 10 belongs to the following (vertical) segment.
        assert_eq!(p.tangent_at(10.0), Vec2::new(0.0, 1.0));
        assert_eq!(p.tangent_at(15.0), Vec2::new(0.0, 1.0));
    }

    #[test]
    fn projection_hand_computed() {
        let p = l_shape();
        // Point above the horizontal segment.
        let pr = p.project(Vec2::new(4.0, 3.0));
        assert!((pr.arc - 4.0).abs() < 1e-12);
        assert!((pr.lateral - 3.0).abs() < 1e-12);
        // Point right of the vertical segment.
        let pr = p.project(Vec2::new(12.0, 4.0));
        assert!((pr.arc - 14.0).abs() < 1e-12);
        assert!((pr.lateral - 2.0).abs() < 1e-12);
        // Beyond the end: clamps to the last vertex.
        let pr = p.project(Vec2::new(10.0, 9.0));
        assert!((pr.arc - 15.0).abs() < 1e-12);
        assert!((pr.lateral - 4.0).abs() < 1e-12);
    }
}
