//! Plain 2D points/vectors and straight segments.

use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive for a left turn.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        self.scale(s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A straight, oriented segment; the interface Γ is one of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Unit vector from `a` to `b`.
    pub fn direction(&self) -> Point {
        (self.b - self.a).normalized()
    }

    /// Signed arc-length coordinate of the projection of `p` onto the
    /// supporting line, measured from `a`.
    pub fn arc_coord(&self, p: Point) -> f64 {
        (p - self.a).dot(self.direction())
    }

    /// Point at arc-length coordinate `s`.
    pub fn point_at(&self, s: f64) -> Point {
        self.a + self.direction() * s
    }

    /// Distance of `p` to the supporting line (not clamped to the segment).
    pub fn line_distance(&self, p: Point) -> f64 {
        self.direction().cross(p - self.a).abs()
    }

    /// True if `p` lies on the segment within `tol` (both off-line
    /// distance and arc-length overshoot).
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        if self.line_distance(p) > tol {
            return false;
        }
        let s = self.arc_coord(p);
        s >= -tol && s <= self.length() + tol
    }
}
