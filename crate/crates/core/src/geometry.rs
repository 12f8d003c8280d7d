use nalgebra::{Point2, Vector2};

pub type Point = Point2<f64>;
pub type Vec2 = Vector2<f64>;

/// Straight segment between two distinct points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        debug_assert!(a != b, "degenerate segment");
        Self { a, b }
    }

    pub fn at(&self, lambda: f64) -> Point {
        self.a + (self.b - self.a) * lambda
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn midpoint(&self) -> Point {
        nalgebra::center(&self.a, &self.b)
    }
}

/// z-component of `u × v`.
#[inline]
pub fn cross(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

/// Signed area, positive for counterclockwise vertex order.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = &pts[i];
        let q = &pts[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

pub fn centroid(pts: &[Point]) -> Point {
    // Area centroid; for triangles this is the vertex average.
    if pts.len() == 3 {
        return Point::from((pts[0].coords + pts[1].coords + pts[2].coords) / 3.0);
    }
    let n = pts.len();
    let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = &pts[i];
        let q = &pts[(i + 1) % n];
        let w = p.x * q.y - q.x * p.y;
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

/// Outward unit normal of the edge `a -> b` of a counterclockwise polygon.
pub fn outward_normal(a: &Point, b: &Point) -> Vec2 {
    let d = b - a;
    Vec2::new(d.y, -d.x).normalize()
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// True when `p` lies on the rectangle boundary up to `tol`.
    pub fn on_boundary(&self, p: &Point, tol: f64) -> bool {
        (p.x - self.x0).abs() <= tol
            || (p.x - self.x1).abs() <= tol
            || (p.y - self.y0).abs() <= tol
            || (p.y - self.y1).abs() <= tol
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        Self::new(self.x0 + shift.x, self.x1 + shift.x, self.y0 + shift.y, self.y1 + shift.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shoelace_and_centroid() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(signed_area(&sq), 2.0);
        let c = centroid(&sq);
        assert!((c.x - 1.0).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(signed_area(&rev), -2.0);
    }

    #[test]
    fn normals_point_outward() {
        let n = outward_normal(&Point::new(0.0, 0.0), &Point::new(1.0, 0.0));
        assert_eq!(n, Vec2::new(0.0, -1.0));
    }
}
