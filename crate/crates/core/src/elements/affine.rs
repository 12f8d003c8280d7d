use nalgebra::Matrix2;

use crate::error::ElementError;
use crate::geometry::{signed_area, Point, Vec2};

/// `x ↦ matrix · x + offset`, with cached inverse and determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap2 {
    pub matrix: Matrix2<f64>,
    pub offset: Vec2,
    inverse: Matrix2<f64>,
    det: f64,
}

impl AffineMap2 {
    pub fn new(matrix: Matrix2<f64>, offset: Vec2) -> Option<Self> {
        let det = matrix.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inverse = matrix.try_inverse()?;
        Some(Self {
            matrix,
            offset,
            inverse,
            det,
        })
    }

    pub fn identity() -> Self {
        Self::new(Matrix2::identity(), Vec2::zeros()).unwrap()
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::from(self.matrix * p.coords + self.offset)
    }

    pub fn apply_inverse(&self, q: &Point) -> Point {
        Point::from(self.inverse * (q.coords - self.offset))
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn inverse_matrix(&self) -> &Matrix2<f64> {
        &self.inverse
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap2) -> AffineMap2 {
        AffineMap2::new(
            self.matrix * inner.matrix,
            self.matrix * inner.offset + self.offset,
        )
        .expect("composition of invertible maps")
    }

    pub fn inverse(&self) -> AffineMap2 {
        AffineMap2::new(self.inverse, -(self.inverse * self.offset)).expect("invertible")
    }
}

/// Physical → reference map sending the labelled vertices `A1, A2, A4` of an
/// interface triangle to `(0,0), (1,0), (0,1)`.
pub fn affine_to_reference(a1: Point, a2: Point, a4: Point) -> Result<AffineMap2, ElementError> {
    let area = signed_area(&[a1, a2, a4]);
    let h = (a2 - a1).norm().max((a4 - a1).norm()).max((a4 - a2).norm());
    if area.abs() <= 1e-14 * h * h {
        return Err(ElementError::DegenerateTriangle { area });
    }
    let b = Matrix2::from_columns(&[a2 - a1, a4 - a1]);
    let forward = AffineMap2::new(b, a1.coords).ok_or(ElementError::DegenerateTriangle { area })?;
    Ok(forward.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_is_identity() {
        let m = affine_to_reference(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        )
        .unwrap();
        assert_eq!(m.matrix, Matrix2::identity());
        assert_eq!(m.offset, Vec2::zeros());
    }

    #[test]
    fn uniform_scaling() {
        let m = affine_to_reference(
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 2.0),
        )
        .unwrap();
        assert_eq!(m.matrix, Matrix2::new(0.5, 0.0, 0.0, 0.5));
    }

    #[test]
    fn cut_point_ratio_from_the_map() {
        let m = affine_to_reference(
            Point::new(1.0, 1.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 3.0),
        )
        .unwrap();
        let a5 = m.apply(&Point::new(1.0, 2.0));
        assert!((a5.x - 0.0).abs() < 1e-15 && (a5.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_rejected() {
        let r = affine_to_reference(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
        );
        assert!(matches!(r, Err(ElementError::DegenerateTriangle { .. })));
    }

    #[test]
    fn compose_and_invert() {
        let a = AffineMap2::new(Matrix2::new(2.0, 1.0, 0.5, 3.0), Vec2::new(1.0, -2.0)).unwrap();
        let b = AffineMap2::new(Matrix2::new(-1.0, 0.2, 0.0, 0.7), Vec2::new(0.3, 0.4)).unwrap();
        let p = Point::new(0.25, -1.5);
        let ab = a.compose(&b);
        assert!((ab.apply(&p) - a.apply(&b.apply(&p))).norm() < 1e-14);
        assert!((a.inverse().apply(&a.apply(&p)) - p).norm() < 1e-14);
    }
}
