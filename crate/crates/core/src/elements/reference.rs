//! Reference geometry of the cut quadrilateral.
//!
//! In reference-triangle coordinates the quadrilateral is
//! `Q̃ = (0,0), (1,0), (1−s, s), (0,t)`. The midline map sends the midpoints of
//! its edges to `(0,−1), (1,0), (0,1), (−1,0)`, which yields the reference
//! quadrilateral `Q̂` with vertices `(−c1,−c2), (c1,−2+c2), (2−c1,2−c2), (−2+c1,c2)`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::Serialize;

use crate::error::ElementError;
use crate::geometry::{Point, Vec2};

use super::affine::AffineMap2;
use super::quadrature::TriangleRule;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadReferenceData {
    pub s: f64,
    pub t: f64,
    pub c1: f64,
    pub c2: f64,
    /// `|Q̃| = (s + t − st) / 2`.
    pub area_ref: f64,
    /// `l13(x̃, ỹ) = l13[0] + l13[1] x̃ + l13[2] ỹ`; vanishes on the midline `m̃1 m̃3`.
    pub l13: [f64; 3],
    /// Vanishes on the midline `m̃2 m̃4`.
    pub l24: [f64; 3],
    /// `Q̃` vertices in reference-triangle coordinates.
    pub ref_vertices: [Point; 4],
    pub hat_vertices: [Point; 4],
}

impl QuadReferenceData {
    /// Edge midpoints `m̃1..m̃4` of `Q̃`.
    pub fn ref_midpoints(&self) -> [Point; 4] {
        let v = &self.ref_vertices;
        std::array::from_fn(|i| nalgebra::center(&v[i], &v[(i + 1) % 4]))
    }
}

/// The midline map `(x̂, ŷ) = (l13(x̃, ỹ), l24(x̃, ỹ))` for cut ratios `0 < s ≤ t < 1`.
pub fn midline_map(s: f64, t: f64) -> Result<(QuadReferenceData, AffineMap2), ElementError> {
    if !(s > 0.0 && s <= t && t < 1.0) {
        return Err(ElementError::InvalidCutRatios { s, t });
    }
    let area = 0.5 * (s + t - s * t);
    let l13 = [-0.5 * (s + t) / area, (s + t) / area, s / area];
    let l24 = [-0.5 * t * (2.0 - s) / area, (t - s) / area, (2.0 - s) / area];
    let map = AffineMap2::new(
        Matrix2::new(l13[1], l13[2], l24[1], l24[2]),
        Vec2::new(l13[0], l24[0]),
    )
    .ok_or(ElementError::InvalidCutRatios { s, t })?;
    let c1 = (s + t) / (2.0 * area);
    let c2 = (2.0 - s) * t / (2.0 * area);
    let data = QuadReferenceData {
        s,
        t,
        c1,
        c2,
        area_ref: area,
        l13,
        l24,
        ref_vertices: [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0 - s, s),
            Point::new(0.0, t),
        ],
        hat_vertices: [
            Point::new(-c1, -c2),
            Point::new(c1, -2.0 + c2),
            Point::new(2.0 - c1, 2.0 - c2),
            Point::new(-2.0 + c1, c2),
        ],
    };
    Ok((data, map))
}

/// Edge means of `(1, x̂, ŷ, x̂²)` over the four edges of `Q̂`, in closed form.
pub fn quad_vandermonde(c1: f64) -> Matrix4<f64> {
    let side = (c1 - 2.0).powi(2) / 6.0 + c1 * c1 / 6.0 + 2.0 / 3.0;
    Matrix4::new(
        1.0, 0.0, -1.0, c1 * c1 / 3.0, //
        1.0, 1.0, 0.0, side, //
        1.0, 0.0, 1.0, (c1 - 2.0).powi(2) / 3.0, //
        1.0, -1.0, 0.0, side,
    )
}

fn monomials(p: &Point) -> Vector4<f64> {
    Vector4::new(1.0, p.x, p.y, p.x * p.x)
}

fn monomial_gradients(p: &Point) -> [Vec2; 4] {
    [
        Vec2::zeros(),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(2.0 * p.x, 0.0),
    ]
}

/// `L²` norms and `H¹` seminorms over `Q̂` of the four reference basis functions
/// dual to the edge means.
pub fn reference_basis_norms(s: f64, t: f64) -> Result<([f64; 4], [f64; 4]), ElementError> {
    let (data, _) = midline_map(s, t)?;
    let m = quad_vandermonde(data.c1);
    let inv = m
        .lu()
        .try_inverse()
        .ok_or(ElementError::IllConditionedBasis { condition: f64::INFINITY })?;
    let quad = TriangleRule::new(4)?.on_cell(&data.hat_vertices);
    let mut l2 = [0.0; 4];
    let mut h1 = [0.0; 4];
    for (p, w) in &quad {
        let mv = monomials(p);
        let mg = monomial_gradients(p);
        for j in 0..4 {
            let coeff = inv.column(j);
            let val = coeff.dot(&mv);
            let grad: Vec2 = (0..4).map(|k| mg[k] * coeff[k]).sum();
            l2[j] += w * val * val;
            h1[j] += w * grad.norm_squared();
        }
    }
    Ok((l2.map(f64::sqrt), h1.map(f64::sqrt)))
}

/// Norms of the partial derivatives of the pulled-back reference basis on `Q̃`:
/// returns `(‖∂x̃ ṽ_j‖, ‖∂ỹ ṽ_j‖, |φ̂_j|_{H¹(Q̂)})` for each basis function.
pub fn pullback_derivative_norms(s: f64, t: f64) -> Result<[(f64, f64, f64); 4], ElementError> {
    let (data, map) = midline_map(s, t)?;
    let inv = quad_vandermonde(data.c1)
        .lu()
        .try_inverse()
        .ok_or(ElementError::IllConditionedBasis { condition: f64::INFINITY })?;
    let (_, h1) = reference_basis_norms(s, t)?;
    let quad = TriangleRule::new(4)?.on_cell(&data.ref_vertices);
    let mut dx = [0.0; 4];
    let mut dy = [0.0; 4];
    for (p, w) in &quad {
        let hat = map.apply(p);
        let mg = monomial_gradients(&hat);
        for j in 0..4 {
            let coeff = inv.column(j);
            let ghat: Vec2 = (0..4).map(|k| mg[k] * coeff[k]).sum();
            let g = map.matrix.transpose() * ghat;
            dx[j] += w * g.x * g.x;
            dy[j] += w * g.y * g.y;
        }
    }
    Ok(std::array::from_fn(|j| (dx[j].sqrt(), dy[j].sqrt(), h1[j])))
}

/// Summary of the reference element for given cut ratios.
#[derive(Clone, Debug, Serialize)]
pub struct ElementReport {
    pub s: f64,
    pub t: f64,
    pub c1: f64,
    pub c2: f64,
    pub area_ref: f64,
    pub hat_vertices: [[f64; 2]; 4],
    pub vandermonde: [[f64; 4]; 4],
    pub determinant: f64,
    /// Row `j`: coefficients of basis function `j` over `(1, x̂, ŷ, x̂²)`.
    pub basis_coefficients: [[f64; 4]; 4],
    pub l2_norms: [f64; 4],
    pub h1_seminorms: [f64; 4],
    /// `‖∂x̃ ṽ‖ / (t^{1/2} |φ̂|_1)` per basis function.
    pub dx_scaling: [f64; 4],
    /// `‖∂ỹ ṽ‖ / (t^{-1/2} |φ̂|_1)` per basis function.
    pub dy_scaling: [f64; 4],
}

pub fn element_report(s: f64, t: f64) -> Result<ElementReport, ElementError> {
    let (data, _) = midline_map(s, t)?;
    let m = quad_vandermonde(data.c1);
    let inv = m
        .lu()
        .try_inverse()
        .ok_or(ElementError::IllConditionedBasis { condition: f64::INFINITY })?;
    let (l2, h1) = reference_basis_norms(s, t)?;
    let pull = pullback_derivative_norms(s, t)?;
    Ok(ElementReport {
        s,
        t,
        c1: data.c1,
        c2: data.c2,
        area_ref: data.area_ref,
        hat_vertices: data.hat_vertices.map(|p| [p.x, p.y]),
        vandermonde: std::array::from_fn(|i| std::array::from_fn(|k| m[(i, k)])),
        determinant: m.determinant(),
        basis_coefficients: std::array::from_fn(|j| std::array::from_fn(|k| inv[(k, j)])),
        l2_norms: l2,
        h1_seminorms: h1,
        dx_scaling: pull.map(|(dx, _, h)| dx / (t.sqrt() * h)),
        dy_scaling: pull.map(|(_, dy, h)| dy * t.sqrt() / h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::quadrature::gauss_legendre;

    /// Independent oracle: edge means by 10-point Gauss on the Q̂ edges.
    fn vandermonde_by_quadrature(hat: &[Point; 4]) -> Matrix4<f64> {
        let (xs, ws) = gauss_legendre(10);
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            let (a, b) = (hat[i], hat[(i + 1) % 4]);
            for (x, w) in xs.iter().zip(&ws) {
                let p = a + (b - a) * *x;
                let mv = monomials(&p);
                for k in 0..4 {
                    m[(i, k)] += w * mv[k];
                }
            }
        }
        m
    }

    #[test]
    fn fig3_values() {
        let (d, _) = midline_map(1.0 / 3.0, 0.5).unwrap();
        assert!((d.area_ref - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.c1 - 1.25).abs() < 1e-15);
        assert!((d.c2 - 1.25).abs() < 1e-15);
    }

    #[test]
    fn equal_ratios_give_unit_c2() {
        for s in [0.01, 0.3, 0.77] {
            let (d, _) = midline_map(s, s).unwrap();
            assert!((d.c2 - 1.0).abs() < 1e-14);
        }
        let (d, _) = midline_map(1e-9, 1e-9).unwrap();
        assert!((d.c1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn midpoints_map_to_unit_diamond() {
        let targets = [
            Point::new(0.0, -1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(-1.0, 0.0),
        ];
        for &(s, t) in &[(0.1, 0.2), (1.0 / 3.0, 0.5), (0.5, 0.99), (1e-4, 0.9)] {
            let (d, map) = midline_map(s, t).unwrap();
            for (m, target) in d.ref_midpoints().iter().zip(&targets) {
                assert!((map.apply(m) - target).norm() < 1e-10);
            }
            for (v, hat) in d.ref_vertices.iter().zip(&d.hat_vertices) {
                assert!((map.apply(v) - hat).norm() < 1e-10);
            }
            // Jacobian as stated for the midline map.
            let a = d.area_ref;
            let jac = Matrix2::new(t + s, s, t - s, 2.0 - s) / a;
            assert!((map.matrix - jac).norm() < 1e-12 * jac.norm());
            assert!(d.c1 >= 1.0 && d.c1 <= 2.0);
            assert!(d.c2 >= 0.5 && d.c2 <= 2.0);
        }
    }

    #[test]
    fn vandermonde_matches_quadrature_oracle() {
        for &(s, t) in &[(0.2, 0.2), (1.0 / 3.0, 0.5), (0.05, 0.95)] {
            let (d, _) = midline_map(s, t).unwrap();
            let closed = quad_vandermonde(d.c1);
            let oracle = vandermonde_by_quadrature(&d.hat_vertices);
            assert!((closed - oracle).abs().max() < 1e-13);
        }
    }

    #[test]
    fn determinant_is_eight_thirds() {
        for c1 in [1.0, 1.37, 2.0] {
            let det = quad_vandermonde(c1).determinant();
            assert!((det - 8.0 / 3.0).abs() < 1e-13, "c1 = {c1}: det = {det}");
        }
        let m = quad_vandermonde(2.0);
        assert!((m[(0, 3)] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(m[(2, 3)], 0.0);
    }

    #[test]
    fn invalid_ratios() {
        assert!(midline_map(0.0, 0.5).is_err());
        assert!(midline_map(0.6, 0.5).is_err());
        assert!(midline_map(0.2, 1.0).is_err());
    }

    #[test]
    fn basis_bounded_for_fig3() {
        let (l2, h1) = reference_basis_norms(1.0 / 3.0, 0.5).unwrap();
        for j in 0..4 {
            assert!(h1[j] <= 10.0 && l2[j] <= 10.0);
        }
    }
}
