//! Local nodal bases dual to the edge means of a cell.

use nalgebra::{Matrix4, Vector4};

use crate::error::ElementError;
use crate::geometry::{Point, Vec2};
use crate::mesh::{CellKind, FittedMesh};

use super::affine::{affine_to_reference, AffineMap2};
use super::quadrature::gauss_legendre;
use super::reference::midline_map;

/// Vandermonde matrices with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    CrouzeixRaviart,
    RotatedQ1,
}

/// Basis functions `φ_j(x) = Σ_k coeffs[j][k] m_k(map(x))` with monomials
/// `m = (1, ξ, η, ξ²)`. Function `j` belongs to local edge `j` of the cell.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub kind: BasisKind,
    pub map: AffineMap2,
    pub coeffs: Vec<[f64; 4]>,
}

impl LocalBasis {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn value(&self, j: usize, p: &Point) -> f64 {
        let q = self.map.apply(p);
        let c = &self.coeffs[j];
        c[0] + c[1] * q.x + c[2] * q.y + c[3] * q.x * q.x
    }

    pub fn gradient(&self, j: usize, p: &Point) -> Vec2 {
        let q = self.map.apply(p);
        let c = &self.coeffs[j];
        let g = Vec2::new(c[1] + 2.0 * c[3] * q.x, c[2]);
        self.map.matrix.transpose() * g
    }

    pub fn values(&self, p: &Point) -> Vec<f64> {
        (0..self.len()).map(|j| self.value(j, p)).collect()
    }

    pub fn gradients(&self, p: &Point) -> Vec<Vec2> {
        (0..self.len()).map(|j| self.gradient(j, p)).collect()
    }

    /// `table[i][j]` is the mean of `φ_j` over `edges[i]`, by `n`-point Gauss.
    pub fn edge_means(&self, edges: &[[Point; 2]], n: usize) -> Vec<Vec<f64>> {
        let (xs, ws) = gauss_legendre(n);
        edges
            .iter()
            .map(|[a, b]| {
                (0..self.len())
                    .map(|j| {
                        xs.iter()
                            .zip(&ws)
                            .map(|(x, w)| w * self.value(j, &(a + (b - a) * *x)))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Crouzeix–Raviart basis on a counterclockwise triangle.
pub fn build_cr_basis(tri: &[Point]) -> Result<LocalBasis, ElementError> {
    let map = affine_to_reference(tri[0], tri[1], tri[2])?;
    // φ_j = 1 − 2 λ_{j+2} with λ = (1 − ξ − η, ξ, η)
    let coeffs = vec![[1.0, 0.0, -2.0, 0.0], [-1.0, 2.0, 2.0, 0.0], [1.0, -2.0, 0.0, 0.0]];
    Ok(LocalBasis {
        kind: BasisKind::CrouzeixRaviart,
        map,
        coeffs,
    })
}

/// Rotated-Q1-type basis on a Case II quadrilateral.
///
/// `quad` lists the cell vertices in mesh order; `a1, a2, a4` are the labelled
/// parent vertices and `(s, t)` the cut ratios. The shape functions are taken in
/// the midline coordinates, where the edge-mean Vandermonde stays well scaled
/// however thin the cell is.
pub fn build_quad_basis(
    quad: &[Point],
    a1: Point,
    a2: Point,
    a4: Point,
    s: f64,
    t: f64,
) -> Result<LocalBasis, ElementError> {
    let to_ref = affine_to_reference(a1, a2, a4)?;
    let (_, midline) = midline_map(s, t)?;
    let map = midline.compose(&to_ref);

    let (xs, ws) = gauss_legendre(2);
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        let a = map.apply(&quad[i]);
        let b = map.apply(&quad[(i + 1) % 4]);
        for (x, w) in xs.iter().zip(&ws) {
            let p = a + (b - a) * *x;
            let row = Vector4::new(1.0, p.x, p.y, p.x * p.x);
            for k in 0..4 {
                m[(i, k)] += w * row[k];
            }
        }
    }
    let sv: Vector4<f64> = m.singular_values();
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(ElementError::IllConditionedBasis { condition });
    }
    let inv = m
        .lu()
        .try_inverse()
        .ok_or(ElementError::IllConditionedBasis { condition: f64::INFINITY })?;
    let coeffs = (0..4)
        .map(|j| std::array::from_fn(|k| inv[(k, j)]))
        .collect();
    Ok(LocalBasis {
        kind: BasisKind::RotatedQ1,
        map,
        coeffs,
    })
}

/// The local basis of cell `c`, ordered like `mesh.cell_edges[c]`.
pub fn build_basis_for_cell(mesh: &FittedMesh, c: usize) -> Result<LocalBasis, ElementError> {
    let pts = mesh.cell_points(c);
    match mesh.cells[c].kind {
        CellKind::Triangle => build_cr_basis(&pts),
        CellKind::Quad => {
            let cut = mesh.cut_of(c);
            let [a1, a2, a4] = cut.labels.map(|v| mesh.vertices[v]);
            build_quad_basis(&pts, a1, a2, a4, cut.s, cut.t)
        }
    }
}
