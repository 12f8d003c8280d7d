//! Local shape functions and quadrature.
//!
//! Triangles carry the Crouzeix–Raviart element. Quadrilaterals from Case II
//! cuts carry a rotated-Q1-type element whose shape space is `P1 ⊕ {x̂²}` on a
//! reference quadrilateral reached through the chain
//! physical cell → reference triangle → midline coordinates.

mod affine;
mod basis;
mod quadrature;
mod reference;

pub use affine::{affine_to_reference, AffineMap2};
pub use basis::{build_basis_for_cell, build_cr_basis, build_quad_basis, BasisKind, LocalBasis, MAX_CONDITION};
pub use quadrature::{cell_quadrature, gauss_legendre, TriangleRule, MAX_DEGREE};
pub use reference::{
    element_report, midline_map, pullback_derivative_norms, quad_vandermonde, reference_basis_norms, ElementReport,
    QuadReferenceData,
};
