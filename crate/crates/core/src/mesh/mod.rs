//! Background mesh, interface cutting and the fitted hybrid mesh.

mod background;
mod cut;
mod fitted;

pub use background::{BackgroundMesh, Diagonal};
pub use cut::{classify_and_cut, CutCase, CutElement, CutPoint, CutSet, DEFAULT_SNAP_TOL};
pub use fitted::{build_fitted, Cell, CellKind, Edge, EdgeClass, FittedMesh, MeshStats};

use crate::error::MeshError;
use crate::geometry::Rect;
use crate::level_set::LevelSet;

/// Background mesh → cut classification → fitted mesh, in one call.
pub fn build_interface_mesh(
    domain: Rect,
    n: usize,
    level_set: Option<&LevelSet>,
    diagonal: Diagonal,
    snap_tol: f64,
) -> Result<FittedMesh, MeshError> {
    let bg = BackgroundMesh::build_with(domain, n, n, diagonal)?;
    match level_set {
        Some(ls) => {
            let cuts = classify_and_cut(&bg, ls, snap_tol)?;
            build_fitted(&bg, &cuts)
        }
        None => Ok(FittedMesh::from_background(&bg)),
    }
}
