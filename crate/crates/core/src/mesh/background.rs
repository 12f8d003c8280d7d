use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::MeshError;
use crate::geometry::{Point, Rect};

/// Which diagonal splits each grid square.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagonal {
    /// `(x, y) – (x + h, y + h)`.
    #[default]
    LowerLeftUpperRight,
    /// `(x + h, y) – (x, y + h)`.
    UpperLeftLowerRight,
}

/// Structured, interface-unfitted triangulation of a rectangle.
#[derive(Clone, Debug)]
pub struct BackgroundMesh {
    pub domain: Rect,
    pub nx: usize,
    pub ny: usize,
    pub diagonal: Diagonal,
    /// Row-major: vertex `(i, j)` has index `j * (nx + 1) + i`.
    pub vertices: Vec<Point>,
    /// Counterclockwise; per cell the lower triangle comes first.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted vertex pairs, numbered in order of first appearance.
    pub edges: Vec<[usize; 2]>,
    /// `triangle_edges[k][i]` is the edge between local vertices `i` and `i + 1`.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Triangles adjacent to each edge (second slot empty on the boundary).
    pub edge_triangles: Vec<[Option<usize>; 2]>,
}

impl BackgroundMesh {
    /// `n × n` square cells, each split along the lower-left → upper-right diagonal.
    pub fn build(domain: Rect, n: usize) -> Result<Self, MeshError> {
        Self::build_with(domain, n, n, Diagonal::default())
    }

    pub fn build_with(
        domain: Rect,
        nx: usize,
        ny: usize,
        diagonal: Diagonal,
    ) -> Result<Self, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::TooCoarse(nx.min(ny)));
        }
        if !(domain.width() > 0.0 && domain.height() > 0.0) {
            return Err(MeshError::InvalidDomain(format!("{domain:?}")));
        }
        let hx = domain.width() / nx as f64;
        let hy = domain.height() / ny as f64;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            // Snap the last row/column onto the exact boundary coordinate.
            let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * hy };
            for i in 0..=nx {
                let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * hx };
                vertices.push(Point::new(x, y));
            }
        }
        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                match diagonal {
                    Diagonal::LowerLeftUpperRight => {
                        triangles.push([v00, v10, v11]);
                        triangles.push([v00, v11, v01]);
                    }
                    Diagonal::UpperLeftLowerRight => {
                        triangles.push([v00, v10, v01]);
                        triangles.push([v10, v11, v01]);
                    }
                }
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<[Option<usize>; 2]> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (k, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for l in 0..3 {
                let (a, b) = (tri[l], tri[(l + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_triangles.push([None, None]);
                    edges.len() - 1
                });
                let slot = &mut edge_triangles[id];
                if slot[0].is_none() {
                    slot[0] = Some(k);
                } else {
                    slot[1] = Some(k);
                }
                te[l] = id;
            }
            triangle_edges.push(te);
        }

        Ok(Self {
            domain,
            nx,
            ny,
            diagonal,
            vertices,
            triangles,
            edges,
            triangle_edges,
            edge_triangles,
        })
    }

    /// Largest cell side.
    pub fn h(&self) -> f64 {
        (self.domain.width() / self.nx as f64).max(self.domain.height() / self.ny as f64)
    }

    pub fn triangle_points(&self, k: usize) -> [Point; 3] {
        self.triangles[k].map(|v| self.vertices[v])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;

    #[test]
    fn single_cell_split() {
        let bg = BackgroundMesh::build(Rect::new(0.0, 1.0, 0.0, 1.0), 1).unwrap();
        assert_eq!(bg.triangles.len(), 2);
        let t0 = bg.triangle_points(0);
        let t1 = bg.triangle_points(1);
        assert_eq!(t0, [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)]);
        assert_eq!(t1, [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]);
    }

    #[test]
    fn counts() {
        let bg = BackgroundMesh::build(Rect::new(-1.0, 1.0, -1.0, 1.0), 16).unwrap();
        assert_eq!(bg.triangles.len(), 512);
        assert_eq!(bg.vertices.len(), 289);
        let bg8 = BackgroundMesh::build(Rect::new(0.0, 1.0, 0.0, 1.0), 8).unwrap();
        assert_eq!(bg8.triangles.len(), 128);
        // E = 3n² + 2n for the diagonal-split grid
        assert_eq!(bg8.edges.len(), 3 * 64 + 16);
    }

    #[test]
    fn triangles_are_ccw_for_both_diagonals() {
        for diag in [Diagonal::LowerLeftUpperRight, Diagonal::UpperLeftLowerRight] {
            let bg = BackgroundMesh::build_with(Rect::new(0.0, 2.0, 0.0, 1.0), 4, 3, diag).unwrap();
            let total: f64 = (0..bg.triangles.len())
                .map(|k| {
                    let a = signed_area(&bg.triangle_points(k));
                    assert!(a > 0.0);
                    a
                })
                .sum();
            assert!((total - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(BackgroundMesh::build(Rect::new(0.0, 1.0, 0.0, 1.0), 0).is_err());
    }
}
