//! Classification of background triangles against the interface.
//!
//! Each background edge is intersected once, in its canonical orientation, so
//! both neighbours of an edge see bit-identical cut points.

use serde::Serialize;

use crate::error::MeshError;
use crate::geometry::{Point, Segment};
use crate::level_set::LevelSet;

use super::background::BackgroundMesh;

/// Intersections closer than `snap_tol · h` to a vertex are moved onto it.
pub const DEFAULT_SNAP_TOL: f64 = 1e-8;
const ROOT_TOL: f64 = 1e-12;
/// A crossing this close to an already snapped vertex belongs to the same
/// passage of the interface and is dropped as well.
const SECONDARY_SNAP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CutCase {
    NotCut,
    /// The interface runs through one vertex and the opposite edge.
    CaseI,
    /// The interface crosses the interiors of two edges.
    CaseII,
}

/// Intersection point on a background edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutPoint {
    pub edge: usize,
    pub point: Point,
}

/// Per-background-triangle cut record.
///
/// `labels` holds the parent vertex indices playing the roles `A1, A2, A4`
/// of the cut-element construction: `A4` is the apex shared by both cut edges,
/// `A5` lies on `A1A4` and `A3` on `A2A4`. In Case I, `A2` is the vertex on the
/// interface (so `A3 = A2` and `s = 0`). For uncut triangles the labels are the
/// parent's own vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct CutElement {
    pub background_tri: usize,
    pub case: CutCase,
    pub s: f64,
    pub t: f64,
    pub labels: [usize; 3],
    pub a3: Option<CutPoint>,
    pub a5: Option<CutPoint>,
    /// True when `(A1, A2, A4)` is clockwise, i.e. a reflection was needed to get `s ≤ t`.
    pub reflected: bool,
}

impl CutElement {
    pub fn cut_points(&self) -> Vec<Point> {
        self.a3.iter().chain(self.a5.iter()).map(|c| c.point).collect()
    }
}

/// Output of [`classify_and_cut`].
#[derive(Clone, Debug)]
pub struct CutSet {
    pub elements: Vec<CutElement>,
    /// Level-set value at every background vertex.
    pub vertex_values: Vec<f64>,
    /// Background vertices on the discrete interface (exact zeros or snapped).
    pub on_interface: Vec<bool>,
    /// Interior intersection point of each background edge, if any.
    pub edge_points: Vec<Option<Point>>,
    /// Background edges whose endpoints are both on the interface and which
    /// separate the two subdomains; they become segments of the discrete interface.
    pub interface_edges: Vec<usize>,
    /// Edges crossed twice between same-sign endpoints. The arc dips across the
    /// edge by `O(h²)` and is left out of the discrete interface.
    pub skipped_edges: Vec<usize>,
}

impl CutSet {
    pub fn interface_elements(&self) -> impl Iterator<Item = &CutElement> {
        self.elements.iter().filter(|c| c.case != CutCase::NotCut)
    }
}

pub fn classify_and_cut(
    bg: &BackgroundMesh,
    ls: &LevelSet,
    snap_tol: f64,
) -> Result<CutSet, MeshError> {
    let h = bg.h();
    let vertex_values: Vec<f64> = bg.vertices.iter().map(|p| ls.eval(p)).collect();
    let mut on_interface: Vec<bool> = vertex_values.iter().map(|&v| v == 0.0).collect();

    // Interior roots per edge, after snapping near-vertex roots onto the vertex.
    let mut interior: Vec<Option<(f64, Point)>> = vec![None; bg.edges.len()];
    let mut skipped_edges = Vec::new();
    for (e, &[va, vb]) in bg.edges.iter().enumerate() {
        let seg = Segment::new(bg.vertices[va], bg.vertices[vb]);
        let len = seg.length();
        let roots = ls.roots_on_segment(&seg, ROOT_TOL)?;
        let mut kept = Vec::new();
        for r in roots {
            if r.lambda * len <= snap_tol * h {
                on_interface[va] = true;
            } else if (1.0 - r.lambda) * len <= snap_tol * h {
                on_interface[vb] = true;
            } else {
                kept.push((r.lambda, r.point));
            }
        }
        if kept.len() == 2
            && !on_interface[va]
            && !on_interface[vb]
            && vertex_values[va].signum() == vertex_values[vb].signum()
        {
            log::debug!("edge {e} is crossed twice between same-sign vertices; ignoring the dip");
            skipped_edges.push(e);
            continue;
        }
        if kept.len() > 1 {
            return Err(MeshError::DoubleEdgeCut { edge: e });
        }
        interior[e] = kept.pop();
    }
    for (e, &[va, vb]) in bg.edges.iter().enumerate() {
        if let Some((lambda, _)) = interior[e] {
            let len = (bg.vertices[vb] - bg.vertices[va]).norm();
            let near_a = on_interface[va] && lambda * len <= SECONDARY_SNAP * h;
            let near_b = on_interface[vb] && (1.0 - lambda) * len <= SECONDARY_SNAP * h;
            if near_a || near_b {
                interior[e] = None;
            } else if on_interface[va] || on_interface[vb] {
                return Err(MeshError::DoubleEdgeCut { edge: e });
            }
        }
    }
    let edge_points: Vec<Option<Point>> = interior.iter().map(|r| r.map(|(_, p)| p)).collect();

    let mut elements = Vec::with_capacity(bg.triangles.len());
    for (k, tri) in bg.triangles.iter().enumerate() {
        let te = bg.triangle_edges[k];
        let zero: Vec<usize> = (0..3).filter(|&l| on_interface[tri[l]]).collect();
        let cut: Vec<usize> = (0..3).filter(|&l| edge_points[te[l]].is_some()).collect();
        let sign = |l: usize| vertex_values[tri[l]].signum();
        let elem = match (zero.len(), cut.len()) {
            (_, 3) => return Err(MeshError::ThreeEdgeCut { triangle: k }),
            (0, 0) | (1, 0) | (2, 0) => {
                let signs: Vec<f64> = (0..3).filter(|l| !zero.contains(l)).map(sign).collect();
                if signs.windows(2).any(|w| w[0] != w[1]) {
                    return Err(MeshError::IsolatedVertexTouch {
                        triangle: k,
                        reason: "vertex signs change without an edge crossing".into(),
                    });
                }
                CutElement {
                    background_tri: k,
                    case: CutCase::NotCut,
                    s: 0.0,
                    t: 0.0,
                    labels: *tri,
                    a3: None,
                    a5: None,
                    reflected: false,
                }
            }
            (1, 1) => {
                // Local edge l joins vertices l and l+1; the opposite vertex is l+2.
                let l = cut[0];
                let apex_local = (l + 2) % 3;
                if zero[0] != apex_local {
                    return Err(MeshError::IsolatedVertexTouch {
                        triangle: k,
                        reason: "interface vertex is an endpoint of the crossed edge".into(),
                    });
                }
                let (a1, a4) = (tri[(l + 1) % 3], tri[l]);
                let a2 = tri[apex_local];
                let e = te[l];
                let p = edge_points[e].unwrap();
                let t = (p - bg.vertices[a1]).norm() / (bg.vertices[a4] - bg.vertices[a1]).norm();
                CutElement {
                    background_tri: k,
                    case: CutCase::CaseI,
                    s: 0.0,
                    t,
                    labels: [a1, a2, a4],
                    a3: None,
                    a5: Some(CutPoint { edge: e, point: p }),
                    reflected: is_clockwise(bg, [a1, a2, a4]),
                }
            }
            (0, 2) => {
                let (la, lb) = (cut[0], cut[1]);
                // The shared vertex of local edges la and lb is the apex A4.
                let apex_local = if (la + 1) % 3 == lb {
                    lb
                } else {
                    la
                };
                let apex = tri[apex_local];
                let other_edge = |l: usize| if tri[l] == apex { tri[(l + 1) % 3] } else { tri[l] };
                let (pa, pb) = (other_edge(la), other_edge(lb));
                let (ea, eb) = (te[la], te[lb]);
                let xa = edge_points[ea].unwrap();
                let xb = edge_points[eb].unwrap();
                let ratio = |v: usize, x: Point| {
                    (x - bg.vertices[v]).norm() / (bg.vertices[apex] - bg.vertices[v]).norm()
                };
                let (ra, rb) = (ratio(pa, xa), ratio(pb, xb));
                // A1 carries the larger ratio t, A2 the smaller ratio s.
                let (a1, a2, t, s, a5, a3) = if ra >= rb {
                    (pa, pb, ra, rb, (ea, xa), (eb, xb))
                } else {
                    (pb, pa, rb, ra, (eb, xb), (ea, xa))
                };
                CutElement {
                    background_tri: k,
                    case: CutCase::CaseII,
                    s,
                    t,
                    labels: [a1, a2, apex],
                    a3: Some(CutPoint { edge: a3.0, point: a3.1 }),
                    a5: Some(CutPoint { edge: a5.0, point: a5.1 }),
                    reflected: is_clockwise(bg, [a1, a2, apex]),
                }
            }
            (z, c) => {
                return Err(MeshError::IsolatedVertexTouch {
                    triangle: k,
                    reason: format!(
                        "{z} vertices on the interface with {c} crossed edges violates the two-point assumption"
                    ),
                })
            }
        };
        elements.push(elem);
    }

    let mut interface_edges = Vec::new();
    for (e, &[va, vb]) in bg.edges.iter().enumerate() {
        if !(on_interface[va] && on_interface[vb]) {
            continue;
        }
        let third = |k: usize| {
            let tri = bg.triangles[k];
            *tri.iter().find(|&&v| v != va && v != vb).unwrap()
        };
        match bg.edge_triangles[e] {
            [Some(k0), Some(k1)] => {
                let (w0, w1) = (third(k0), third(k1));
                if on_interface[w0] || on_interface[w1] {
                    return Err(MeshError::IsolatedVertexTouch {
                        triangle: if on_interface[w0] { k0 } else { k1 },
                        reason: "all three vertices lie on the interface".into(),
                    });
                }
                if vertex_values[w0].signum() != vertex_values[w1].signum() {
                    interface_edges.push(e);
                }
            }
            _ => interface_edges.push(e),
        }
    }

    Ok(CutSet {
        elements,
        vertex_values,
        on_interface,
        edge_points,
        interface_edges,
        skipped_edges,
    })
}

fn is_clockwise(bg: &BackgroundMesh, v: [usize; 3]) -> bool {
    let [a, b, c] = v.map(|i| bg.vertices[i]);
    crate::geometry::cross(&(b - a), &(c - a)) < 0.0
}
