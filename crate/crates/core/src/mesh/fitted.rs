use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::MeshError;
use crate::geometry::{centroid, signed_area, Point, Rect};
use crate::level_set::Region;

use super::background::BackgroundMesh;
use super::cut::{CutCase, CutElement, CutSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellKind {
    Triangle,
    Quad,
}

/// A cell of the fitted mesh. Vertices are counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub vertices: Vec<usize>,
    pub region: Region,
    /// Background triangle this cell came from.
    pub parent: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeClass {
    Interior,
    /// Segment of the discrete interface Γ_h.
    Interface,
    Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Sorted vertex pair.
    pub vertices: [usize; 2],
    pub class: EdgeClass,
    /// Incident cells; the second slot is empty exactly on the boundary.
    pub cells: [Option<usize>; 2],
}

/// Interface-fitted hybrid triangle/quadrilateral mesh.
#[derive(Clone, Debug)]
pub struct FittedMesh {
    pub domain: Rect,
    /// Background mesh size.
    pub h: f64,
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    /// `cell_edges[c][i]` is the edge from local vertex `i` to `i + 1`.
    pub cell_edges: Vec<Vec<usize>>,
    pub edges: Vec<Edge>,
    /// Cut record of every background triangle, indexed by `Cell::parent`.
    pub cuts: Vec<CutElement>,
    /// Closed loops of the discrete interface as vertex cycles.
    pub interface_loops: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub cells: usize,
    pub triangles: usize,
    pub quads: usize,
    pub edges: usize,
    pub interior_edges: usize,
    pub interface_edges: usize,
    pub boundary_edges: usize,
    pub case_i_elements: usize,
    pub case_ii_elements: usize,
    pub interface_loops: usize,
    pub min_s: Option<f64>,
    pub max_s: Option<f64>,
    pub min_t: Option<f64>,
    pub max_t: Option<f64>,
    pub min_quad_area: Option<f64>,
    pub region1_area: f64,
    pub region2_area: f64,
    pub total_area: f64,
}

impl FittedMesh {
    /// The background mesh itself, without any interface.
    pub fn from_background(bg: &BackgroundMesh) -> Self {
        let cells = bg
            .triangles
            .iter()
            .enumerate()
            .map(|(k, tri)| Cell {
                kind: CellKind::Triangle,
                vertices: tri.to_vec(),
                region: Region::One,
                parent: k,
            })
            .collect();
        let cuts = bg
            .triangles
            .iter()
            .enumerate()
            .map(|(k, tri)| CutElement {
                background_tri: k,
                case: CutCase::NotCut,
                s: 0.0,
                t: 0.0,
                labels: *tri,
                a3: None,
                a5: None,
                reflected: false,
            })
            .collect();
        let mut mesh = Self {
            domain: bg.domain,
            h: bg.h(),
            vertices: bg.vertices.clone(),
            cells,
            cell_edges: Vec::new(),
            edges: Vec::new(),
            cuts,
            interface_loops: Vec::new(),
        };
        mesh.build_edges(&HashSet::new());
        mesh
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        signed_area(&self.cell_points(c))
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        centroid(&self.cell_points(c))
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        (b - a).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.cells.len())
            .filter(|&c| self.cells[c].region == region)
            .map(|c| self.cell_area(c))
            .sum()
    }

    pub fn count_edges(&self, class: EdgeClass) -> usize {
        self.edges.iter().filter(|e| e.class == class).count()
    }

    /// `V − E + F`; equals 1 for a meshed simply connected rectangle.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    /// The cut record of a cell's parent.
    pub fn cut_of(&self, c: usize) -> &CutElement {
        &self.cuts[self.cells[c].parent]
    }

    pub fn stats(&self) -> MeshStats {
        let case_ii: Vec<&CutElement> =
            self.cuts.iter().filter(|c| c.case == CutCase::CaseII).collect();
        let fold = |vals: Vec<f64>, f: fn(f64, f64) -> f64| vals.into_iter().reduce(f);
        let quad_areas: Vec<f64> = (0..self.cells.len())
            .filter(|&c| self.cells[c].kind == CellKind::Quad)
            .map(|c| self.cell_area(c))
            .collect();
        MeshStats {
            vertices: self.vertices.len(),
            cells: self.cells.len(),
            triangles: self.cells.iter().filter(|c| c.kind == CellKind::Triangle).count(),
            quads: quad_areas.len(),
            edges: self.edges.len(),
            interior_edges: self.count_edges(EdgeClass::Interior),
            interface_edges: self.count_edges(EdgeClass::Interface),
            boundary_edges: self.count_edges(EdgeClass::Boundary),
            case_i_elements: self.cuts.iter().filter(|c| c.case == CutCase::CaseI).count(),
            case_ii_elements: case_ii.len(),
            interface_loops: self.interface_loops.len(),
            min_s: fold(case_ii.iter().map(|c| c.s).collect(), f64::min),
            max_s: fold(case_ii.iter().map(|c| c.s).collect(), f64::max),
            min_t: fold(case_ii.iter().map(|c| c.t).collect(), f64::min),
            max_t: fold(case_ii.iter().map(|c| c.t).collect(), f64::max),
            min_quad_area: fold(quad_areas, f64::min),
            region1_area: self.region_area(Region::One),
            region2_area: self.region_area(Region::Two),
            total_area: self.total_area(),
        }
    }

    fn build_edges(&mut self, interface: &HashSet<[usize; 2]>) {
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let n = cell.vertices.len();
            let mut ce = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cell.vertices[i], cell.vertices[(i + 1) % n]);
                let key = [a.min(b), a.max(b)];
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: key,
                        class: EdgeClass::Interior,
                        cells: [None, None],
                    });
                    edges.len() - 1
                });
                let slot = &mut edges[id].cells;
                if slot[0].is_none() {
                    slot[0] = Some(c);
                } else {
                    slot[1] = Some(c);
                }
                ce.push(id);
            }
            cell_edges.push(ce);
        }
        for e in edges.iter_mut() {
            e.class = if interface.contains(&e.vertices) {
                EdgeClass::Interface
            } else if e.cells[1].is_none() {
                EdgeClass::Boundary
            } else {
                EdgeClass::Interior
            };
        }
        self.edges = edges;
        self.cell_edges = cell_edges;
    }
}

/// Splits every interface element along the chord joining its cut points.
///
/// Case II parents become the triangle `(A5, A3, A4)` and the quadrilateral
/// `(A1, A2, A3, A5)`; Case I parents become two triangles. Region labels come
/// from the level-set sign at the parent vertices on each side of the chord.
pub fn build_fitted(
    bg: &BackgroundMesh,
    cuts: &CutSet,
) -> Result<FittedMesh, MeshError> {
    let nv = bg.vertices.len();
    let mut vertices = bg.vertices.clone();
    let mut edge_vertex: Vec<Option<usize>> = vec![None; bg.edges.len()];
    for (e, p) in cuts.edge_points.iter().enumerate() {
        if let Some(p) = p {
            edge_vertex[e] = Some(vertices.len());
            vertices.push(*p);
        }
    }
    debug_assert!(vertices.len() >= nv);

    let region_of_vertex = |v: usize| -> Region {
        Region::from_sign(cuts.vertex_values[v]).unwrap_or(Region::One)
    };

    let mut cells = Vec::new();
    let mut gamma: HashSet<[usize; 2]> = HashSet::new();
    let push = |cells: &mut Vec<Cell>, mut vs: Vec<usize>, kind, region, parent| {
        let pts: Vec<Point> = vs.iter().map(|&v| vertices[v]).collect();
        if signed_area(&pts) < 0.0 {
            vs.reverse();
            // keep the first vertex in place so labelled orders survive reversal
            vs.rotate_right(1);
        }
        cells.push(Cell {
            kind,
            vertices: vs,
            region,
            parent,
        });
    };
    let key = |a: usize, b: usize| [a.min(b), a.max(b)];

    for (k, cut) in cuts.elements.iter().enumerate() {
        let tri = bg.triangles[k];
        match cut.case {
            CutCase::NotCut => {
                let v = tri
                    .iter()
                    .copied()
                    .find(|&v| !cuts.on_interface[v])
                    .ok_or(MeshError::IsolatedVertexTouch {
                        triangle: k,
                        reason: "all vertices lie on the interface".into(),
                    })?;
                push(&mut cells, tri.to_vec(), CellKind::Triangle, region_of_vertex(v), k);
            }
            CutCase::CaseI => {
                let [a1, a2, a4] = cut.labels;
                let a5 = edge_vertex[cut.a5.unwrap().edge].unwrap();
                push(&mut cells, vec![a1, a2, a5], CellKind::Triangle, region_of_vertex(a1), k);
                push(&mut cells, vec![a5, a2, a4], CellKind::Triangle, region_of_vertex(a4), k);
                gamma.insert(key(a2, a5));
            }
            CutCase::CaseII => {
                let [a1, a2, a4] = cut.labels;
                let a3 = edge_vertex[cut.a3.unwrap().edge].unwrap();
                let a5 = edge_vertex[cut.a5.unwrap().edge].unwrap();
                push(&mut cells, vec![a5, a3, a4], CellKind::Triangle, region_of_vertex(a4), k);
                push(&mut cells, vec![a1, a2, a3, a5], CellKind::Quad, region_of_vertex(a1), k);
                gamma.insert(key(a3, a5));
            }
        }
    }
    for &e in &cuts.interface_edges {
        let [a, b] = bg.edges[e];
        gamma.insert(key(a, b));
    }

    let mut mesh = FittedMesh {
        domain: bg.domain,
        h: bg.h(),
        vertices,
        cells,
        cell_edges: Vec::new(),
        edges: Vec::new(),
        cuts: cuts.elements.clone(),
        interface_loops: Vec::new(),
    };
    mesh.build_edges(&gamma);
    mesh.interface_loops = trace_loops(&mesh, &gamma)?;
    Ok(mesh)
}

fn trace_loops(mesh: &FittedMesh, gamma: &HashSet<[usize; 2]>) -> Result<Vec<Vec<usize>>, MeshError> {
    let tol = 1e-12 * mesh.h;
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut segs: Vec<[usize; 2]> = gamma.iter().copied().collect();
    segs.sort_unstable();
    for [a, b] in &segs {
        adj.entry(*a).or_default().push(*b);
        adj.entry(*b).or_default().push(*a);
    }
    let mut verts: Vec<usize> = adj.keys().copied().collect();
    verts.sort_unstable();
    for &v in &verts {
        let p = mesh.vertices[v];
        if mesh.domain.on_boundary(&p, tol) {
            return Err(MeshError::NonClosedInterfacePolyline(format!(
                "interface reaches the domain boundary at ({}, {})",
                p.x, p.y
            )));
        }
        let deg = adj[&v].len();
        if deg != 2 {
            return Err(MeshError::NonClosedInterfacePolyline(format!(
                "vertex ({}, {}) has {deg} interface segments",
                p.x, p.y
            )));
        }
    }
    let mut visited: HashSet<usize> = HashSet::new();
    let mut loops = Vec::new();
    for &start in &verts {
        if visited.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        visited.insert(start);
        let mut prev = start;
        let mut cur = adj[&start][0];
        while cur != start {
            cycle.push(cur);
            visited.insert(cur);
            let next = adj[&cur].iter().copied().find(|&w| w != prev).unwrap_or(prev);
            prev = cur;
            cur = next;
        }
        loops.push(cycle);
    }
    Ok(loops)
}
