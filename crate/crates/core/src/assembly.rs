//! Degrees of freedom and assembly of the discrete Stokes saddle-point system.
//!
//! Unknown layout of the full system: `[u_x (free edges), u_y (free edges), p (cells), λ]`,
//! where `λ` is the multiplier enforcing `Σ_K |K| p_K = 0`.

use rayon::prelude::*;

use crate::elements::{build_basis_for_cell, cell_quadrature, gauss_legendre, LocalBasis};
use crate::error::{AssemblyError, ElementError};
use crate::geometry::{outward_normal, Point, Vec2};
use crate::level_set::Region;
use crate::mesh::{EdgeClass, FittedMesh};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Default quadrature degree for the load vector.
pub const DEFAULT_RHS_DEGREE: usize = 8;

/// Edge-indexed velocity DOFs (one per component) and cell-indexed pressures.
#[derive(Clone, Debug)]
pub struct DofMap {
    /// Free scalar index of each edge; `None` on the Dirichlet boundary.
    pub free_index: Vec<Option<usize>>,
    pub free_edges: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    pub n_pressure: usize,
}

impl DofMap {
    pub fn new(mesh: &FittedMesh) -> Self {
        let mut free_index = vec![None; mesh.edges.len()];
        let mut free_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.class == EdgeClass::Boundary {
                boundary_edges.push(e);
            } else {
                free_index[e] = Some(free_edges.len());
                free_edges.push(e);
            }
        }
        Self {
            free_index,
            free_edges,
            boundary_edges,
            n_pressure: mesh.cells.len(),
        }
    }

    pub fn n_free(&self) -> usize {
        self.free_edges.len()
    }

    pub fn n_edges(&self) -> usize {
        self.free_index.len()
    }

    /// Size of the full system including the multiplier.
    pub fn system_size(&self) -> usize {
        2 * self.n_free() + self.n_pressure + 1
    }
}

/// Local bases of all cells, in cell order.
pub fn build_bases(mesh: &FittedMesh) -> Result<Vec<LocalBasis>, ElementError> {
    (0..mesh.cells.len())
        .into_par_iter()
        .map(|c| build_basis_for_cell(mesh, c))
        .collect()
}

/// Edge mean of `g` over the segment `[a, b]` by 4-point Gauss.
pub fn edge_mean(g: &(dyn Fn(&Point) -> Vec2 + Sync), a: Point, b: Point) -> Vec2 {
    let (xs, ws) = gauss_legendre(4);
    xs.iter().zip(&ws).map(|(x, w)| g(&(a + (b - a) * *x)) * *w).sum()
}

#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub dofmap: DofMap,
    /// `Σ_K μ_K ∫_K ∇φ_i·∇φ_j` on free DOFs; shared by both components.
    pub a: CsrMatrix,
    /// `(B_x)_{K,i} = −∫_K ∂_x φ_i` on free DOFs, likewise `b_y`.
    pub b_x: CsrMatrix,
    pub b_y: CsrMatrix,
    /// Cell areas; the multiplier row.
    pub c: Vec<f64>,
    /// Viscosity of each cell.
    pub mu_cell: Vec<f64>,
    /// Momentum right-hand side after Dirichlet lifting, per component.
    pub rhs_u: [Vec<f64>; 2],
    /// Continuity right-hand side from Dirichlet lifting.
    pub rhs_p: Vec<f64>,
    /// Edge-mean values on every edge: Dirichlet data on the boundary, zero elsewhere.
    pub dirichlet: Vec<Vec2>,
}

struct LocalContribution {
    stiffness: Vec<Vec<f64>>,
    div: Vec<Vec2>,
    load: Vec<Vec2>,
}

/// Assembles the Stokes system for piecewise viscosity `(μ1, μ2)` on the fitted regions.
pub fn assemble(
    mesh: &FittedMesh,
    dofmap: &DofMap,
    bases: &[LocalBasis],
    mu: (f64, f64),
    f: &(dyn Fn(&Point) -> Vec2 + Sync),
    g_dirichlet: &(dyn Fn(&Point) -> Vec2 + Sync),
    rhs_degree: usize,
) -> Result<SaddleSystem, AssemblyError> {
    let (mu1, mu2) = mu;
    if !(mu1 > 0.0 && mu2 > 0.0) {
        return Err(AssemblyError::NonPositiveViscosity { mu1, mu2 });
    }
    let local: Vec<LocalContribution> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|c| {
            let pts = mesh.cell_points(c);
            let basis = &bases[c];
            let n = basis.len();
            let mu_k = match mesh.cells[c].region {
                Region::One => mu1,
                Region::Two => mu2,
            };
            let mut stiffness = vec![vec![0.0; n]; n];
            for (p, w) in cell_quadrature(&pts, 2)? {
                let g = basis.gradients(&p);
                for i in 0..n {
                    for j in 0..n {
                        stiffness[i][j] += mu_k * w * g[i].dot(&g[j]);
                    }
                }
            }
            let mut div = vec![Vec2::zeros(); n];
            for (p, w) in cell_quadrature(&pts, 1)? {
                for (d, g) in div.iter_mut().zip(basis.gradients(&p)) {
                    *d -= g * w;
                }
            }
            let mut load = vec![Vec2::zeros(); n];
            for (p, w) in cell_quadrature(&pts, rhs_degree)? {
                let fp = f(&p) * w;
                for (l, v) in load.iter_mut().zip(basis.values(&p)) {
                    *l += fp * v;
                }
            }
            Ok(LocalContribution {
                stiffness,
                div,
                load,
            })
        })
        .collect::<Result<_, ElementError>>()?;

    let mut dirichlet = vec![Vec2::zeros(); mesh.edges.len()];
    for &e in &dofmap.boundary_edges {
        let [a, b] = mesh.edge_points(e);
        dirichlet[e] = edge_mean(g_dirichlet, a, b);
    }

    let nf = dofmap.n_free();
    let nnz: usize = local.iter().map(|l| l.load.len().pow(2)).sum();
    let mut a = TripletBuilder::with_capacity(nf, nf, nnz);
    let mut b_x = TripletBuilder::new(mesh.cells.len(), nf);
    let mut b_y = TripletBuilder::new(mesh.cells.len(), nf);
    let mut rhs_u = [vec![0.0; nf], vec![0.0; nf]];
    let mut rhs_p = vec![0.0; mesh.cells.len()];
    for (c, lc) in local.iter().enumerate() {
        let edges = &mesh.cell_edges[c];
        for (i, &ei) in edges.iter().enumerate() {
            match dofmap.free_index[ei] {
                Some(fi) => {
                    rhs_u[0][fi] += lc.load[i].x;
                    rhs_u[1][fi] += lc.load[i].y;
                    for (j, &ej) in edges.iter().enumerate() {
                        match dofmap.free_index[ej] {
                            Some(fj) => a.push(fi, fj, lc.stiffness[i][j]),
                            None => {
                                rhs_u[0][fi] -= lc.stiffness[i][j] * dirichlet[ej].x;
                                rhs_u[1][fi] -= lc.stiffness[i][j] * dirichlet[ej].y;
                            }
                        }
                    }
                    b_x.push(c, fi, lc.div[i].x);
                    b_y.push(c, fi, lc.div[i].y);
                }
                None => rhs_p[c] -= lc.div[i].dot(&dirichlet[ei]),
            }
        }
    }
    let c = (0..mesh.cells.len()).map(|k| mesh.cell_area(k)).collect();
    let mu_cell = mesh
        .cells
        .iter()
        .map(|cell| match cell.region {
            Region::One => mu1,
            Region::Two => mu2,
        })
        .collect();
    Ok(SaddleSystem {
        dofmap: dofmap.clone(),
        a: a.build(),
        b_x: b_x.build(),
        b_y: b_y.build(),
        c,
        mu_cell,
        rhs_u,
        rhs_p,
        dirichlet,
    })
}

/// Discrete velocity (edge means, all edges) and pressure (cell values).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSolution {
    pub velocity: Vec<Vec2>,
    pub pressure: Vec<f64>,
    pub multiplier: f64,
}

impl DiscreteSolution {
    /// Value of the discrete velocity at `p` in cell `c`.
    pub fn velocity_at(&self, mesh: &FittedMesh, basis: &LocalBasis, c: usize, p: &Point) -> Vec2 {
        mesh.cell_edges[c]
            .iter()
            .zip(basis.values(p))
            .map(|(&e, v)| self.velocity[e] * v)
            .sum()
    }

    /// Rows are components: `grad[(i, j)] = ∂u_i/∂x_j`.
    pub fn velocity_gradient_at(
        &self,
        mesh: &FittedMesh,
        basis: &LocalBasis,
        c: usize,
        p: &Point,
    ) -> nalgebra::Matrix2<f64> {
        mesh.cell_edges[c]
            .iter()
            .zip(basis.gradients(p))
            .map(|(&e, g)| self.velocity[e] * g.transpose())
            .sum()
    }
}

impl SaddleSystem {
    pub fn size(&self) -> usize {
        self.dofmap.system_size()
    }

    /// The symmetric indefinite matrix `[[A, 0, B_xᵀ, 0], [0, A, B_yᵀ, 0], [B_x, B_y, 0, cᵀ], [0, 0, c, 0]]`.
    pub fn full_matrix(&self) -> CsrMatrix {
        let nf = self.dofmap.n_free();
        let np = self.dofmap.n_pressure;
        let n = self.size();
        let mut t = TripletBuilder::with_capacity(n, n, 2 * self.a.nnz() + 4 * self.b_x.nnz() + 2 * np);
        for (i, j, v) in self.a.triplets() {
            t.push(i, j, v);
            t.push(nf + i, nf + j, v);
        }
        for (k, j, v) in self.b_x.triplets() {
            t.push(2 * nf + k, j, v);
            t.push(j, 2 * nf + k, v);
        }
        for (k, j, v) in self.b_y.triplets() {
            t.push(2 * nf + k, nf + j, v);
            t.push(nf + j, 2 * nf + k, v);
        }
        for (k, &area) in self.c.iter().enumerate() {
            t.push(2 * nf + np, 2 * nf + k, area);
            t.push(2 * nf + k, 2 * nf + np, area);
        }
        t.build()
    }

    pub fn full_rhs(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.size());
        b.extend_from_slice(&self.rhs_u[0]);
        b.extend_from_slice(&self.rhs_u[1]);
        b.extend_from_slice(&self.rhs_p);
        b.push(0.0);
        b
    }

    /// Scatters a full solution vector back onto edges and cells.
    pub fn expand(&self, z: &[f64]) -> DiscreteSolution {
        let nf = self.dofmap.n_free();
        let np = self.dofmap.n_pressure;
        let mut velocity = self.dirichlet.clone();
        for (fi, &e) in self.dofmap.free_edges.iter().enumerate() {
            velocity[e] = Vec2::new(z[fi], z[nf + fi]);
        }
        DiscreteSolution {
            velocity,
            pressure: z[2 * nf..2 * nf + np].to_vec(),
            multiplier: z[2 * nf + np],
        }
    }

    /// Full vector of the canonical interpolant: edge means of `u`, cell means of `p`.
    pub fn interpolate(
        &self,
        mesh: &FittedMesh,
        u: &(dyn Fn(&Point) -> Vec2 + Sync),
        p: &(dyn Fn(&Point) -> f64 + Sync),
    ) -> Result<Vec<f64>, ElementError> {
        let nf = self.dofmap.n_free();
        let mut z = vec![0.0; self.size()];
        for (fi, &e) in self.dofmap.free_edges.iter().enumerate() {
            let [a, b] = mesh.edge_points(e);
            let m = edge_mean(u, a, b);
            z[fi] = m.x;
            z[nf + fi] = m.y;
        }
        for c in 0..self.dofmap.n_pressure {
            let pts = mesh.cell_points(c);
            let q = cell_quadrature(&pts, 4)?;
            let area: f64 = q.iter().map(|(_, w)| w).sum();
            z[2 * nf + c] = q.iter().map(|(x, w)| w * p(x)).sum::<f64>() / area;
        }
        Ok(z)
    }
}

/// `−|e| n_e` for each local edge: the divergence row of the edge basis
/// functions, since each has unit mean on its own edge and zero on the others.
pub fn divergence_by_flux(pts: &[Point]) -> Vec<Vec2> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            -outward_normal(&a, &b) * (b - a).norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::level_set::LevelSet;
    use crate::manufactured::{ExactSolution, LinearPatch};
    use crate::mesh::{build_interface_mesh, Diagonal, DEFAULT_SNAP_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn circle_mesh(n: usize) -> FittedMesh {
        let ls = LevelSet::circle(Point::origin(), PI / 7.0).unwrap();
        build_interface_mesh(
            Rect::new(-1.0, 1.0, -1.0, 1.0),
            n,
            Some(&ls),
            Diagonal::default(),
            DEFAULT_SNAP_TOL,
        )
        .unwrap()
    }

    fn zero(_: &Point) -> Vec2 {
        Vec2::zeros()
    }

    #[test]
    fn dof_counts_on_uncut_n2() {
        let mesh = build_interface_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 2, None, Diagonal::default(), DEFAULT_SNAP_TOL)
            .unwrap();
        let dm = DofMap::new(&mesh);
        assert_eq!(dm.n_edges(), 16);
        assert_eq!(dm.boundary_edges.len(), 8);
        assert_eq!(2 * dm.n_free(), 16);
        assert_eq!(dm.n_pressure, 8);
        assert_eq!(dm.system_size(), 16 + 8 + 1);
    }

    #[test]
    fn matrices_symmetric_and_divergence_matches_flux() {
        let mesh = circle_mesh(8);
        let dm = DofMap::new(&mesh);
        let bases = build_bases(&mesh).unwrap();
        let sys = assemble(&mesh, &dm, &bases, (10.0, 1.0), &zero, &zero, 8).unwrap();
        assert!(sys.a.asymmetry() <= 1e-12);
        let full = sys.full_matrix();
        assert!(full.asymmetry() <= 1e-12);
        for c in 0..mesh.cells.len() {
            let flux = divergence_by_flux(&mesh.cell_points(c));
            for (i, &e) in mesh.cell_edges[c].iter().enumerate() {
                if let Some(fi) = dm.free_index[e] {
                    let scale = mesh.h;
                    assert!((sys.b_x.get(c, fi) - flux[i].x).abs() < 1e-12 * scale);
                    assert!((sys.b_y.get(c, fi) - flux[i].y).abs() < 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn stiffness_positive_on_random_vectors() {
        let mesh = circle_mesh(8);
        let dm = DofMap::new(&mesh);
        let bases = build_bases(&mesh).unwrap();
        let sys = assemble(&mesh, &dm, &bases, (1.0, 1000.0), &zero, &zero, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let v: Vec<f64> = (0..dm.n_free()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let av = sys.a.mul_vec(&v);
            assert!(v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>() > 0.0);
        }
    }

    #[test]
    fn weak_continuity_across_interior_edges() {
        let mesh = circle_mesh(8);
        let bases = build_bases(&mesh).unwrap();
        for (e, edge) in mesh.edges.iter().enumerate() {
            let [Some(c0), Some(c1)] = edge.cells else { continue };
            let seg = [mesh.edge_points(e)];
            for c in [c0, c1] {
                let table = bases[c].edge_means(&seg, 6);
                for (j, &ej) in mesh.cell_edges[c].iter().enumerate() {
                    let target = if ej == e { 1.0 } else { 0.0 };
                    assert!((table[0][j] - target).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn patch_interpolant_has_zero_residual() {
        for mesh in [circle_mesh(8), circle_mesh(16)] {
            let dm = DofMap::new(&mesh);
            let bases = build_bases(&mesh).unwrap();
            let ex = LinearPatch;
            let sys = assemble(&mesh, &dm, &bases, (1.0, 1.0), &|p| ex.forcing(p), &|p| ex.velocity(p), 8).unwrap();
            let z = sys.interpolate(&mesh, &|p| ex.velocity(p), &|p| ex.pressure(p)).unwrap();
            let r = sys.full_matrix().mul_vec(&z);
            let b = sys.full_rhs();
            let res = r.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-10, "residual {res}");
        }
    }

    #[test]
    fn divergence_free_linear_field_has_zero_rows() {
        let mesh = circle_mesh(8);
        for c in 0..mesh.cells.len() {
            let flux = divergence_by_flux(&mesh.cell_points(c));
            let row: f64 = mesh.cell_edges[c]
                .iter()
                .zip(&flux)
                .map(|(&e, d)| {
                    let [a, b] = mesh.edge_points(e);
                    let m = nalgebra::center(&a, &b);
                    d.dot(&Vec2::new(m.x, -m.y))
                })
                .sum();
            assert!(row.abs() < 1e-14);
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = circle_mesh(16);
        let dm = DofMap::new(&mesh);
        let bases = build_bases(&mesh).unwrap();
        let f = |p: &Point| Vec2::new(p.x.sin(), p.y * p.x);
        let s1 = assemble(&mesh, &dm, &bases, (10.0, 1.0), &f, &f, 8).unwrap();
        let s2 = assemble(&mesh, &dm, &bases, (10.0, 1.0), &f, &f, 8).unwrap();
        assert_eq!(s1.full_matrix(), s2.full_matrix());
        assert_eq!(s1.full_rhs(), s2.full_rhs());
    }

    #[test]
    fn rejects_nonpositive_viscosity() {
        let mesh = circle_mesh(8);
        let dm = DofMap::new(&mesh);
        let bases = build_bases(&mesh).unwrap();
        assert!(matches!(
            assemble(&mesh, &dm, &bases, (0.0, 1.0), &zero, &zero, 8),
            Err(AssemblyError::NonPositiveViscosity { .. })
        ));
    }
}
