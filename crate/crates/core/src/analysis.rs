//! Error norms, convergence studies and the discrete inf-sup constant.

use std::fmt::Write as _;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, build_bases, DiscreteSolution, DofMap, SaddleSystem, DEFAULT_RHS_DEGREE};
use crate::elements::{cell_quadrature, LocalBasis};
use crate::error::{ConfigError, Error, SolveError};
use crate::geometry::{Point, Rect, Vec2};
use crate::level_set::LevelSet;
use crate::manufactured::{Example1, ExactSolution, LinearPatch};
use crate::mesh::{build_interface_mesh, BackgroundMesh, Diagonal, EdgeClass, FittedMesh, DEFAULT_SNAP_TOL};
use crate::solver::{solve, to_faer, SolveReport, SolverKind, DEFAULT_TOL};
use crate::sparse::{CsrMatrix, TripletBuilder};

pub const DEFAULT_ERROR_DEGREE: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Errors {
    pub p_l2: f64,
    pub u_l2: f64,
    /// Broken `H¹` seminorm: `(Σ_K ‖∇(u − u_h)‖²_K)^{1/2}`.
    pub u_h1: f64,
}

/// Cellwise quadrature of the velocity and pressure errors.
pub fn compute_errors(
    mesh: &FittedMesh,
    bases: &[LocalBasis],
    sol: &DiscreteSolution,
    exact: &dyn ExactSolution,
    degree: usize,
) -> Result<Errors, Error> {
    let per_cell: Vec<[f64; 3]> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|c| {
            let pts = mesh.cell_points(c);
            let region = mesh.cells[c].region;
            let mut acc = [0.0; 3];
            for (p, w) in cell_quadrature(&pts, degree)? {
                let du = exact.velocity_in(region, &p) - sol.velocity_at(mesh, &bases[c], c, &p);
                let dg = exact.velocity_gradient_in(region, &p) - sol.velocity_gradient_at(mesh, &bases[c], c, &p);
                let dp = exact.pressure(&p) - sol.pressure[c];
                acc[0] += w * dp * dp;
                acc[1] += w * du.norm_squared();
                acc[2] += w * dg.norm_squared();
            }
            Ok(acc)
        })
        .collect::<Result<_, Error>>()?;
    let sum = per_cell
        .iter()
        .fold([0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    Ok(Errors {
        p_l2: sum[0].sqrt(),
        u_l2: sum[1].sqrt(),
        u_h1: sum[2].sqrt(),
    })
}

/// Structural checks on a computed solution.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Invariants {
    /// Largest `|∫_K ∇·u_h| / (|K|^{1/2} ‖u_h‖)` over cells.
    pub max_cell_divergence: f64,
    /// Largest edge-mean jump of `u_h` across interior edges.
    pub max_edge_jump: f64,
    /// `|Σ_K |K| p_K| / |Ω|`.
    pub pressure_mean: f64,
    /// `|Σ_K |K| − |Ω|| / |Ω|`.
    pub area_defect: f64,
}

pub fn check_invariants(mesh: &FittedMesh, bases: &[LocalBasis], sol: &DiscreteSolution) -> Invariants {
    let u_norm = sol.velocity.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut inv = Invariants::default();
    for c in 0..mesh.cells.len() {
        let pts = mesh.cell_points(c);
        let n = pts.len();
        // ∫_K ∇·u_h = Σ_e |e| n_e · ū_e
        let flux: f64 = (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                let d = b - a;
                Vec2::new(d.y, -d.x).dot(&sol.velocity[mesh.cell_edges[c][i]])
            })
            .sum();
        let scaled = flux.abs() / (mesh.cell_area(c).sqrt() * u_norm);
        inv.max_cell_divergence = inv.max_cell_divergence.max(scaled);
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        let [Some(c0), Some(c1)] = edge.cells else { continue };
        let seg = [mesh.edge_points(e)];
        let mean = |c: usize| -> Vec2 {
            let table = bases[c].edge_means(&seg, 3);
            mesh.cell_edges[c]
                .iter()
                .zip(&table[0])
                .map(|(&ej, v)| sol.velocity[ej] * *v)
                .sum()
        };
        inv.max_edge_jump = inv.max_edge_jump.max((mean(c0) - mean(c1)).norm());
    }
    let area = mesh.domain.area();
    let weighted: f64 = (0..mesh.cells.len()).map(|c| mesh.cell_area(c) * sol.pressure[c]).sum();
    inv.pressure_mean = weighted.abs() / area;
    inv.area_defect = (mesh.total_area() - area).abs() / area;
    inv
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// Stream-function solution around the level-set interface.
    #[default]
    Example1,
    /// `u = (y, x)`, `p = 0`.
    Patch,
}

/// Everything needed to build, solve and measure one discretization level.
#[derive(Clone, Debug)]
pub struct Problem {
    pub domain: Rect,
    pub level_set: Option<LevelSet>,
    pub mu: (f64, f64),
    pub case: CaseKind,
    pub diagonal: Diagonal,
    pub snap_tol: f64,
    pub rhs_degree: usize,
    pub error_degree: usize,
    pub solver: SolverKind,
    pub tol: f64,
}

impl Problem {
    pub fn example1(mu1: f64, mu2: f64) -> Self {
        Self {
            domain: Rect::new(-1.0, 1.0, -1.0, 1.0),
            level_set: Some(
                LevelSet::circle(Point::origin(), std::f64::consts::PI / 7.0).expect("positive radius"),
            ),
            mu: (mu1, mu2),
            case: CaseKind::Example1,
            diagonal: Diagonal::default(),
            snap_tol: DEFAULT_SNAP_TOL,
            rhs_degree: DEFAULT_RHS_DEGREE,
            error_degree: DEFAULT_ERROR_DEGREE,
            solver: SolverKind::Direct,
            tol: DEFAULT_TOL,
        }
    }

    pub fn exact(&self) -> Result<Box<dyn ExactSolution>, Error> {
        Ok(match self.case {
            CaseKind::Example1 => {
                let ls = self
                    .level_set
                    .clone()
                    .ok_or_else(|| ConfigError::invalid("levelset", "example 1 requires a level set"))?;
                Box::new(Example1::new(self.mu.0, self.mu.1, ls, self.domain)?)
            }
            CaseKind::Patch => Box::new(LinearPatch),
        })
    }

    /// `1/h` for `n` subdivisions per axis.
    pub fn inv_h(&self, n: usize) -> f64 {
        n as f64 / self.domain.width()
    }

    pub fn mesh(&self, n: usize) -> Result<FittedMesh, Error> {
        Ok(build_interface_mesh(
            self.domain,
            n,
            self.level_set.as_ref(),
            self.diagonal,
            self.snap_tol,
        )?)
    }
}

/// A solved level with its mesh, basis cache and system.
pub struct LevelRun {
    pub n: usize,
    pub mesh: FittedMesh,
    pub bases: Vec<LocalBasis>,
    pub system: SaddleSystem,
    pub solution: DiscreteSolution,
    pub errors: Errors,
    pub report: SolveReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub inv_h: f64,
    pub err_p_l2: f64,
    pub err_u_l2: f64,
    pub err_u_h1_broken: f64,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub solve: SolveReport,
}

impl LevelRun {
    pub fn error_report(&self) -> ErrorReport {
        ErrorReport {
            n: self.n,
            h: self.mesh.h,
            inv_h: 1.0 / self.mesh.h,
            err_p_l2: self.errors.p_l2,
            err_u_l2: self.errors.u_l2,
            err_u_h1_broken: self.errors.u_h1,
            velocity_dofs: 2 * self.system.dofmap.n_free(),
            pressure_dofs: self.system.dofmap.n_pressure,
            solve: self.report.clone(),
        }
    }
}

pub fn run_level(problem: &Problem, n: usize) -> Result<LevelRun, Error> {
    let exact = problem.exact()?;
    let mesh = problem.mesh(n)?;
    let bases = build_bases(&mesh)?;
    let dofmap = DofMap::new(&mesh);
    let system = assemble(
        &mesh,
        &dofmap,
        &bases,
        problem.mu,
        &|p| exact.forcing(p),
        &|p| exact.velocity(p),
        problem.rhs_degree,
    )?;
    let (solution, report) = solve(&system, problem.solver, problem.tol)?;
    let errors = compute_errors(&mesh, &bases, &solution, exact.as_ref(), problem.error_degree)?;
    log::info!(
        "n = {n}: |p-p_h| = {:.4e}, |u-u_h| = {:.4e}, |u-u_h|_1 = {:.4e}",
        errors.p_l2,
        errors.u_l2,
        errors.u_h1
    );
    Ok(LevelRun {
        n,
        mesh,
        bases,
        system,
        solution,
        errors,
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub inv_h: f64,
    pub errors: Errors,
    /// `log₂` ratios against the previous row; `None` on the first row.
    pub orders: Option<Errors>,
    pub unknowns: usize,
    pub solve_time_s: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

impl ConvergenceTable {
    pub fn push(&mut self, n: usize, inv_h: f64, errors: Errors, unknowns: usize, solve_time_s: f64) {
        let orders = self.rows.last().map(|prev| {
            let r = inv_h / prev.inv_h;
            Errors {
                p_l2: order(prev.errors.p_l2, errors.p_l2, r),
                u_l2: order(prev.errors.u_l2, errors.u_l2, r),
                u_h1: order(prev.errors.u_h1, errors.u_h1, r),
            }
        });
        self.rows.push(ConvergenceRow {
            n,
            inv_h,
            errors,
            orders,
            unknowns,
            solve_time_s,
        });
    }

    /// Slope between the first and last rows.
    pub fn aggregate_orders(&self) -> Option<Errors> {
        let (first, last) = (self.rows.first()?, self.rows.last()?);
        if self.rows.len() < 2 {
            return None;
        }
        let r = last.inv_h / first.inv_h;
        Some(Errors {
            p_l2: order(first.errors.p_l2, last.errors.p_l2, r),
            u_l2: order(first.errors.u_l2, last.errors.u_l2, r),
            u_h1: order(first.errors.u_h1, last.errors.u_h1, r),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("1/h,p_err,order,u_l2_err,order,u_h1_err,order\n");
        for row in &self.rows {
            let ord = |f: fn(&Errors) -> f64| match &row.orders {
                Some(o) => format!("{:.4}", f(o)),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{},{:.5e},{},{:.5e},{},{:.5e},{}",
                row.inv_h,
                row.errors.p_l2,
                ord(|e| e.p_l2),
                row.errors.u_l2,
                ord(|e| e.u_l2),
                row.errors.u_h1,
                ord(|e| e.u_h1)
            );
        }
        out
    }

    /// Whitespace-separated `h p_err u_l2_err u_h1_err`, for log-log plots.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::from("# h p_err u_l2_err u_h1_err\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:e} {:e} {:e} {:e}",
                1.0 / row.inv_h,
                row.errors.p_l2,
                row.errors.u_l2,
                row.errors.u_h1
            );
        }
        out
    }
}

pub fn validate_levels(levels: &[usize]) -> Result<(), ConfigError> {
    let first = *levels
        .first()
        .ok_or_else(|| ConfigError::invalid("levels", "at least one level is required"))?;
    if first == 0 {
        return Err(ConfigError::invalid("levels", "levels must be positive"));
    }
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(ConfigError::invalid("levels", "levels must be strictly increasing"));
        }
    }
    for &n in levels {
        if n % first != 0 || !(n / first).is_power_of_two() {
            return Err(ConfigError::invalid(
                "levels",
                format!("level {n} is not a power-of-two multiple of {first}"),
            ));
        }
    }
    Ok(())
}

/// Solves every level in order and tabulates errors and observed orders.
pub fn convergence_study(problem: &Problem, levels: &[usize]) -> Result<ConvergenceTable, Error> {
    validate_levels(levels)?;
    let mut table = ConvergenceTable::default();
    for &n in levels {
        let run = run_level(problem, n)?;
        table.push(n, problem.inv_h(n), run.errors, run.report.unknowns, run.report.wall_time_s);
    }
    Ok(table)
}

#[derive(Clone, Debug, Serialize)]
pub struct InfSupReport {
    pub n: usize,
    pub beta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Eigenvalues below `1e-10 λ_max`; one for the constant pressure in a stable pair.
    pub zero_modes: usize,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
}

const ZERO_EIGENVALUE: f64 = 1e-10;

/// `n,1/h,beta` rows; `beta` with six significant digits.
pub fn infsup_csv(reports: &[InfSupReport], domain_width: f64) -> String {
    let mut out = String::from("n,1/h,beta\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{:.5e}", r.n, r.n as f64 / domain_width, r.beta);
    }
    out
}

/// `β = sqrt(λ)`, `λ` the smallest nonzero eigenvalue of `S q = λ M q` with
/// `S = B_x A⁻¹ B_xᵀ + B_y A⁻¹ B_yᵀ` and `M = diag(mass)`.
pub fn infsup_from_blocks(
    n: usize,
    a: &CsrMatrix,
    b_x: &CsrMatrix,
    b_y: &CsrMatrix,
    mass: &[f64],
) -> Result<InfSupReport, SolveError> {
    let nv = a.nrows();
    let np = b_x.nrows();
    let llt = to_faer(a)?
        .sp_cholesky(Side::Lower)
        .map_err(|e| SolveError::EigensolveFailure(format!("Cholesky of the velocity block failed: {e:?}")))?;
    let mut s = Mat::<f64>::zeros(np, np);
    for b in [b_x, b_y] {
        // X = A⁻¹ Bᵀ, then S += B X
        let mut x = Mat::<f64>::zeros(nv, np);
        for (k, j, v) in b.triplets() {
            x[(j, k)] = v;
        }
        llt.solve_in_place(x.as_mut());
        for k in 0..np {
            for (j, v) in b.row(k) {
                for l in 0..np {
                    s[(k, l)] += v * x[(j, l)];
                }
            }
        }
    }
    let scale: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let st = Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]) * scale[i] * scale[j]);
    let eig = st
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| SolveError::EigensolveFailure(format!("{e:?}")))?;
    let lambda_max = eig.last().copied().unwrap_or(0.0);
    let zero_modes = eig.iter().filter(|&&l| l <= ZERO_EIGENVALUE * lambda_max).count();
    let lambda_min = eig
        .iter()
        .copied()
        .find(|&l| l > ZERO_EIGENVALUE * lambda_max)
        .ok_or_else(|| SolveError::EigensolveFailure("no nonzero eigenvalue".into()))?;
    Ok(InfSupReport {
        n,
        beta: lambda_min.sqrt(),
        lambda_min,
        lambda_max,
        zero_modes,
        velocity_dofs: 2 * nv,
        pressure_dofs: np,
    })
}

/// Inf-sup constant of the nonconforming pair on a fitted mesh, with `μ ≡ 1`.
pub fn estimate_infsup(mesh: &FittedMesh, n: usize) -> Result<InfSupReport, Error> {
    let bases = build_bases(mesh)?;
    let dofmap = DofMap::new(mesh);
    let zero = |_: &Point| Vec2::zeros();
    let sys = assemble(mesh, &dofmap, &bases, (1.0, 1.0), &zero, &zero, 1)?;
    Ok(infsup_from_blocks(n, &sys.a, &sys.b_x, &sys.b_y, &sys.c)?)
}

/// Conforming `P1` velocities with piecewise-constant pressures on the uncut
/// background triangles: a pair known to violate the inf-sup condition.
pub fn negative_control_infsup(domain: Rect, n: usize) -> Result<InfSupReport, Error> {
    let bg = BackgroundMesh::build(domain, n)?;
    let mesh = FittedMesh::from_background(&bg);
    let on_boundary: Vec<bool> = {
        let mut b = vec![false; bg.vertices.len()];
        for e in mesh.edges.iter().filter(|e| e.class == EdgeClass::Boundary) {
            b[e.vertices[0]] = true;
            b[e.vertices[1]] = true;
        }
        b
    };
    let mut index = vec![None; bg.vertices.len()];
    let mut nv = 0;
    for (v, &bd) in on_boundary.iter().enumerate() {
        if !bd {
            index[v] = Some(nv);
            nv += 1;
        }
    }
    let np = bg.triangles.len();
    let mut a = TripletBuilder::new(nv, nv);
    let mut b_x = TripletBuilder::new(np, nv);
    let mut b_y = TripletBuilder::new(np, nv);
    let mut mass = Vec::with_capacity(np);
    for (k, tri) in bg.triangles.iter().enumerate() {
        let p = bg.triangle_points(k);
        let area = crate::geometry::signed_area(&p);
        // ∇λ_i = rot(p_{i+2} − p_{i+1}) / (2|K|)
        let grads: Vec<Vec2> = (0..3)
            .map(|i| {
                let d = p[(i + 2) % 3] - p[(i + 1) % 3];
                Vec2::new(d.y, -d.x) / (2.0 * area)
            })
            .collect();
        for i in 0..3 {
            let Some(gi) = index[tri[i]] else { continue };
            for j in 0..3 {
                if let Some(gj) = index[tri[j]] {
                    a.push(gi, gj, area * grads[i].dot(&grads[j]));
                }
            }
            b_x.push(k, gi, -area * grads[i].x);
            b_y.push(k, gi, -area * grads[i].y);
        }
        mass.push(area);
    }
    Ok(infsup_from_blocks(n, &a.build(), &b_x.build(), &b_y.build(), &mass)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = ConvergenceTable::default();
        t.push(32, 16.0, Errors { p_l2: 8.0045e-2, u_l2: 7.7868e-4, u_h1: 4.7226e-2 }, 10, 0.1);
        t.push(64, 32.0, Errors { p_l2: 4.0e-2, u_l2: 1.9467e-4, u_h1: 2.3613e-2 }, 40, 0.2);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "1/h,p_err,order,u_l2_err,order,u_h1_err,order");
        assert_eq!(lines[1], "16,8.00450e-2,-,7.78680e-4,-,4.72260e-2,-");
        assert!(lines[2].starts_with("32,4.00000e-2,1.0008,1.94670e-4,2.0000,2.36130e-2,1.0000"));
        let agg = t.aggregate_orders().unwrap();
        assert!((agg.u_l2 - 2.0).abs() < 1e-4);
    }

    #[test]
    fn level_validation() {
        assert!(validate_levels(&[32, 64, 128, 256]).is_ok());
        assert!(validate_levels(&[8, 24]).is_err());
        assert!(validate_levels(&[16, 8]).is_err());
        assert!(validate_levels(&[]).is_err());
    }

    #[test]
    fn patch_errors_vanish_on_cut_mesh() {
        let mut problem = Problem::example1(1.0, 1.0);
        problem.case = CaseKind::Patch;
        let run = run_level(&problem, 8).unwrap();
        assert!(run.errors.p_l2 < 1e-9 && run.errors.u_l2 < 1e-9 && run.errors.u_h1 < 1e-9);
        let inv = check_invariants(&run.mesh, &run.bases, &run.solution);
        assert!(inv.max_edge_jump < 1e-10);
        assert!(inv.max_cell_divergence < 1e-9);
        assert!(inv.pressure_mean < 1e-13);
        assert!(inv.area_defect < 1e-12);
    }

    #[test]
    fn infsup_stable_on_small_meshes() {
        let problem = Problem::example1(1.0, 1.0);
        for n in [4, 8] {
            let mesh = problem.mesh(n).unwrap();
            let r = estimate_infsup(&mesh, n).unwrap();
            assert_eq!(r.zero_modes, 1, "n = {n}");
            assert!(r.beta > 0.05, "n = {n}: {}", r.beta);
        }
    }
}
