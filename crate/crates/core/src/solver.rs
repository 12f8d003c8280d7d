//! Solution of the symmetric indefinite saddle-point system.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{DiscreteSolution, SaddleSystem};
use crate::error::SolveError;
use crate::sparse::CsrMatrix;

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_REFINEMENT_STEPS: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Sparse LU with partial pivoting, followed by iterative refinement.
    #[default]
    Direct,
    /// Preconditioned MINRES.
    Iterative,
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(SolverKind::Direct),
            "iterative" => Ok(SolverKind::Iterative),
            other => Err(format!("unknown solver `{other}` (expected direct or iterative)")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub method: SolverKind,
    /// Refinement steps for the direct path, MINRES iterations otherwise.
    pub iterations: usize,
    pub relative_residual: f64,
    pub wall_time_s: f64,
    pub unknowns: usize,
}

pub fn validate_tolerance(tol: f64) -> Result<(), SolveError> {
    if tol > 0.0 && tol <= 1e-6 {
        Ok(())
    } else {
        Err(SolveError::InvalidTolerance(tol))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(k: &CsrMatrix, z: &[f64], b: &[f64]) -> Vec<f64> {
    let kz = k.mul_vec(z);
    b.iter().zip(&kz).map(|(bi, ki)| bi - ki).collect()
}

/// Solves `K z = b` and returns the scattered solution with zero-mean pressure.
pub fn solve(
    system: &SaddleSystem,
    kind: SolverKind,
    tol: f64,
) -> Result<(DiscreteSolution, SolveReport), SolveError> {
    validate_tolerance(tol)?;
    let start = Instant::now();
    let k = system.full_matrix();
    let b = system.full_rhs();
    let bnorm = norm(&b);
    let (mut z, iterations) = if bnorm == 0.0 {
        (vec![0.0; b.len()], 0)
    } else {
        match kind {
            SolverKind::Direct => solve_direct(system, &k, &b, tol)?,
            SolverKind::Iterative => {
                let diag = block_preconditioner(system);
                minres(&k, &b, &diag, tol, 20 * b.len().max(100))?
            }
        }
    };
    project_pressure(system, &mut z);
    let relative_residual = if bnorm == 0.0 {
        0.0
    } else {
        norm(&residual(&k, &z, &b)) / bnorm
    };
    if relative_residual > tol {
        return Err(SolveError::NoConvergence {
            iterations,
            residual: relative_residual,
            history: vec![relative_residual],
        });
    }
    let report = SolveReport {
        method: kind,
        iterations,
        relative_residual,
        wall_time_s: start.elapsed().as_secs_f64(),
        unknowns: b.len(),
    };
    log::info!(
        "{kind:?} solve: {} unknowns, residual {relative_residual:.2e}, {:.2}s",
        b.len(),
        report.wall_time_s
    );
    Ok((system.expand(&z), report))
}

/// Removes the area-weighted mean from the pressure block. Constants lie in the
/// kernel of `Bᵀ`, so the momentum residual is unaffected.
fn project_pressure(system: &SaddleSystem, z: &mut [f64]) {
    let nf = system.dofmap.n_free();
    let np = system.dofmap.n_pressure;
    let p = &mut z[2 * nf..2 * nf + np];
    let area: f64 = system.c.iter().sum();
    let mean = dot(p, &system.c) / area;
    p.iter_mut().for_each(|x| *x -= mean);
}

/// Largest cell, so the pinned row is never a sliver.
fn pinned_cell(system: &SaddleSystem) -> usize {
    system
        .c
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

pub fn to_faer(k: &CsrMatrix) -> Result<SparseColMat<usize, f64>, SolveError> {
    let triplets: Vec<Triplet<usize, usize, f64>> =
        k.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(k.nrows(), k.ncols(), &triplets)
        .map_err(|e| SolveError::SingularSystem(format!("matrix conversion failed: {e:?}")))
}

/// Sparse LU on the system with the multiplier removed and one pressure
/// pinned to zero. The dense multiplier row would otherwise couple every
/// cell and destroy the fill-reducing ordering. Iterative refinement runs
/// against the full matrix `k`.
fn solve_direct(
    system: &SaddleSystem,
    k: &CsrMatrix,
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, usize), SolveError> {
    let nf = system.dofmap.n_free();
    let np = system.dofmap.n_pressure;
    let pinned = 2 * nf + pinned_cell(system);
    let multiplier = 2 * nf + np;
    let n = k.nrows();
    let reduced_index = |i: usize| -> Option<usize> {
        match i {
            _ if i == pinned || i == multiplier => None,
            _ if i > pinned => Some(i - 1),
            _ => Some(i),
        }
    };
    let triplets: Vec<Triplet<usize, usize, f64>> = k
        .triplets()
        .filter_map(|(i, j, v)| Some(Triplet::new(reduced_index(i)?, reduced_index(j)?, v)))
        .collect();
    let lu = SparseColMat::try_new_from_triplets(n - 2, n - 2, &triplets)
        .map_err(|e| SolveError::SingularSystem(format!("matrix conversion failed: {e:?}")))?
        .sp_lu()
        .map_err(|e| SolveError::SingularSystem(format!("sparse LU failed: {e:?}")))?;
    let c_norm2 = dot(&system.c, &system.c);
    let apply = |rhs: &[f64]| -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(n - 2, 1, |r, _| {
            let i = if r >= pinned { r + 1 } else { r };
            rhs[i]
        });
        lu.solve_in_place(x.as_mut());
        let mut z = vec![0.0; n];
        for r in 0..n - 2 {
            let i = if r >= pinned { r + 1 } else { r };
            z[i] = x[(r, 0)];
        }
        let area: f64 = system.c.iter().sum();
        let mean = (dot(&z[2 * nf..multiplier], &system.c) - rhs[multiplier]) / area;
        z[2 * nf..multiplier].iter_mut().for_each(|p| *p -= mean);
        // least-squares multiplier for the pressure rows
        let bu = k.mul_vec(&z);
        let defect: f64 = (0..np).map(|c| (rhs[2 * nf + c] - bu[2 * nf + c]) * system.c[c]).sum();
        z[multiplier] = defect / c_norm2;
        z
    };
    let bnorm = norm(b);
    let mut z = apply(b);
    if z.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::SingularSystem("non-finite values in LU solution".into()));
    }
    let mut history = Vec::new();
    for step in 0..=MAX_REFINEMENT_STEPS {
        let r = residual(k, &z, b);
        let rel = norm(&r) / bnorm;
        history.push(rel);
        if rel <= 0.01 * tol || (rel <= tol && step > 0) {
            return Ok((z, step));
        }
        if step == MAX_REFINEMENT_STEPS {
            break;
        }
        let dz = apply(&r);
        z.iter_mut().zip(&dz).for_each(|(a, d)| *a += d);
    }
    let residual = *history.last().unwrap();
    if residual <= tol {
        return Ok((z, MAX_REFINEMENT_STEPS));
    }
    Err(SolveError::NoConvergence {
        iterations: MAX_REFINEMENT_STEPS,
        residual,
        history,
    })
}

/// Inverse diagonal of the block preconditioner
/// `diag(diag A, diag A, |K|/μ_K, Σ μ_K |K|)`.
fn block_preconditioner(system: &SaddleSystem) -> Vec<f64> {
    let a_diag = system.a.diagonal();
    let mut d = Vec::with_capacity(system.size());
    d.extend(a_diag.iter().map(|a| 1.0 / a));
    d.extend(a_diag.iter().map(|a| 1.0 / a));
    d.extend(system.c.iter().zip(&system.mu_cell).map(|(area, mu)| mu / area));
    let lambda: f64 = system.c.iter().zip(&system.mu_cell).map(|(area, mu)| mu * area).sum();
    d.push(1.0 / lambda);
    d
}

/// Preconditioned MINRES for symmetric `k` with SPD diagonal preconditioner
/// `diag(m_inv)⁻¹`. Convergence is confirmed on the true residual.
pub fn minres(
    k: &CsrMatrix,
    b: &[f64],
    m_inv: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), SolveError> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let precond = |r: &[f64]| -> Vec<f64> { r.iter().zip(m_inv).map(|(a, m)| a * m).collect() };
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = precond(&r1);
    let beta1 = dot(&r1, &y).sqrt();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut history = Vec::new();

    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|yi| s * yi).collect();
        y = k.mul_vec(&v);
        if itn >= 2 {
            let f = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(yi, ri)| *yi -= f * ri);
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(yi, ri)| *yi -= f * ri);
        r1 = std::mem::replace(&mut r2, y);
        y = precond(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = (0..n)
            .map(|i| (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma)
            .collect();
        x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi += phi * wi);

        let estimate = phibar / beta1;
        if itn % 100 == 0 || estimate <= 0.1 * tol {
            let rel = norm(&residual(k, &x, b)) / bnorm;
            history.push(rel);
            if rel <= tol {
                return Ok((x, itn));
            }
        }
        if beta == 0.0 {
            break;
        }
    }
    let rel = norm(&residual(k, &x, b)) / bnorm;
    if rel <= tol {
        return Ok((x, max_iter));
    }
    Err(SolveError::NoConvergence {
        iterations: max_iter,
        residual: rel,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_bases, DofMap};
    use crate::geometry::{Point, Rect, Vec2};
    use crate::level_set::LevelSet;
    use crate::manufactured::{ExactSolution, LinearPatch};
    use crate::mesh::{build_interface_mesh, Diagonal, FittedMesh, DEFAULT_SNAP_TOL};
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

    fn patch_system(mesh: &FittedMesh) -> SaddleSystem {
        let dm = DofMap::new(mesh);
        let bases = build_bases(mesh).unwrap();
        let ex = LinearPatch;
        assemble(mesh, &dm, &bases, (1.0, 1.0), &|p| ex.forcing(p), &|p| ex.velocity(p), 8).unwrap()
    }

    #[test]
    fn tolerance_range() {
        assert!(validate_tolerance(1e-10).is_ok());
        assert!(validate_tolerance(1e-6).is_ok());
        assert!(validate_tolerance(0.0).is_err());
        assert!(validate_tolerance(1e-3).is_err());
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let mesh = circle_mesh(8);
        let dm = DofMap::new(&mesh);
        let bases = build_bases(&mesh).unwrap();
        let zero = |_: &Point| Vec2::zeros();
        let sys = assemble(&mesh, &dm, &bases, (1.0, 1.0), &zero, &zero, 8).unwrap();
        let (sol, report) = solve(&sys, SolverKind::Direct, 1e-10).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(sol.velocity.iter().all(|v| *v == Vec2::zeros()));
        assert!(sol.pressure.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn patch_recovered_by_both_solvers() {
        let mesh = circle_mesh(8);
        let sys = patch_system(&mesh);
        let z = sys.interpolate(&mesh, &|p| LinearPatch.velocity(p), &|p| LinearPatch.pressure(p)).unwrap();
        let expected = sys.expand(&z);
        for kind in [SolverKind::Direct, SolverKind::Iterative] {
            let (sol, report) = solve(&sys, kind, 1e-10).unwrap();
            assert!(report.relative_residual <= 1e-10);
            for (a, b) in sol.velocity.iter().zip(&expected.velocity) {
                assert!((a - b).norm() < 1e-9, "{kind:?}");
            }
            assert!(sol.pressure.iter().all(|p| p.abs() < 1e-9));
        }
    }

    #[test]
    fn linear_in_the_data() {
        let mesh = circle_mesh(8);
        let dm = DofMap::new(&mesh);
        let bases = build_bases(&mesh).unwrap();
        let f = |p: &Point| Vec2::new(p.y.cos(), p.x * p.y);
        let f3 = |p: &Point| f(p) * 3.0;
        let zero = |_: &Point| Vec2::zeros();
        let s1 = assemble(&mesh, &dm, &bases, (10.0, 1.0), &f, &zero, 8).unwrap();
        let s3 = assemble(&mesh, &dm, &bases, (10.0, 1.0), &f3, &zero, 8).unwrap();
        let (a, _) = solve(&s1, SolverKind::Direct, 1e-12).unwrap();
        let (b, _) = solve(&s3, SolverKind::Direct, 1e-12).unwrap();
        for (x, y) in a.velocity.iter().zip(&b.velocity) {
            assert!((x * 3.0 - y).norm() < 1e-10);
        }
        for (x, y) in a.pressure.iter().zip(&b.pressure) {
            assert!((x * 3.0 - y).abs() < 1e-10);
        }
        let mean: f64 = a.pressure.iter().zip(&s1.c).map(|(p, c)| p * c).sum();
        assert!(mean.abs() < 1e-13);
    }
}
