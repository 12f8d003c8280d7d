use std::f64::consts::PI;

use nc_stokes::analysis::{estimate_infsup, run_level, CaseKind, Problem};
use nc_stokes::assembly::{assemble, build_bases, DofMap, SaddleSystem};
use nc_stokes::elements::build_quad_basis;
use nc_stokes::geometry::{Point, Rect, Vec2};
use nc_stokes::manufactured::{Example1, ExactSolution};
use nc_stokes::mesh::{build_interface_mesh, CellKind, CutCase, Diagonal, EdgeClass, FittedMesh, DEFAULT_SNAP_TOL};
use nc_stokes::solver::{solve, SolverKind};
use nc_stokes::sparse::CsrMatrix;
use nc_stokes::LevelSet;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circle_mesh(center: Point, radius: f64, n: usize) -> Option<FittedMesh> {
    let ls = LevelSet::circle(center, radius).ok()?;
    build_interface_mesh(Rect::new(-1.0, 1.0, -1.0, 1.0), n, Some(&ls), Diagonal::default(), DEFAULT_SNAP_TOL).ok()
}

fn example1_system(mesh: &FittedMesh, mu: (f64, f64)) -> SaddleSystem {
    let ls = LevelSet::circle(Point::origin(), PI / 7.0).unwrap();
    let ex = Example1::new(mu.0, mu.1, ls, mesh.domain).unwrap();
    let bases = build_bases(mesh).unwrap();
    let dm = DofMap::new(mesh);
    assemble(mesh, &dm, &bases, mu, &|p| ex.forcing(p), &|p| ex.velocity(p), 8).unwrap()
}

fn permuted(m: &CsrMatrix, rows: &[usize], cols: &[usize]) -> CsrMatrix {
    let t = m.triplets().map(|(i, j, v)| (rows[i], cols[j], v)).collect();
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), t)
}

/// Relabels free velocity DOFs by `sv` and pressure cells by `sp` (old → new).
fn permute_system(sys: &SaddleSystem, sv: &[usize], sp: &[usize]) -> SaddleSystem {
    let scatter = |v: &[f64], s: &[usize]| {
        let mut out = vec![0.0; v.len()];
        v.iter().enumerate().for_each(|(i, x)| out[s[i]] = *x);
        out
    };
    let mut dofmap = sys.dofmap.clone();
    for (i, &e) in sys.dofmap.free_edges.iter().enumerate() {
        dofmap.free_edges[sv[i]] = e;
        dofmap.free_index[e] = Some(sv[i]);
    }
    SaddleSystem {
        dofmap,
        a: permuted(&sys.a, sv, sv),
        b_x: permuted(&sys.b_x, sp, sv),
        b_y: permuted(&sys.b_y, sp, sv),
        c: scatter(&sys.c, sp),
        mu_cell: scatter(&sys.mu_cell, sp),
        rhs_u: [scatter(&sys.rhs_u[0], sv), scatter(&sys.rhs_u[1], sv)],
        rhs_p: scatter(&sys.rhs_p, sp),
        dirichlet: sys.dirichlet.clone(),
    }
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fitted_mesh_invariants(cx in -0.3f64..0.3, cy in -0.3f64..0.3, r in 0.2f64..0.6, n in prop::sample::select(vec![8usize, 12, 16, 24])) {
        let mesh = circle_mesh(Point::new(cx, cy), r, n);
        prop_assume!(mesh.is_some());
        let mesh = mesh.unwrap();
        let h = 2.0 / n as f64;
        prop_assert!((mesh.total_area() - 4.0).abs() < 1e-12);
        prop_assert_eq!(mesh.euler_characteristic(), 1);
        let inside = mesh.stats().region2_area;
        prop_assert!((inside - PI * r * r).abs() <= 2.0 * h * h, "inside area {} vs {}", inside, PI * r * r);
        for edge in &mesh.edges {
            match (edge.class, edge.cells) {
                (EdgeClass::Boundary, [Some(_), None]) => {}
                (EdgeClass::Interface, [Some(a), Some(b)]) => prop_assert_ne!(mesh.cells[a].region, mesh.cells[b].region),
                (EdgeClass::Interior, [Some(a), Some(b)]) => prop_assert_eq!(mesh.cells[a].region, mesh.cells[b].region),
                other => prop_assert!(false, "inconsistent edge {:?}", other),
            }
        }
        for (c, cell) in mesh.cells.iter().enumerate() {
            prop_assert!(mesh.cell_area(c) > 0.0);
            if cell.kind == CellKind::Quad {
                prop_assert_eq!(mesh.cut_of(c).case, CutCase::CaseII);
            }
        }
    }

    #[test]
    fn quad_basis_reproduces_linears(
        s in 1e-6f64..0.999, dt in 0.0f64..1.0, angle in 0.0f64..6.3, stretch in 0.3f64..3.0, seed in any::<u64>()
    ) {
        let t = s + dt * (1.0 - 1e-6 - s);
        let (c, sn) = (angle.cos(), angle.sin());
        let map = |x: f64, y: f64| Point::new(0.2 + 0.05 * (c * x - sn * y * stretch), -0.1 + 0.05 * (sn * x + c * y * stretch));
        let (a1, a2, a4) = (map(0.0, 0.0), map(1.0, 0.0), map(0.0, 1.0));
        let a3 = a2 + (a4 - a2) * s;
        let a5 = a1 + (a4 - a1) * t;
        let quad = [a1, a2, a3, a5];
        let basis = build_quad_basis(&quad, a1, a2, a4, s, t).unwrap();
        let g = |p: &Point| 3.0 * p.x - 2.0 * p.y + 0.5;
        let means: Vec<f64> = (0..4).map(|i| g(&nalgebra::center(&quad[i], &quad[(i + 1) % 4]))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            // random convex combination of the vertices lies inside
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            let p = Point::from(quad.iter().zip(&w).map(|(q, wi)| q.coords * (wi / total)).sum::<Vec2>());
            let v: f64 = basis.values(&p).iter().zip(&means).map(|(b, m)| b * m).sum();
            prop_assert!((v - g(&p)).abs() < 1e-10, "s={} t={} error {}", s, t, (v - g(&p)).abs());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solution_invariant_under_dof_relabelling(seed in any::<u64>(), kind in prop::sample::select(vec![SolverKind::Direct, SolverKind::Iterative])) {
        let mesh = circle_mesh(Point::origin(), PI / 7.0, 8).unwrap();
        let sys = example1_system(&mesh, (100.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sv = shuffled(sys.dofmap.n_free(), &mut rng);
        let sp = shuffled(sys.dofmap.n_pressure, &mut rng);
        let perm = permute_system(&sys, &sv, &sp);
        let (a, _) = solve(&sys, kind, 1e-12).unwrap();
        let (b, _) = solve(&perm, kind, 1e-12).unwrap();
        let scale = a.velocity.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (u, w) in a.velocity.iter().zip(&b.velocity) {
            prop_assert!((u - w).norm() <= 1e-9 * scale);
        }
        let pscale = a.pressure.iter().map(|p| p.abs()).fold(0.0, f64::max);
        for (k, p) in a.pressure.iter().enumerate() {
            prop_assert!((p - b.pressure[sp[k]]).abs() <= 1e-9 * pscale);
        }
    }

    #[test]
    fn direct_and_iterative_agree(mu1 in 0.1f64..1000.0, mu2 in 0.1f64..1000.0) {
        let mesh = circle_mesh(Point::origin(), PI / 7.0, 8).unwrap();
        let sys = example1_system(&mesh, (mu1, mu2));
        let (a, _) = solve(&sys, SolverKind::Direct, 1e-12).unwrap();
        let (b, _) = solve(&sys, SolverKind::Iterative, 1e-12).unwrap();
        let scale = a.velocity.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (u, w) in a.velocity.iter().zip(&b.velocity) {
            prop_assert!((u - w).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn infsup_invariant_under_translation(dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
        let shift = Vec2::new(dx, dy);
        let base = Problem::example1(1.0, 1.0);
        let mut moved = base.clone();
        moved.domain = base.domain.translated(shift);
        moved.level_set = Some(LevelSet::circle(Point::origin() + shift, PI / 7.0).unwrap());
        let b0 = estimate_infsup(&base.mesh(8).unwrap(), 8).unwrap().beta;
        let b1 = estimate_infsup(&moved.mesh(8).unwrap(), 8).unwrap().beta;
        prop_assert!((b0 - b1).abs() <= 1e-8 * b0, "{} vs {}", b0, b1);
    }
}

#[test]
fn errors_decrease_under_refinement_for_all_viscosity_pairs() {
    for mu in [(10000.0, 1.0), (1.0, 10000.0), (1.0, 100.0), (100.0, 1.0), (1.0, 1.0)] {
        let p = Problem::example1(mu.0, mu.1);
        let e: Vec<[f64; 3]> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let r = run_level(&p, n).unwrap().errors;
                [r.p_l2, r.u_l2, r.u_h1]
            })
            .collect();
        for w in e.windows(2) {
            for (k, (coarse, fine)) in w[0].iter().zip(&w[1]).enumerate() {
                assert!(fine < coarse, "mu = {mu:?}: norm {k} grew {coarse} -> {fine}");
            }
        }
    }
}

#[test]
fn quadrature_degree_saturation() {
    // raising both quadrature degrees from 8 to 10 moves each error by < 0.1 %
    let mut p = Problem::example1(10000.0, 1.0);
    let base = run_level(&p, 32).unwrap().errors;
    p.rhs_degree = 10;
    p.error_degree = 10;
    let fine = run_level(&p, 32).unwrap().errors;
    for (a, b) in [(base.p_l2, fine.p_l2), (base.u_l2, fine.u_l2), (base.u_h1, fine.u_h1)] {
        assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
    }
}

#[test]
fn patch_is_exact_with_contrast_free_viscosity_on_cut_mesh() {
    let mut p = Problem::example1(1.0, 1.0);
    p.case = CaseKind::Patch;
    let run = run_level(&p, 16).unwrap();
    let ex = nc_stokes::manufactured::LinearPatch;
    assert!(run.errors.u_h1 < 1e-9 && run.errors.u_l2 < 1e-9 && run.errors.p_l2 < 1e-9);
    assert_eq!(ex.forcing(&Point::origin()), Vec2::zeros());
}
