use std::path::PathBuf;

use nc_stokes::analysis::{convergence_study, estimate_infsup, infsup_csv, run_level};
use nc_stokes::config::RunConfig;
use nc_stokes::elements::element_report;
use nc_stokes::error::{ConfigError, Error};
use nc_stokes::io::{dump_system, write_json, write_vtk_file, SolutionFields};

pub struct Options {
    pub out: PathBuf,
    pub deterministic: bool,
    pub dump_system: bool,
}

pub fn mesh(cfg: &RunConfig, opts: &Options) -> Result<(), Error> {
    let mesh = cfg.problem()?.mesh(cfg.n)?;
    write_vtk_file(&opts.out.join("mesh.vtk"), &mesh, None, opts.deterministic)?;
    let stats = mesh.stats();
    write_json(&opts.out.join("mesh_stats.json"), &stats)?;
    println!(
        "n = {}: {} cells ({} triangles, {} quads), {} interface edges",
        cfg.n, stats.cells, stats.triangles, stats.quads, stats.interface_edges
    );
    Ok(())
}

pub fn solve(cfg: &RunConfig, opts: &Options) -> Result<(), Error> {
    let run = run_level(&cfg.problem()?, cfg.n)?;
    let fields = SolutionFields {
        bases: &run.bases,
        solution: &run.solution,
    };
    write_vtk_file(&opts.out.join("solution.vtk"), &run.mesh, Some(&fields), opts.deterministic)?;
    let mut report = run.error_report();
    if opts.deterministic {
        report.solve.wall_time_s = 0.0;
    }
    write_json(&opts.out.join("errors.json"), &report)?;
    if opts.dump_system {
        let dir = opts.out.join("system");
        std::fs::create_dir_all(&dir)?;
        dump_system(&dir, &run.system)?;
    }
    println!(
        "1/h = {}: |p-p_h| = {:.5e}, |u-u_h| = {:.5e}, |u-u_h|_1 = {:.5e}",
        report.inv_h, report.err_p_l2, report.err_u_l2, report.err_u_h1_broken
    );
    Ok(())
}

pub fn convergence(cfg: &RunConfig, opts: &Options) -> Result<(), Error> {
    if cfg.levels.is_empty() {
        return Err(ConfigError::invalid("levels", "convergence needs at least one level").into());
    }
    let mut table = convergence_study(&cfg.problem()?, &cfg.levels)?;
    if opts.deterministic {
        table.rows.iter_mut().for_each(|r| r.solve_time_s = 0.0);
    }
    let csv = table.to_csv();
    std::fs::write(opts.out.join("convergence.csv"), &csv)?;
    std::fs::write(opts.out.join("convergence.dat"), table.to_plot_data())?;
    write_json(&opts.out.join("convergence.json"), &table)?;
    print!("{csv}");
    Ok(())
}

pub fn infsup(cfg: &RunConfig, opts: &Options) -> Result<(), Error> {
    let problem = cfg.problem()?;
    let reports = cfg
        .infsup_levels
        .iter()
        .map(|&n| estimate_infsup(&problem.mesh(n)?, n))
        .collect::<Result<Vec<_>, _>>()?;
    let csv = infsup_csv(&reports, problem.domain.width());
    std::fs::write(opts.out.join("infsup.csv"), &csv)?;
    write_json(&opts.out.join("infsup.json"), &reports)?;
    print!("{csv}");
    Ok(())
}

pub fn element(cfg: &RunConfig, opts: &Options) -> Result<(), Error> {
    let report = element_report(cfg.s, cfg.t)?;
    write_json(&opts.out.join("element.json"), &report)?;
    println!(
        "s = {}, t = {}: c1 = {:.6}, det = {:.6}",
        report.s, report.t, report.c1, report.determinant
    );
    Ok(())
}
