//! The four subcommands: `solve`, `map-grid`, `find-zeros`, `converge`.
//!
//! Every command writes a `report.toml` into the output directory plus its
//! own CSV files, and returns the report for inspection.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ahlfors_core::zeros::{default_initial_guesses, find_zeros, ZeroSearchConfig};
use ahlfors_core::{discretize, AhlforsSolution, DiscretizationContext, MappedGrid};
use anyhow::{bail, Context};
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::report::{ConvergenceRow, DiagnosticsReport, RunReport, SearchReport};

#[derive(Debug)]
pub struct CommandOutcome {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

/// Discretizes and solves for the configured (or given) zeros.
fn solve_from_config(
    config: &RunConfig,
    n: usize,
    zeros_override: Option<&[Complex64]>,
) -> anyhow::Result<AhlforsSolution> {
    let specs = config.curve_specs()?;
    let holes = specs.len() - 1;
    let zeros: Vec<Complex64> = match zeros_override {
        Some(zs) => zs.to_vec(),
        None => match config.zeros() {
            Some(zs) => zs,
            None if holes == 0 => Vec::new(),
            None => bail!(
                "problem.zeros: {holes} zero(s) required for this region; \
                 supply them or run find-zeros"
            ),
        },
    };
    let boundary = discretize(&specs, n)?;
    let ctx = DiscretizationContext::new(boundary, config.base_point())?;
    let aux = config.aux();
    let solution =
        AhlforsSolution::solve_with(ctx, &zeros, aux.as_deref(), config.cauchy_kind())?;
    Ok(solution)
}

fn diagnostics_report(solution: &AhlforsSolution) -> DiagnosticsReport {
    let d = solution.diagnostics();
    DiagnosticsReport {
        h: solution.rh().h.values().to_vec(),
        h_dispersion: d.h_dispersion,
        h_raw_deviation: d.h_raw_deviation,
        boundary_modulus_error: d.boundary_modulus_error,
        condition_estimate: d.condition_estimate,
        solve_residual: d.solve_residual,
        c: solution.c(),
        zero_count: solution.zero_count(),
    }
}

fn base_report(command: &str, config: &RunConfig, solution: &AhlforsSolution) -> RunReport {
    RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        elapsed_ms: 0.0,
        zeros_used: solution.zeros().iter().map(|&z| z.into()).collect(),
        aux_used: solution.aux_points().iter().map(|&z| z.into()).collect(),
        diagnostics: diagnostics_report(solution),
        search: None,
        convergence: vec![],
        config: config.clone(),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Node-by-node boundary data of a solved map.
fn boundary_csv(solution: &AhlforsSolution) -> String {
    let b = solution.boundary();
    let rh = solution.rh();
    let ctx = solution.context();
    let mut out = String::from(
        "component,node,t,eta_re,eta_im,gamma,mu,h,f_re,f_im,omega_re,omega_im\n",
    );
    for k in 0..b.len() {
        let comp = b.component_of(k);
        let h = rh.h.value(comp);
        // γ = Re[A f] − h, exact by construction of the boundary values.
        let gamma = (ctx.coeff()[k] * rh.f_boundary[k]).re - h;
        let omega = solution.boundary_value(k);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            comp + 1,
            k % b.nodes_per_curve(),
            b.node_t(k),
            b.eta()[k].re,
            b.eta()[k].im,
            gamma,
            rh.mu[k],
            h,
            rh.f_boundary[k].re,
            rh.f_boundary[k].im,
            omega.re,
            omega.im,
        );
    }
    out
}

fn polyline_csv(polylines: &[ahlfors_core::Polyline]) -> String {
    let mut out = String::from("polyline,point,re,im\n");
    for line in polylines {
        for (i, z) in line.points.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", line.id, i, z.re, z.im);
        }
    }
    out
}

pub fn cmd_solve(config: &RunConfig, out_dir: &Path) -> anyhow::Result<CommandOutcome> {
    let start = Instant::now();
    let solution = solve_from_config(config, config.problem.n, None)?;
    let mut report = base_report("solve", config, &solution);
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut files = Vec::new();
    files.push(write_file(out_dir, "boundary.csv", &boundary_csv(&solution))?);
    files.push(write_file(out_dir, "report.toml", &report.render()?)?);
    Ok(CommandOutcome { report, files })
}

pub fn cmd_map_grid(config: &RunConfig, out_dir: &Path) -> anyhow::Result<CommandOutcome> {
    let start = Instant::now();
    let solution = solve_from_config(config, config.problem.n, None)?;
    let grid: MappedGrid = solution.map_grid(&config.grid_spec()?)?;
    let mut report = base_report("map-grid", config, &solution);
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut files = Vec::new();
    files.push(write_file(
        out_dir,
        "grid_original.csv",
        &polyline_csv(&grid.original),
    )?);
    files.push(write_file(
        out_dir,
        "grid_image.csv",
        &polyline_csv(&grid.image),
    )?);
    files.push(write_file(out_dir, "boundary.csv", &boundary_csv(&solution))?);
    files.push(write_file(out_dir, "report.toml", &report.render()?)?);
    Ok(CommandOutcome { report, files })
}

pub fn cmd_find_zeros(config: &RunConfig, out_dir: &Path) -> anyhow::Result<CommandOutcome> {
    let start = Instant::now();
    let specs = config.curve_specs()?;
    if specs.len() < 2 {
        bail!("find-zeros: the region is simply connected; there are no zeros to search for");
    }
    let boundary = discretize(&specs, config.problem.n)?;
    let ctx = DiscretizationContext::new(boundary, config.base_point())?;
    let aux = config
        .aux()
        .unwrap_or_else(|| ahlfors_core::ahlfors::default_aux_points(ctx.boundary()));

    let search_cfg = config.search.clone().unwrap_or_default();
    let initial: Vec<Complex64> = match &search_cfg.initial {
        Some(points) => points.iter().map(|&p| p.into()).collect(),
        None => default_initial_guesses(ctx.boundary(), config.base_point()),
    };
    let mut zero_cfg = ZeroSearchConfig::new(initial.clone());
    zero_cfg.max_iterations = search_cfg.max_iterations;
    zero_cfg.tolerance = search_cfg.tolerance;
    zero_cfg.penalty = search_cfg.penalty;
    zero_cfg.simplex_step = search_cfg.simplex_step;

    let outcome = find_zeros(&ctx, &aux, &zero_cfg)?;

    // Final solve with the located zeros (best-so-far when not converged).
    let solution = solve_from_config(config, config.problem.n, Some(&outcome.zeros))?;
    let mut report = base_report("find-zeros", config, &solution);
    report.search = Some(SearchReport {
        converged: outcome.converged,
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        objective: outcome.objective,
        zeros: outcome.zeros.iter().map(|&z| z.into()).collect(),
        initial: initial.iter().map(|&z| z.into()).collect(),
        trace: outcome
            .history
            .iter()
            .map(|s| (s.stage, s.iteration, s.objective))
            .collect(),
    });
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut files = Vec::new();
    files.push(write_file(out_dir, "boundary.csv", &boundary_csv(&solution))?);
    files.push(write_file(out_dir, "report.toml", &report.render()?)?);
    Ok(CommandOutcome { report, files })
}

fn oracle_fn(
    config: &RunConfig,
) -> Option<Box<dyn Fn(Complex64) -> Complex64>> {
    let oracle = config.oracle.as_ref()?;
    let a = config.base_point();
    match oracle.kind.as_str() {
        "identity" => Some(Box::new(|z| z)),
        "mobius" => Some(Box::new(move |z| (z - a) / (1.0 - a.conj() * z))),
        _ => None,
    }
}

pub fn cmd_converge(config: &RunConfig, out_dir: &Path) -> anyhow::Result<CommandOutcome> {
    let start = Instant::now();
    let Some(converge) = &config.converge else {
        bail!("converge.n_values: a list of node counts is required (config or --n)");
    };
    let oracle = oracle_fn(config);

    // Oracle errors are measured on a fixed point set: the configured grid
    // clipped at the coarsest resolution stays interior at every finer one.
    let coarsest = *converge.n_values.iter().min().unwrap();
    let probe_points: Vec<Complex64> = if oracle.is_some() {
        let coarse = solve_from_config(config, coarsest, None)?;
        coarse
            .map_grid(&config.grid_spec()?)?
            .original
            .iter()
            .flat_map(|p| p.points.iter().copied())
            .collect()
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    let mut last_solution = None;
    for &n in &converge.n_values {
        let solution = solve_from_config(config, n, None)?;
        let d = solution.diagnostics();
        let map_error = oracle.as_ref().map(|f| {
            probe_points
                .iter()
                .map(|&z| match solution.eval(z) {
                    Ok(v) => (v.value - f(z)).norm(),
                    Err(_) => 0.0,
                })
                .fold(0.0, f64::max)
        });
        rows.push(ConvergenceRow {
            n,
            boundary_modulus_error: d.boundary_modulus_error,
            h_raw_deviation: d.h_raw_deviation,
            h_dispersion: d.h_dispersion,
            map_error,
        });
        last_solution = Some(solution);
    }

    let solution = last_solution.expect("n_values verified non-empty");
    let mut report = base_report("converge", config, &solution);
    report.convergence = rows.clone();
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut csv = String::from(
        "n,boundary_modulus_error,h_raw_deviation,h_dispersion,map_error\n",
    );
    for row in &rows {
        let map_error = row
            .map_error
            .map_or(String::new(), |e| e.to_string());
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.n, row.boundary_modulus_error, row.h_raw_deviation, row.h_dispersion, map_error
        );
    }

    let mut files = Vec::new();
    files.push(write_file(out_dir, "convergence.csv", &csv)?);
    files.push(write_file(out_dir, "report.toml", &report.render()?)?);
    Ok(CommandOutcome { report, files })
}
