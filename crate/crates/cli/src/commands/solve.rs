use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use sdot::{SolverConfig64, TransportModel64};

use crate::error::{CliError, CliResult, ErrorKind};
use crate::formats::{DensitySpec, DomainSpec, Input, ResultFile, SitesFile};
use crate::manifest::{emit, RunManifest};

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Sites file or inline JSON: {"points": [[x, y], ...], "masses": [...]}
    #[arg(long)]
    pub sites: String,
    /// Domain file or inline JSON: {"square": [...]}, {"polygon": [...]} or {"disk": {...}}
    #[arg(long)]
    pub domain: String,
    /// Density file or inline JSON; uniform probability when omitted
    #[arg(long)]
    pub density: Option<String>,
    /// Stopping tolerance on max_i |ν_i − w_i(h)|
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Segment count for disk domains (default 256)
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

/// A solved problem with the manifest entries describing its inputs.
struct Solved {
    result: ResultFile,
    model: TransportModel64,
    manifest: RunManifest,
    started: Instant,
}

fn solve_problem(command: &str, args: &ProblemArgs) -> CliResult<Solved> {
    let started = Instant::now();
    let sites_in = Input::read(&args.sites)?;
    let domain_in = Input::read(&args.domain)?;
    let density_in = args.density.as_deref().map(Input::read).transpose()?;

    let sites_file = SitesFile::load(&sites_in)?;
    let domain = DomainSpec::resolve(&domain_in, args.segments)?;
    let (density_spec, density) = DensitySpec::resolve(density_in.as_ref(), domain.polygon)?;
    let sites = sites_file.sites(density.total_mass(), &sites_in)?;

    let config = SolverConfig64 {
        tol_gradient_inf: args.tol,
        max_iterations: args.max_iter,
        ..SolverConfig64::default()
    };
    let (model, report) = TransportModel64::solve(sites, density, &config)?;
    let result = ResultFile::new(density_spec, &sites_file, &model, &report, args.tol, args.max_iter);

    let mut manifest = RunManifest::new(command);
    manifest
        .param("tol", args.tol)
        .param("max_iter", args.max_iter)
        .param("segments", domain.segments)
        .param("out", &args.out)
        .input("sites", &sites_in)
        .input("domain", &domain_in);
    if let Some(d) = &density_in {
        manifest.input("density", d);
    }
    manifest.param("solver_wall_time_seconds", report.wall_time.as_secs_f64());
    Ok(Solved {
        result,
        model,
        manifest,
        started,
    })
}

fn not_converged(result: &ResultFile) -> CliError {
    let g = result.report.gradient_inf_norm.last().copied().unwrap_or(f64::NAN);
    CliError::new(
        ErrorKind::NotConverged,
        format!(
            "solver stopped after {} iterations with gradient {g:e} above tolerance {:e}",
            result.report.iterations, result.tolerance
        ),
    )
}

/// Solves and writes the result file. A non-converged result is still written.
pub fn run_solve(args: &ProblemArgs) -> CliResult<String> {
    let Solved {
        result,
        mut manifest,
        started,
        ..
    } = solve_problem("solve", args)?;
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    emit(&args.out, result.to_json().as_bytes(), &manifest)?;
    if !result.converged() {
        return Err(not_converged(&result));
    }
    Ok(json!({
        "converged": true,
        "iterations": result.report.iterations,
        "gradient_inf_norm": result.report.gradient_inf_norm.last(),
        "wasserstein": result.wasserstein,
    })
    .to_string())
}

/// Solves and writes only the distance summary.
pub fn run_wasserstein(args: &ProblemArgs) -> CliResult<String> {
    let Solved {
        result,
        model,
        mut manifest,
        started,
    } = solve_problem("wasserstein", args)?;
    let summary = json!({
        "wasserstein": result.wasserstein,
        "transport_cost": model.transport_cost(),
        "converged": result.converged(),
        "iterations": result.report.iterations,
        "gradient_inf_norm": result.report.gradient_inf_norm.last(),
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    emit(&args.out, text.as_bytes(), &manifest)?;
    if !result.converged() {
        return Err(not_converged(&result));
    }
    Ok(summary.to_string())
}
