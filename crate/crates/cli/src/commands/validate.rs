use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sdot::geometry::Quadratic;
use sdot::potential::{dual_energy, weights_from_heights};
use sdot::solver::{energy, gradient, hessian, lp_oracle, SparseSymmetric};
use sdot::{Density64, Empirical64, Heights64, Point64, Polygon64, RandomSeed, Site64, TransportModel64};

use crate::error::{CliError, CliResult};
use crate::formats::{Input, ResultFile};
use crate::manifest::{emit, RunManifest};

/// Finite differences are taken on at most this many coordinates.
const MAX_FD_COORDINATES: usize = 32;
const LP_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// |ν − w(h)|_∞ ≤ tol, and central differences of E (step 1e-4·L, L = min ν / max|H_ii|) match ν − w to 1e-6·mass
    Gradient,
    /// Rows sum to 0, diagonal dominance, and differences of ∇E (step 1e-5·L) match H to 1e-5·max|H|
    Hessian,
    /// E_D(ψ) − E(h) along the stored trajectory has spread ≤ 1e-8·|mean|
    Dualgap,
    /// Index frequencies of --n source samples lie within 4 binomial deviations of ν
    Montecarlo,
    /// |W − W_LP| ≤ 2·δ·Σ f|x − y| for a 64×64 grid discretization of the source
    Lp,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Gradient => "gradient",
            Check::Hessian => "hessian",
            Check::Dualgap => "dualgap",
            Check::Montecarlo => "montecarlo",
            Check::Lp => "lp",
        }
    }

    pub const ALL: [Check; 5] = [Check::Gradient, Check::Hessian, Check::Dualgap, Check::Montecarlo, Check::Lp];
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Result file written by `solve`
    pub result: String,
    /// Comma-separated checks; all when omitted
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Vec<Check>,
    /// Sample count for the Monte Carlo check
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    pub message: String,
    pub details: Value,
}

impl CheckOutcome {
    fn failed(check: Check, message: impl Into<String>) -> Self {
        Self {
            check,
            passed: false,
            message: message.into(),
            details: Value::Null,
        }
    }
}

/// Everything a check needs, rebuilt from a result file.
struct Problem {
    result: ResultFile,
    sites: Vec<Site64>,
    heights: Heights64,
    density: Density64,
}

impl Problem {
    fn new(result: ResultFile) -> CliResult<Self> {
        Ok(Self {
            sites: result.site_list(),
            heights: result.heights(),
            density: result.density()?,
            result,
        })
    }

    /// Height shift `min ν_i / max |H_ii|` that moves a cell's mass by about its own size.
    fn height_scale(&self, h: &SparseSymmetric<f64>) -> f64 {
        let curvature = h.diagonal().iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let mass = self.sites.iter().map(|s| s.mass).fold(f64::INFINITY, f64::min);
        if curvature > 0.0 {
            mass / curvature
        } else {
            self.density.domain().diameter().powi(2)
        }
    }

    fn shifted(&self, i: usize, eps: f64) -> Heights64 {
        let mut h = self.heights.clone();
        h.0[i] += eps;
        h
    }

    fn coordinates(&self) -> Vec<usize> {
        let k = self.sites.len();
        if k <= MAX_FD_COORDINATES {
            (0..k).collect()
        } else {
            (0..MAX_FD_COORDINATES).map(|t| t * (k - 1) / (MAX_FD_COORDINATES - 1)).collect()
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn check_gradient(p: &Problem) -> sdot::Result<CheckOutcome> {
    let g = gradient(&p.sites, &p.heights, &p.density)?;
    let norm = inf_norm(&g);
    let optimal = norm <= p.result.tolerance;

    let eps = 1e-4 * p.height_scale(&hessian(&p.sites, &p.heights, &p.density)?);
    let fd_tol = 1e-6 * p.density.total_mass();
    let mut fd_error = 0.0f64;
    for i in p.coordinates() {
        let plus = energy(&p.sites, &p.shifted(i, eps), &p.density)?;
        let minus = energy(&p.sites, &p.shifted(i, -eps), &p.density)?;
        fd_error = fd_error.max(((plus - minus) / (2.0 * eps) - g[i]).abs());
    }
    let passed = optimal && fd_error <= fd_tol;
    let message = if !optimal {
        format!("|ν − w|_∞ = {norm:e} exceeds the tolerance {:e}", p.result.tolerance)
    } else if !passed {
        format!("finite differences deviate by {fd_error:e}")
    } else {
        "ok".into()
    };
    Ok(CheckOutcome {
        check: Check::Gradient,
        passed,
        message,
        details: json!({
            "gradient_inf_norm": norm,
            "tolerance": p.result.tolerance,
            "fd_step": eps,
            "fd_max_error": fd_error,
            "fd_tolerance": fd_tol,
            "fd_coordinates": p.coordinates().len(),
        }),
    })
}

fn check_hessian(p: &Problem) -> sdot::Result<CheckOutcome> {
    let h = hessian(&p.sites, &p.heights, &p.density)?;
    let k = h.dim();
    let rows_zero = (0..k).all(|i| h.row_sum(i) == 0.0);
    let mut off_abs = vec![0.0; k];
    let mut off_nonnegative = true;
    for &(i, j, v) in h.offdiagonal() {
        off_nonnegative &= v >= 0.0;
        off_abs[i] += v.abs();
        off_abs[j] += v.abs();
    }
    // Gershgorin discs in the closed left half-line make H negative semidefinite.
    let dominant = h
        .diagonal()
        .iter()
        .zip(&off_abs)
        .all(|(&d, &r)| d <= 0.0 && d + r <= 1e-12 * r);
    let max_entry = h.diagonal().iter().fold(0.0f64, |a, d| a.max(d.abs()));

    let eps = 1e-5 * p.height_scale(&h);
    let fd_tol = 1e-5 * max_entry;
    let mut fd_error = 0.0f64;
    for j in p.coordinates() {
        let plus = gradient(&p.sites, &p.shifted(j, eps), &p.density)?;
        let minus = gradient(&p.sites, &p.shifted(j, -eps), &p.density)?;
        for i in 0..k {
            let fd = (plus[i] - minus[i]) / (2.0 * eps);
            fd_error = fd_error.max((fd - h.get(i, j)).abs());
        }
    }
    let fd_ok = fd_error <= fd_tol;
    let passed = rows_zero && off_nonnegative && dominant && fd_ok;
    let message = match (rows_zero, off_nonnegative && dominant, fd_ok) {
        (false, _, _) => "a Hessian row does not sum to zero".to_string(),
        (_, false, _) => "the Hessian is not diagonally dominant with nonpositive diagonal".to_string(),
        (_, _, false) => format!("finite differences deviate by {fd_error:e}"),
        _ => "ok".to_string(),
    };
    Ok(CheckOutcome {
        check: Check::Hessian,
        passed,
        message,
        details: json!({
            "rows_sum_to_zero": rows_zero,
            "negative_semidefinite": off_nonnegative && dominant,
            "max_abs_entry": max_entry,
            "fd_step": eps,
            "fd_max_error": fd_error,
            "fd_tolerance": fd_tol,
            "fd_columns": p.coordinates().len(),
        }),
    })
}

fn check_dualgap(p: &Problem) -> sdot::Result<CheckOutcome> {
    let mut gaps = Vec::new();
    for h in &p.result.report.trajectory {
        let h = Heights64::new(h.clone());
        let psi = weights_from_heights(&p.sites, &h);
        gaps.push(dual_energy(&p.sites, &psi, &p.density)? - energy(&p.sites, &h, &p.density)?);
    }
    let n = gaps.len();
    if n < 2 {
        return Ok(CheckOutcome {
            check: Check::Dualgap,
            passed: true,
            message: format!("trajectory has {n} iterate(s); nothing to compare"),
            details: json!({ "iterates": n }),
        });
    }
    let mean = gaps.iter().sum::<f64>() / n as f64;
    let std = (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let bound = 1e-8 * mean.abs();
    let passed = std <= bound;
    Ok(CheckOutcome {
        check: Check::Dualgap,
        passed,
        message: if passed { "ok".into() } else { format!("spread {std:e} exceeds {bound:e}") },
        details: json!({ "iterates": n, "mean": mean, "std": std, "bound": bound }),
    })
}

fn check_montecarlo(p: &Problem, n: usize, seed: u64) -> CliResult<CheckOutcome> {
    if n == 0 {
        return Err(CliError::input("the Monte Carlo check needs --n > 0").at_field("n"));
    }
    let model = p.result.generative()?;
    let report = model.pushforward_check(n, RandomSeed(seed))?;
    let passed = report.passed();
    Ok(CheckOutcome {
        check: Check::Montecarlo,
        passed,
        message: if passed {
            "ok".into()
        } else {
            format!("{} indices outside the 4σ bound", report.violations.len())
        },
        details: json!({
            "samples": n,
            "seed": seed,
            "max_deviation": report.max_deviation,
            "violations": report.violations,
        }),
    })
}

/// Source mass of each grid cell, placed at the cell's centroid.
fn grid_discretization(density: &Density64, g: usize) -> sdot::Result<(Empirical64, f64)> {
    let (lo, hi) = density.domain().bounding_box();
    let (dx, dy) = ((hi.x - lo.x) / g as f64, (hi.y - lo.y) / g as f64);
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for a in 0..g {
        for b in 0..g {
            let x0 = lo.x + a as f64 * dx;
            let y0 = lo.y + b as f64 * dy;
            let cell = Polygon64::rectangle(x0, y0, x0 + dx, y0 + dy)?;
            let Some(piece) = cell.intersect(density.domain()) else {
                continue;
            };
            let m = density.integrate(&piece, &Quadratic::one());
            if m > 0.0 {
                let mx = density.integrate(&piece, &Quadratic::coordinate(0));
                let my = density.integrate(&piece, &Quadratic::coordinate(1));
                points.push(Point64::new(mx / m, my / m));
                masses.push(m);
            }
        }
    }
    Ok((Empirical64::from_planar(&points, masses)?, dx.hypot(dy)))
}

fn check_lp(p: &Problem) -> sdot::Result<CheckOutcome> {
    let model = TransportModel64::from_heights(
        p.sites.clone(),
        p.heights.clone(),
        p.density.clone(),
        p.result.converged(),
    )?;
    let w = match model.wasserstein(&p.density) {
        Ok(w) => w,
        Err(e) => return Ok(CheckOutcome::failed(Check::Lp, e.to_string())),
    };
    let (source, delta) = grid_discretization(&p.density, LP_GRID)?;
    let positions: Vec<Point64> = p.sites.iter().map(|s| s.position).collect();
    let target = Empirical64::from_planar(&positions, p.sites.iter().map(|s| s.mass).collect())?;
    let plan = lp_oracle(&source, &target, 2)?;
    let distance: f64 = plan
        .flows
        .iter()
        .map(|&(i, j, f)| {
            let (x, y) = (&source.points()[i], &target.points()[j]);
            f * (x[0] - y[0]).hypot(x[1] - y[1])
        })
        .sum();
    let gap = (w - plan.cost).abs();
    let bound = 2.0 * delta * distance;
    let passed = gap <= bound;
    Ok(CheckOutcome {
        check: Check::Lp,
        passed,
        message: if passed { "ok".into() } else { format!("gap {gap:e} exceeds {bound:e}") },
        details: json!({
            "grid": LP_GRID,
            "wasserstein": w,
            "lp_cost": plan.cost,
            "gap": gap,
            "bound": bound,
            "pivots": plan.pivots,
        }),
    })
}

fn run_check(check: Check, p: &Problem, args: &ValidateArgs) -> CliResult<CheckOutcome> {
    let outcome = match check {
        Check::Gradient => check_gradient(p),
        Check::Hessian => check_hessian(p),
        Check::Dualgap => check_dualgap(p),
        Check::Montecarlo => return check_montecarlo(p, args.n, args.seed),
        Check::Lp => check_lp(p),
    };
    // Library failures at the stored heights (e.g. an empty cell) fail the check.
    Ok(outcome.unwrap_or_else(|e| CheckOutcome::failed(check, e.to_string())))
}

pub fn run_validate(args: &ValidateArgs) -> CliResult<String> {
    let started = Instant::now();
    let input = Input::read(&args.result)?;
    let problem = Problem::new(ResultFile::load(&input)?)?;
    let checks = if args.checks.is_empty() { Check::ALL.to_vec() } else { args.checks.clone() };

    let outcomes = checks
        .iter()
        .map(|&c| run_check(c, &problem, args))
        .collect::<CliResult<Vec<_>>>()?;
    let passed = outcomes.iter().all(|o| o.passed);
    let report = json!({ "passed": passed, "checks": outcomes });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');

    let mut manifest = RunManifest::new("validate");
    manifest.seed = Some(args.seed);
    manifest
        .param("checks", &checks)
        .param("n", args.n)
        .param("out", &args.out)
        .input("result", &input);
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    emit(&args.out, text.as_bytes(), &manifest)?;

    if !passed {
        let failed: Vec<String> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| format!("{}: {}", o.check.name(), o.message))
            .collect();
        return Err(CliError::check(failed.join("; ")));
    }
    Ok(json!({ "passed": true, "checks": checks }).to_string())
}
