use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sdot::potential::u_eval;
use sdot::{Point64, TransportModel64};

use crate::error::CliResult;
use crate::formats::{Input, ResultFile, Xy};
use crate::manifest::{emit, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    /// Domain, power cells colored by site index, and site markers
    Diagram,
    /// Heat map of the Brenier potential sampled on a grid
    Potential,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Result file written by `solve`
    pub result: String,
    #[arg(long, value_enum, default_value_t = RenderMode::Diagram)]
    pub mode: RenderMode,
    /// Grid resolution per axis for the potential heat map
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

const CANVAS: f64 = 800.0;

/// Maps data coordinates to an SVG canvas with the y axis pointing up.
struct View {
    lo: Point64,
    scale: f64,
    height: f64,
}

impl View {
    fn new(points: impl Iterator<Item = Point64>) -> Self {
        let (mut lo, mut hi) = (Point64::new(f64::MAX, f64::MAX), Point64::new(f64::MIN, f64::MIN));
        for p in points {
            lo = Point64::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point64::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let pad = 0.03 * span;
        let lo = Point64::new(lo.x - pad, lo.y - pad);
        let scale = CANVAS / (span + 2.0 * pad);
        let height = ((hi.y - lo.y + pad) * scale).ceil();
        Self { lo, scale, height }
    }

    fn map(&self, p: &Point64) -> (f64, f64) {
        let x = (p.x - self.lo.x) * self.scale;
        let y = self.height - (p.y - self.lo.y) * self.scale;
        (round(x), round(y))
    }

    fn points_attr(&self, pts: &[Point64]) -> String {
        pts.iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x},{y}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn round(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn to_point(p: &Xy) -> Point64 {
    Point64::new(p[0], p[1])
}

/// Distinct hue per index by golden-angle stepping.
fn site_color(i: usize) -> String {
    let hue = (i as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({:.1},65%,62%)", hue)
}

/// Five-stop blue-to-yellow ramp for `t ∈ [0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [[f64; 3]; 5] = [
        [68.0, 1.0, 84.0],
        [59.0, 82.0, 139.0],
        [33.0, 145.0, 140.0],
        [94.0, 201.0, 98.0],
        [253.0, 231.0, 37.0],
    ];
    let s = t.clamp(0.0, 1.0) * 4.0;
    let k = (s.floor() as usize).min(3);
    let f = s - k as f64;
    let c: Vec<u8> = (0..3)
        .map(|a| (STOPS[k][a] + f * (STOPS[k + 1][a] - STOPS[k][a])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn header(view: &View, metadata: &serde_json::Value) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS}\" height=\"{}\" viewBox=\"0 0 {CANVAS} {}\">",
        view.height, view.height
    )
    .unwrap();
    let meta = metadata.to_string().replace('&', "&amp;").replace('<', "&lt;");
    writeln!(s, "<metadata id=\"sdot\">{meta}</metadata>").unwrap();
    s
}

fn domain_outline(view: &View, result: &ResultFile, fill: &str) -> String {
    let pts: Vec<Point64> = result.domain.iter().map(to_point).collect();
    format!(
        "<polygon class=\"domain\" points=\"{}\" fill=\"{fill}\" stroke=\"#222\" stroke-width=\"1.5\"/>\n",
        view.points_attr(&pts)
    )
}

/// Cells of nonzero measure as polygons; empty cells are listed in the metadata.
pub fn render_diagram(result: &ResultFile) -> String {
    let domain: Vec<Point64> = result.domain.iter().map(to_point).collect();
    let sites: Vec<Point64> = result.sites.points.iter().map(to_point).collect();
    let view = View::new(domain.iter().chain(&sites).copied());

    let drawn: Vec<_> = result
        .cells
        .iter()
        .filter_map(|c| c.vertices.as_ref().map(|v| (c, v)))
        .collect();
    let empty: Vec<usize> = result.cells.iter().filter(|c| c.vertices.is_none()).map(|c| c.site).collect();
    let metadata = json!({
        "mode": "diagram",
        "cells": drawn.len(),
        "sites": sites.len(),
        "empty_cells": empty,
        "measures": result.cells.iter().map(|c| c.measure).collect::<Vec<_>>(),
    });

    let mut s = header(&view, &metadata);
    s.push_str(&domain_outline(&view, result, "#f4f4f4"));
    for (cell, vertices) in drawn {
        let pts: Vec<Point64> = vertices.iter().map(to_point).collect();
        writeln!(
            s,
            "<polygon class=\"cell\" data-site=\"{}\" points=\"{}\" fill=\"{}\" stroke=\"#333\" stroke-width=\"0.5\"/>",
            cell.site,
            view.points_attr(&pts),
            site_color(cell.site)
        )
        .unwrap();
    }
    for (i, p) in sites.iter().enumerate() {
        let (x, y) = view.map(p);
        writeln!(
            s,
            "<circle class=\"site\" data-site=\"{i}\" cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{}\" stroke=\"#000\" stroke-width=\"0.8\"/>",
            site_color(i)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// `u_h` evaluated at the centers of an `n × n` grid over the domain's bounding box.
pub fn render_potential(result: &ResultFile, model: &TransportModel64, n: usize) -> String {
    let domain = model.density().domain();
    let (lo, hi) = domain.bounding_box();
    let view = View::new(domain.vertices().iter().copied());
    let n = n.max(1);
    let (dx, dy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
    let mut samples = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let c = Point64::new(lo.x + (a as f64 + 0.5) * dx, lo.y + (b as f64 + 0.5) * dy);
            if domain.contains(&c, 0.0) {
                samples.push((a, b, u_eval(model.potential(), &c).0));
            }
        }
    }
    let min = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let max = samples.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    let metadata = json!({
        "mode": "potential",
        "grid": n,
        "samples": samples.len(),
        "min": min,
        "max": max,
    });

    let mut s = header(&view, &metadata);
    s.push_str(&domain_outline(&view, result, "none"));
    let (w, h) = (round(dx * view.scale), round(dy * view.scale));
    for (a, b, u) in &samples {
        let corner = Point64::new(lo.x + *a as f64 * dx, lo.y + (*b + 1) as f64 * dy);
        let (x, y) = view.map(&corner);
        let t = if max > min { (u - min) / (max - min) } else { 0.5 };
        writeln!(s, "<rect class=\"sample\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{}\"/>", ramp(t)).unwrap();
    }
    s.push_str(&domain_outline(&view, result, "none"));
    s.push_str("</svg>\n");
    s
}

pub fn run_render(args: &RenderArgs) -> CliResult<String> {
    let started = Instant::now();
    let input = Input::read(&args.result)?;
    let result = ResultFile::load(&input)?;
    let svg = match args.mode {
        RenderMode::Diagram => render_diagram(&result),
        RenderMode::Potential => render_potential(&result, &result.model()?, args.n),
    };
    let mut manifest = RunManifest::new("render");
    manifest
        .param("mode", args.mode)
        .param("n", args.n)
        .param("out", &args.out)
        .input("result", &input);
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    emit(&args.out, svg.as_bytes(), &manifest)?;
    Ok(json!({ "mode": args.mode, "bytes": svg.len() }).to_string())
}
