//! File formats. Every file is JSON; reals are written in shortest round-trip
//! decimal form and parsed with correct rounding, so `f64` values survive a
//! write/read cycle bit for bit.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sdot::genmodel::{GenerativeModel, LatentEmbedding};
use sdot::geometry::sites_with_equal_mass;
use sdot::{Density64, Diagram64, Heights64, Point64, Polygon64, Site64, SolverReport64, TransportModel64};

use crate::error::{CliError, CliResult};

pub type Xy = [f64; 2];

pub const DEFAULT_SEGMENTS: usize = 256;
pub const RESULT_FORMAT: &str = "sdot-result-v1";

/// Raw text of an input argument, either a file or inline JSON.
#[derive(Debug, Clone)]
pub struct Input {
    pub label: String,
    pub text: String,
}

impl Input {
    /// Arguments starting with `{` are inline JSON, anything else is a path.
    pub fn read(arg: &str) -> CliResult<Self> {
        if arg.trim_start().starts_with('{') {
            return Ok(Self {
                label: "<inline>".into(),
                text: arg.to_string(),
            });
        }
        let text = std::fs::read_to_string(arg).map_err(|e| CliError::io(Path::new(arg), e))?;
        Ok(Self {
            label: arg.to_string(),
            text,
        })
    }

    /// Deserializes the text, reporting line, column and field path on failure.
    pub fn parse<T: DeserializeOwned>(&self) -> CliResult<T> {
        let mut de = serde_json::Deserializer::from_str(&self.text);
        serde_path_to_error::deserialize(&mut de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            let mut e = CliError::input(inner.to_string()).in_file(&self.label);
            if inner.line() > 0 {
                e.line = Some(inner.line());
                e.column = Some(inner.column());
            }
            if path != "." {
                e.field = Some(path);
            }
            e
        })
    }

    fn invalid(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::input(message).in_file(&self.label).at_field(field)
    }
}

fn point(p: &Xy) -> Point64 {
    Point64::new(p[0], p[1])
}

fn xy(p: &Point64) -> Xy {
    [p.x, p.y]
}

/// `{"points": [[x, y], ...], "masses": [...], "decoder": [[x, y], ...]}`.
/// Masses default to equal shares of the source mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitesFile {
    pub points: Vec<Xy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<Vec<Xy>>,
}

impl SitesFile {
    pub fn load(input: &Input) -> CliResult<Self> {
        let file: Self = input.parse()?;
        if file.points.is_empty() {
            return Err(input.invalid("points", "at least one site is required"));
        }
        if let Some(k) = file.points.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(input.invalid(&format!("points[{k}]"), "coordinates must be finite"));
        }
        if let Some(m) = &file.masses {
            if m.len() != file.points.len() {
                return Err(input.invalid(
                    "masses",
                    format!("{} masses for {} points", m.len(), file.points.len()),
                ));
            }
            if let Some(k) = m.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(input.invalid(&format!("masses[{k}]"), "masses must be positive and finite"));
            }
        }
        if let Some(d) = &file.decoder {
            if d.len() != file.points.len() {
                return Err(input.invalid(
                    "decoder",
                    format!("{} decoder entries for {} points", d.len(), file.points.len()),
                ));
            }
        }
        Ok(file)
    }

    /// Sites whose masses are checked against (or default to) `total`.
    pub fn sites(&self, total: f64, input: &Input) -> CliResult<Vec<Site64>> {
        let positions: Vec<Point64> = self.points.iter().map(point).collect();
        match &self.masses {
            None => Ok(sites_with_equal_mass(&positions, total)),
            Some(m) => {
                let sum: f64 = m.iter().sum();
                if (sum - total).abs() > 1e-9 * total.abs() {
                    return Err(input.invalid(
                        "masses",
                        format!("masses sum to {sum} but the source has mass {total}"),
                    ));
                }
                Ok(positions.into_iter().zip(m).map(|(p, &w)| Site64::new(p, w)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: Xy,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
}

/// `{"polygon": [...]}`, `{"square": [xmin, ymin, xmax, ymax]}` or
/// `{"disk": {"center": [x, y], "radius": r, "segments": n}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Polygon(Vec<Xy>),
    Square([f64; 4]),
    Disk(DiskSpec),
}

/// A domain as a convex polygon, with the segment count used for a disk.
#[derive(Debug, Clone)]
pub struct Domain {
    pub polygon: Polygon64,
    pub segments: Option<usize>,
}

impl DomainSpec {
    /// Builds the polygon. `segments` overrides the disk's own segment count.
    pub fn resolve(input: &Input, segments: Option<usize>) -> CliResult<Domain> {
        let spec: Self = input.parse()?;
        let (polygon, used, field) = match &spec {
            DomainSpec::Polygon(v) => (Polygon64::new(v.iter().map(point).collect()), None, "polygon"),
            DomainSpec::Square([a, b, c, d]) => (Polygon64::rectangle(*a, *b, *c, *d), None, "square"),
            DomainSpec::Disk(disk) => {
                let n = segments.or(disk.segments).unwrap_or(DEFAULT_SEGMENTS);
                (Polygon64::regular(point(&disk.center), disk.radius, n), Some(n), "disk")
            }
        };
        let polygon = polygon.map_err(|e| input.invalid(field, e.to_string()))?;
        Ok(Domain {
            polygon,
            segments: used,
        })
    }
}

fn one() -> f64 {
    1.0
}

/// `{"uniform": {"mass": m}}` or
/// `{"piecewise": {"triangles": [[[x, y], [x, y], [x, y]], ...], "densities": [...]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform {
        #[serde(default = "one")]
        mass: f64,
    },
    Piecewise {
        triangles: Vec<[Xy; 3]>,
        densities: Vec<f64>,
    },
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec::Uniform { mass: 1.0 }
    }
}

impl DensitySpec {
    pub fn build(&self, domain: Polygon64) -> sdot::Result<Density64> {
        match self {
            DensitySpec::Uniform { mass } => Density64::uniform_with_mass(domain, *mass),
            DensitySpec::Piecewise { triangles, densities } => Density64::piecewise(
                domain,
                triangles.iter().map(|t| [point(&t[0]), point(&t[1]), point(&t[2])]).collect(),
                densities.clone(),
            ),
        }
    }

    pub fn resolve(input: Option<&Input>, domain: Polygon64) -> CliResult<(Self, Density64)> {
        let spec = match input {
            Some(i) => i.parse()?,
            None => Self::default(),
        };
        let density = spec.build(domain).map_err(|e| {
            let err = CliError::from(e);
            match input {
                Some(i) => err.in_file(&i.label),
                None => err,
            }
        })?;
        Ok((spec, density))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRecord {
    pub site: usize,
    pub measure: f64,
    /// `None` for an empty cell.
    pub vertices: Option<Vec<Xy>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub i: usize,
    pub j: usize,
    pub face_measure: f64,
    pub site_distance: f64,
    pub segment: [Xy; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub converged: bool,
    pub iterations: usize,
    pub initialization: String,
    pub gradient_inf_norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// Heights of every iterate before gauge normalization.
    pub trajectory: Vec<Vec<f64>>,
}

impl ReportRecord {
    pub fn from_report(report: &SolverReport64) -> Self {
        Self {
            converged: report.converged,
            iterations: report.iterations,
            initialization: format!("{:?}", report.initialization),
            gradient_inf_norm: report.gradient_inf_norm.clone(),
            energy: report.energy.clone(),
            step_sizes: report.step_sizes.clone(),
            trajectory: report.trajectory.iter().map(|h| h.0.clone()).collect(),
        }
    }
}

/// Output of `solve`: the full problem plus its solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub format: String,
    pub domain: Vec<Xy>,
    pub density: DensitySpec,
    /// Sites with their resolved masses.
    pub sites: SitesFile,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub heights: Vec<f64>,
    pub weights: Vec<f64>,
    pub cells: Vec<CellRecord>,
    pub dual_edges: Vec<EdgeRecord>,
    pub report: ReportRecord,
    pub transport_cost: f64,
    /// Present only for a converged solve.
    pub wasserstein: Option<f64>,
}

impl ResultFile {
    pub fn new(
        density_spec: DensitySpec,
        sites_file: &SitesFile,
        model: &TransportModel64,
        report: &SolverReport64,
        tolerance: f64,
        max_iterations: usize,
    ) -> Self {
        let sites = SitesFile {
            points: model.sites().iter().map(|s| xy(&s.position)).collect(),
            masses: Some(model.sites().iter().map(|s| s.mass).collect()),
            decoder: sites_file.decoder.clone(),
        };
        let diagram = model.diagram();
        Self {
            format: RESULT_FORMAT.into(),
            domain: model.density().domain().vertices().iter().map(xy).collect(),
            density: density_spec,
            sites,
            tolerance,
            max_iterations,
            heights: model.heights().0.clone(),
            weights: model.weights(),
            cells: cell_records(diagram),
            dual_edges: diagram
                .dual_edges
                .iter()
                .map(|e| EdgeRecord {
                    i: e.i,
                    j: e.j,
                    face_measure: e.face_measure,
                    site_distance: e.site_distance,
                    segment: [xy(&e.segment.0), xy(&e.segment.1)],
                })
                .collect(),
            report: ReportRecord::from_report(report),
            transport_cost: model.transport_cost(),
            wasserstein: model.wasserstein(model.density()).ok(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result values serialize");
        s.push('\n');
        s
    }

    pub fn load(input: &Input) -> CliResult<Self> {
        let file: Self = input.parse()?;
        if file.format != RESULT_FORMAT {
            return Err(input.invalid("format", format!("expected format {RESULT_FORMAT}")));
        }
        let k = file.sites.points.len();
        if file.sites.masses.as_ref().map(Vec::len) != Some(k) {
            return Err(input.invalid("sites.masses", "result files carry one mass per site"));
        }
        if file.heights.len() != k {
            return Err(input.invalid("heights", format!("{} heights for {k} sites", file.heights.len())));
        }
        if file.report.trajectory.iter().any(|h| h.len() != k) {
            return Err(input.invalid("report.trajectory", "every iterate needs one height per site"));
        }
        Ok(file)
    }

    pub fn converged(&self) -> bool {
        self.report.converged
    }

    pub fn site_list(&self) -> Vec<Site64> {
        let masses = self.sites.masses.as_deref().unwrap_or_default();
        self.sites
            .points
            .iter()
            .zip(masses)
            .map(|(p, &m)| Site64::new(point(p), m))
            .collect()
    }

    pub fn heights(&self) -> Heights64 {
        Heights64::new(self.heights.clone())
    }

    pub fn density(&self) -> CliResult<Density64> {
        let domain = Polygon64::new(self.domain.iter().map(point).collect())
            .map_err(|e| CliError::input(e.to_string()).at_field("domain"))?;
        self.density
            .build(domain)
            .map_err(|e| CliError::from(e).at_field("density"))
    }

    /// Transport model rebuilt from the stored heights.
    pub fn model(&self) -> CliResult<TransportModel64> {
        Ok(TransportModel64::from_heights(
            self.site_list(),
            self.heights(),
            self.density()?,
            self.converged(),
        )?)
    }

    /// Generative model with ζ = the source density and the stored decoder.
    pub fn generative(&self) -> CliResult<GenerativeModel<f64>> {
        let latent = self.sites.points.iter().map(point).collect();
        let decoder = self.sites.decoder.as_ref().map(|d| d.iter().map(point).collect());
        let embedding =
            LatentEmbedding::new(latent, decoder).map_err(|e| CliError::from(e).at_field("sites.points"))?;
        let zeta = self.density()?;
        let transport = self.model()?;
        Ok(GenerativeModel {
            embedding,
            zeta,
            transport,
        })
    }
}

pub fn cell_records(diagram: &Diagram64) -> Vec<CellRecord> {
    diagram
        .cells
        .iter()
        .map(|c| CellRecord {
            site: c.site_index,
            measure: c.measure,
            vertices: c.polygon.as_ref().map(|p| p.vertices().iter().map(xy).collect()),
        })
        .collect()
}
