//! Parameter sweeps over atom-2 placements, masking of unstable placements,
//! level-set extraction and the size of the entanglement domain.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{default_region, find_poles_with, AtomPairConfig, Region, DEFAULT_STABILITY_EPS};
use crate::error::{require, Error, Result};
use crate::gaussian_info::{purity, symplectic_spectrum, von_neumann_entropy, reduced_nu};
use crate::geometry::AtomPosition;
use crate::steady_state::{covariance_with, CovarianceMatrix, CovarianceOptions};

/// Entanglement threshold on the PT discriminant.
pub const THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }

    fn validate(&self, name: &str) -> Result<()> {
        require(self.count >= 2, || format!("{name}: need at least 2 samples, got {}", self.count))?;
        require(self.min.is_finite() && self.min > 0.0, || format!("{name}: min must be > 0, got {}", self.min))?;
        require(self.max.is_finite() && self.max > self.min, || format!("{name}: max must exceed min"))
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Atom 1 stays where `template` puts it; atom 2 is placed at horizontal
/// offset `ρ` from atom 1 and height `z₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub rho: AxisRange,
    pub z2: AxisRange,
    pub template: AtomPairConfig,
}

impl GridSpec {
    pub const DEFAULT_RANGE: AxisRange = AxisRange { min: 0.02, max: 2.0, count: 100 };

    pub fn new(template: AtomPairConfig) -> Self {
        Self { rho: Self::DEFAULT_RANGE, z2: Self::DEFAULT_RANGE, template }
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.rho.count = n;
        self.z2.count = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.rho.validate("rho")?;
        self.z2.validate("z2")?;
        self.template.validate()
    }

    pub fn config_at(&self, rho: f64, z2: f64) -> Result<AtomPairConfig> {
        place_atom2(&self.template, rho, z2)
    }
}

fn place_atom2(template: &AtomPairConfig, rho: f64, z2: f64) -> Result<AtomPairConfig> {
    let mut cfg = *template;
    cfg.atom2 = AtomPosition::new(template.atom1.rho_offset() + rho, z2)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Everything reported for one stable configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointValues {
    pub stability_margin: f64,
    /// PT discriminant; entangled below 1/4.
    pub lambda_minus_sq: f64,
    /// Smaller symplectic eigenvalue of the state itself.
    pub state_lambda_minus: f64,
    pub correlation: f64,
    pub chi2_sq: f64,
    pub purity2: f64,
    pub entropy2: f64,
    #[serde(skip)]
    pub covariance: CovarianceMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointOutcome {
    Stable(PointValues),
    Unstable { stability_margin: f64, upper_count: usize },
    Failed { numerical: bool, message: String },
}

impl PointOutcome {
    pub fn values(&self) -> Option<&PointValues> {
        match self {
            PointOutcome::Stable(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_unstable(&self) -> bool {
        matches!(self, PointOutcome::Unstable { .. })
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, PointOutcome::Failed { .. })
    }

    pub fn stability_margin(&self) -> Option<f64> {
        match self {
            PointOutcome::Stable(v) => Some(v.stability_margin),
            PointOutcome::Unstable { stability_margin, .. } => Some(*stability_margin),
            PointOutcome::Failed { .. } => None,
        }
    }
}

fn failed(e: Error) -> PointOutcome {
    PointOutcome::Failed { numerical: e.is_numerical(), message: e.to_string() }
}

/// Numerical settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Pole-search rectangle; `None` uses the per-config default region.
    pub region: Option<Region>,
    pub stability_eps: f64,
    pub covariance: CovarianceOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { region: None, stability_eps: DEFAULT_STABILITY_EPS, covariance: CovarianceOptions::default() }
    }
}

/// Stability first, then covariance and the derived information quantities.
pub fn evaluate_point(config: &AtomPairConfig) -> PointOutcome {
    evaluate_point_with(config, &EvalOptions::default())
}

pub fn evaluate_point_with(config: &AtomPairConfig, opts: &EvalOptions) -> PointOutcome {
    let run = || -> Result<PointOutcome> {
        config.validate()?;
        let region = opts.region.unwrap_or_else(|| default_region(config));
        let poles = find_poles_with(config, &region, opts.stability_eps)?;
        if !poles.stable {
            return Ok(PointOutcome::Unstable { stability_margin: poles.margin, upper_count: poles.upper_count });
        }
        let cov = covariance_with(config, &poles, &opts.covariance)?;
        let spec = symplectic_spectrum(&cov)?;
        let nu2 = reduced_nu(&cov.b())?;
        Ok(PointOutcome::Stable(PointValues {
            stability_margin: poles.margin,
            lambda_minus_sq: spec.pt_lambda_minus_sq,
            state_lambda_minus: spec.lambda_minus,
            correlation: cov.correlation(),
            chi2_sq: cov.sigma[2][2],
            purity2: purity(nu2)?,
            entropy2: von_neumann_entropy(nu2)?,
            covariance: cov,
        }))
    };
    run().unwrap_or_else(failed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub rho: f64,
    pub z2: f64,
    pub outcome: PointOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainMetrics {
    pub entangled_cell_count: usize,
    pub unstable_cell_count: usize,
    pub failed_cell_count: usize,
    /// Absent when no closed entangled contour exists.
    pub area: Option<f64>,
    pub effective_radius: Option<f64>,
    /// Mean `(ρ, z₂)` of the entangled grid points.
    pub centroid: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainMap {
    pub grid: GridSpec,
    /// Row-major with `ρ` varying fastest: index `j * n_rho + i`.
    pub cells: Vec<Cell>,
    pub contours: Vec<Contour>,
    pub metrics: DomainMetrics,
}

impl DomainMap {
    pub fn cell(&self, i_rho: usize, j_z2: usize) -> &Cell {
        &self.cells[j_z2 * self.grid.rho.count + i_rho]
    }

    /// `λ₋²` on the grid with unstable and failed cells masked.
    pub fn field(&self) -> ScalarGrid {
        ScalarGrid {
            xs: self.grid.rho.values(),
            ys: self.grid.z2.values(),
            values: self.cells.iter().map(|c| c.outcome.values().map(|v| v.lambda_minus_sq)).collect(),
            // the map is symmetric under ρ → −ρ
            mirror_axis: Some(0.0),
        }
    }

    pub fn failed_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.outcome.is_failed())
    }
}

pub fn sweep_map(spec: &GridSpec) -> Result<DomainMap> {
    sweep_map_with(spec, &EvalOptions::default())
}

pub fn sweep_map_with(spec: &GridSpec, opts: &EvalOptions) -> Result<DomainMap> {
    spec.validate()?;
    let rhos = spec.rho.values();
    let zs = spec.z2.values();
    let n = rhos.len();
    let cells: Vec<Cell> = (0..rhos.len() * zs.len())
        .into_par_iter()
        .map(|k| {
            let (rho, z2) = (rhos[k % n], zs[k / n]);
            let outcome = match spec.config_at(rho, z2) {
                Ok(cfg) => evaluate_point_with(&cfg, opts),
                Err(e) => failed(e),
            };
            Cell { rho, z2, outcome }
        })
        .collect();
    let mut map = DomainMap {
        grid: *spec,
        cells,
        contours: vec![],
        metrics: DomainMetrics {
            entangled_cell_count: 0,
            unstable_cell_count: 0,
            failed_cell_count: 0,
            area: None,
            effective_radius: None,
            centroid: None,
        },
    };
    let field = map.field();
    map.contours = extract_contour(&field, THRESHOLD);
    let entangled: Vec<&Cell> =
        map.cells.iter().filter(|c| c.outcome.values().is_some_and(|v| v.lambda_minus_sq < THRESHOLD)).collect();
    let radius = domain_radius_of(&field, &map.contours).ok();
    map.metrics = DomainMetrics {
        entangled_cell_count: entangled.len(),
        unstable_cell_count: map.cells.iter().filter(|c| c.outcome.is_unstable()).count(),
        failed_cell_count: map.failed_cells().count(),
        area: radius.map(|r| r.area),
        effective_radius: radius.map(|r| r.effective_radius),
        centroid: (!entangled.is_empty()).then(|| {
            let k = entangled.len() as f64;
            (entangled.iter().map(|c| c.rho).sum::<f64>() / k, entangled.iter().map(|c| c.z2).sum::<f64>() / k)
        }),
    };
    Ok(map)
}

/// Scalar samples on a rectilinear grid; `None` marks masked points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, `x` fastest.
    pub values: Vec<Option<f64>>,
    /// Mirror line `x = a` of the underlying field. Open contours with both
    /// ends on the `x = xs[0]` edge are closed through their mirror image.
    pub mirror_axis: Option<f64>,
}

impl ScalarGrid {
    pub fn from_fn(xs: Vec<f64>, ys: Vec<f64>, f: impl Fn(f64, f64) -> Option<f64>) -> Self {
        let values = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { xs, ys, values, mirror_axis: None }
    }

    fn at(&self, i: usize, j: usize) -> Option<f64> {
        self.values[j * self.xs.len() + i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    Closed,
    /// Closed through the mirror image across the grid's symmetry axis.
    AxisClosed,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    /// Points in grid coordinates, oriented with lower values on the left.
    pub points: Vec<(f64, f64)>,
    pub kind: ContourKind,
    /// Signed enclosed area: positive when the enclosed values are below the level.
    pub area: Option<f64>,
}

impl Contour {
    pub fn is_closed(&self) -> bool {
        self.kind != ContourKind::Open
    }

    /// Closed outline; axis-closed contours include the mirrored half.
    pub fn outline(&self, axis: Option<f64>) -> Vec<(f64, f64)> {
        match (self.kind, axis) {
            (ContourKind::AxisClosed, Some(a)) => {
                let mut pts = self.points.clone();
                pts.extend(self.points.iter().rev().map(|&(x, y)| (2.0 * a - x, y)));
                pts
            }
            _ => self.points.clone(),
        }
    }

    pub fn contains(&self, axis: Option<f64>, p: (f64, f64)) -> bool {
        self.is_closed() && point_in_polygon(&self.outline(axis), p)
    }
}

fn shoelace(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    (0..n).map(|k| {
        let (a, b) = (pts[k], pts[(k + 1) % n]);
        a.0 * b.1 - b.0 * a.1
    })
    .sum::<f64>()
        * 0.5
}

fn point_in_polygon(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut inside = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1) {
            inside = !inside;
        }
    }
    inside
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// between nodes (i, j) and (i + 1, j)
    H(usize, usize),
    /// between nodes (i, j) and (i, j + 1)
    V(usize, usize),
}

/// Marching squares at `level`, with linear interpolation along cell edges.
/// Squares touching a masked point produce no segments, so open contours
/// end on the grid boundary or at the mask.
pub fn extract_contour(grid: &ScalarGrid, level: f64) -> Vec<Contour> {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    if nx < 2 || ny < 2 {
        return vec![];
    }
    let below = |v: f64| v < level;
    let point = |e: Edge| -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (v0, v1) = (grid.at(i0, j0).unwrap(), grid.at(i1, j1).unwrap());
        let t = (level - v0) / (v1 - v0);
        let (x0, y0, x1, y1) = (grid.xs[i0], grid.ys[j0], grid.xs[i1], grid.ys[j1]);
        (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    };

    // directed segments (from, to), lower values on the left
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [grid.at(i, j), grid.at(i + 1, j), grid.at(i + 1, j + 1), grid.at(i, j + 1)];
            let Some(v) = corners.iter().copied().collect::<Option<Vec<f64>>>() else {
                continue;
            };
            let b: Vec<bool> = v.iter().map(|&x| below(x)).collect();
            // edge k runs from corner k to corner k + 1, counter-clockwise
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let crossed: Vec<usize> = (0..4).filter(|&k| b[k] != b[(k + 1) % 4]).collect();
            let pairs: Vec<(usize, usize)> = match crossed.len() {
                2 => vec![(crossed[0], crossed[1])],
                4 => {
                    let center_below = below(0.25 * v.iter().sum::<f64>());
                    // isolate the corners whose class differs from the centre
                    if b[1] != center_below {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
                _ => vec![],
            };
            for (ea, eb) in pairs {
                // corners on the counter-clockwise arc from edge ea to edge eb
                // lie to the right of the segment ea → eb
                let arc_corner = (ea + 1) % 4;
                if b[arc_corner] {
                    segments.push((edges[eb], edges[ea]));
                } else {
                    segments.push((edges[ea], edges[eb]));
                }
            }
        }
    }

    let by_start: HashMap<Edge, usize> = segments.iter().enumerate().map(|(k, s)| (s.0, k)).collect();
    let by_end: HashMap<Edge, usize> = segments.iter().enumerate().map(|(k, s)| (s.1, k)).collect();
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for k0 in 0..segments.len() {
        if used[k0] {
            continue;
        }
        // walk back to the start of an open chain, or once around a loop
        let mut first = k0;
        let mut closed = false;
        while let Some(&prev) = by_end.get(&segments[first].0) {
            if prev == k0 {
                closed = true;
                break;
            }
            first = prev;
        }
        let mut edges = vec![segments[first].0];
        let mut k = first;
        loop {
            used[k] = true;
            let end = segments[k].1;
            match by_start.get(&end) {
                Some(&next) if !used[next] => {
                    edges.push(end);
                    k = next;
                }
                _ => {
                    if !closed {
                        edges.push(end);
                    }
                    break;
                }
            }
        }
        let points: Vec<(f64, f64)> = edges.iter().map(|&e| point(e)).collect();
        let on_axis_edge = |e: &Edge| matches!(e, Edge::V(0, _));
        let (kind, area) = if closed {
            (ContourKind::Closed, Some(shoelace(&points)))
        } else if grid.mirror_axis.is_some() && on_axis_edge(&edges[0]) && on_axis_edge(edges.last().unwrap()) {
            let c = Contour { points: points.clone(), kind: ContourKind::AxisClosed, area: None };
            (ContourKind::AxisClosed, Some(shoelace(&c.outline(grid.mirror_axis))))
        } else {
            (ContourKind::Open, None)
        };
        out.push(Contour { points, kind, area });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainRadius {
    pub area: f64,
    pub effective_radius: f64,
}

/// Area enclosed by the closed level curves (holes of higher values count
/// negatively) minus masked points inside, and `sqrt(area / π)`.
pub fn domain_radius(map: &DomainMap) -> Result<DomainRadius> {
    domain_radius_of(&map.field(), &map.contours)
}

pub fn domain_radius_of(grid: &ScalarGrid, contours: &[Contour]) -> Result<DomainRadius> {
    let closed: Vec<&Contour> = contours.iter().filter(|c| c.is_closed()).collect();
    if !closed.iter().any(|c| c.area.unwrap_or(0.0) > 0.0) {
        return Err(Error::NoClosedContour(format!(
            "{} contour(s), none closed around a region below the level",
            contours.len()
        )));
    }
    let mut area: f64 = closed.iter().filter_map(|c| c.area).sum();

    // masked points inside entangled outlines, each standing for one grid cell
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let dx = (grid.xs[nx - 1] - grid.xs[0]) / (nx - 1) as f64;
    let dy = (grid.ys[ny - 1] - grid.ys[0]) / (ny - 1) as f64;
    for c in closed.iter().filter(|c| c.area.unwrap_or(0.0) > 0.0) {
        let outline = c.outline(grid.mirror_axis);
        let weight = if c.kind == ContourKind::AxisClosed { 2.0 } else { 1.0 };
        for j in 0..ny {
            for i in 0..nx {
                if grid.at(i, j).is_none() && point_in_polygon(&outline, (grid.xs[i], grid.ys[j])) {
                    area -= weight * dx * dy;
                }
            }
        }
    }
    let area = area.max(0.0);
    Ok(DomainRadius { area, effective_radius: (area / std::f64::consts::PI).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Z1,
    Z2,
    Rho,
    Gamma,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z1" => Ok(SweepParam::Z1),
            "z2" => Ok(SweepParam::Z2),
            "rho" => Ok(SweepParam::Rho),
            "gamma" => Ok(SweepParam::Gamma),
            _ => Err(Error::InvalidParameter(format!("unknown sweep axis '{s}' (expected z1, z2, rho or gamma)"))),
        }
    }
}

pub fn apply_param(template: &AtomPairConfig, param: SweepParam, value: f64) -> Result<AtomPairConfig> {
    let mut cfg = *template;
    match param {
        SweepParam::Z1 => cfg.atom1 = AtomPosition::new(template.atom1.rho_offset(), value)?,
        SweepParam::Z2 => cfg.atom2 = AtomPosition::new(template.atom2.rho_offset(), value)?,
        SweepParam::Rho => cfg.atom2 = AtomPosition::new(template.atom1.rho_offset() + value, template.atom2.z())?,
        SweepParam::Gamma => cfg.gamma = value,
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineRow {
    pub param: f64,
    pub outcome: PointOutcome,
}

/// One row per value of `param`, in input order.
pub fn line_sweep(template: &AtomPairConfig, param: SweepParam, values: &[f64]) -> Vec<LineRow> {
    line_sweep_with(template, param, values, &EvalOptions::default())
}

pub fn line_sweep_with(template: &AtomPairConfig, param: SweepParam, values: &[f64], opts: &EvalOptions) -> Vec<LineRow> {
    values
        .par_iter()
        .map(|&v| LineRow {
            param: v,
            outcome: match apply_param(template, param, v) {
                Ok(cfg) => evaluate_point_with(&cfg, opts),
                Err(e) => failed(e),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn radial(n: usize) -> ScalarGrid {
        let xs = linspace(-2.0, 2.0, n);
        ScalarGrid::from_fn(xs.clone(), xs, |x, y| Some((x * x + y * y) / 4.0))
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.02, 2.0, 100);
        assert_eq!(v.len(), 100);
        assert_eq!(v[0], 0.02);
        assert_eq!(v[99], 2.0);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn uniform_field_has_no_contour() {
        let xs = linspace(0.0, 1.0, 10);
        let g = ScalarGrid::from_fn(xs.clone(), xs, |_, _| Some(0.3));
        assert!(extract_contour(&g, 0.25).is_empty());
    }

    #[test]
    fn circle_is_recovered() {
        let g = radial(100);
        let cs = extract_contour(&g, 0.25);
        assert_eq!(cs.len(), 1);
        let c = &cs[0];
        assert_eq!(c.kind, ContourKind::Closed);
        assert_relative_eq!(c.area.unwrap(), std::f64::consts::PI, max_relative = 2e-2);
        for &(x, y) in &c.points {
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 2e-2);
        }
        let r = domain_radius_of(&g, &cs).unwrap();
        assert_relative_eq!(r.effective_radius, 1.0, max_relative = 2e-2);
    }

    #[test]
    fn island_of_high_values_is_clockwise() {
        let xs = linspace(-2.0, 2.0, 60);
        let g = ScalarGrid::from_fn(xs.clone(), xs, |x, y| Some(1.0 - (x * x + y * y) / 4.0));
        let cs = extract_contour(&g, 0.75);
        assert_eq!(cs.len(), 1);
        assert!(cs[0].area.unwrap() < 0.0);
        assert!(domain_radius_of(&g, &cs).is_err());
    }

    #[test]
    fn contour_stops_at_mask() {
        let xs = linspace(-2.0, 2.0, 80);
        let g = ScalarGrid::from_fn(xs.clone(), xs, |x, y| (x > 0.3 || y.abs() > 0.5).then_some((x * x + y * y) / 4.0));
        let cs = extract_contour(&g, 0.25);
        assert!(!cs.is_empty());
        for c in &cs {
            assert_eq!(c.kind, ContourKind::Open);
            for &(x, y) in &c.points {
                assert!(!(x < 0.3 - 0.06 && y.abs() < 0.5 - 0.06), "point ({x}, {y}) inside the mask");
            }
        }
    }

    #[test]
    fn half_disc_closes_through_mirror() {
        let xs = linspace(0.02, 2.0, 100);
        let ys = linspace(-2.0, 2.0, 200);
        let mut g = ScalarGrid::from_fn(xs, ys, |x, y| Some((x * x + y * y) / 4.0));
        g.mirror_axis = Some(0.0);
        let cs = extract_contour(&g, 0.25);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].kind, ContourKind::AxisClosed);
        assert_relative_eq!(cs[0].area.unwrap(), std::f64::consts::PI, max_relative = 2e-2);
        assert!(cs[0].contains(g.mirror_axis, (0.0, 0.0)));
        assert!(cs[0].contains(g.mirror_axis, (-0.5, 0.1)));
    }

    #[test]
    fn masked_hole_is_subtracted() {
        let xs = linspace(-2.0, 2.0, 200);
        let g = ScalarGrid::from_fn(xs.clone(), xs, |x, y| {
            let r2 = x * x + y * y;
            (r2 > 0.25).then_some(r2 / 4.0)
        });
        let cs = extract_contour(&g, 0.25);
        let r = domain_radius_of(&g, &cs).unwrap();
        let want = std::f64::consts::PI * (1.0 - 0.25);
        assert_relative_eq!(r.area, want, max_relative = 3e-2);
    }

    #[test]
    fn saddle_cells_give_consistent_chains() {
        let xs = linspace(-3.0, 3.0, 61);
        let g = ScalarGrid::from_fn(xs.clone(), xs, |x, y| Some((x * 2.0).sin() * (y * 2.0).sin()));
        for c in extract_contour(&g, 0.0) {
            for w in c.points.windows(2) {
                let d = ((w[0].0 - w[1].0).powi(2) + (w[0].1 - w[1].1).powi(2)).sqrt();
                assert!(d < 0.15, "jump of {d} inside a chain");
            }
        }
    }

    #[test]
    fn grid_spec_validation() {
        let t = AtomPairConfig::from_geometry(1.0, 1.0, 0.5).unwrap();
        let mut g = GridSpec::new(t).with_resolution(2);
        assert!(g.validate().is_ok());
        g.rho.min = 0.0;
        assert!(g.validate().is_err());
        let mut g = GridSpec::new(t).with_resolution(1);
        assert!(g.validate().is_err());
        g.rho.count = 2;
        assert!(g.validate().is_err());
    }

    #[test]
    fn sweep_param_parsing_and_application() {
        let t = AtomPairConfig::from_geometry(1.0, 1.0, 0.5).unwrap();
        let c = apply_param(&t, "z2".parse().unwrap(), 0.3).unwrap();
        assert_eq!(c.atom2.z(), 0.3);
        let c = apply_param(&t, SweepParam::Rho, 0.7).unwrap();
        assert_eq!(c.rho(), 0.7);
        let c = apply_param(&t, SweepParam::Gamma, 0.2).unwrap();
        assert_eq!(c.gamma, 0.2);
        assert!("x".parse::<SweepParam>().is_err());
        assert!(apply_param(&t, SweepParam::Z1, -1.0).is_err());
    }

    #[test]
    fn single_point_line_matches_direct_evaluation() {
        let t = AtomPairConfig::from_geometry(1.0, 1.0, 0.4).unwrap();
        let rows = line_sweep(&t, SweepParam::Rho, &[0.4]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].outcome, evaluate_point(&t));
        let v = rows[0].outcome.values().unwrap();
        let cov = crate::steady_state::covariance(&t).unwrap();
        assert_eq!(v.correlation, cov.correlation());
    }
}
