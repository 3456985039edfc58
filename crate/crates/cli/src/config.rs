//! Run configuration: a sectioned TOML file, `ENTDOMAIN_*` environment
//! variables and `--set key=value` flags, applied in that order.
//!
//! Key names are unique across sections, so overrides may use either the
//! bare key (`z1=1.8`) or the qualified one (`physical.z1=1.8`).

use std::path::Path;

use entdomain::dynamics::{Region, DEFAULT_STABILITY_EPS};
use entdomain::quadrature::QuadOptions;
use entdomain::steady_state::CovarianceOptions;
use entdomain::topography::{AxisRange, EvalOptions, GridSpec, SweepParam};
use entdomain::{AtomPairConfig, AtomPosition, CutoffScheme, FieldState};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "ENTDOMAIN_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Poles,
    Stability,
    Covariance,
    Map,
    Line,
    Purity,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Poles => "poles",
            Task::Stability => "stability",
            Task::Covariance => "covariance",
            Task::Map => "map",
            Task::Line => "line",
            Task::Purity => "purity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physical {
    pub z1: f64,
    pub z2: f64,
    pub rho: f64,
    pub gamma: f64,
    pub omega_p: f64,
    pub mass: f64,
    /// Inverse temperature of the field; absent means vacuum.
    pub beta: Option<f64>,
}

impl Default for Physical {
    fn default() -> Self {
        Self { z1: 1.0, z2: 1.0, rho: 0.5, gamma: AtomPairConfig::DEFAULT_GAMMA, omega_p: 1.0, mass: 1.0, beta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub cutoff: f64,
    pub quad_rel_tol: f64,
    pub stability_eps: f64,
    /// `[re_min, re_max, im_min, im_max]`; absent means the per-config default.
    pub pole_region: Option<[f64; 4]>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            cutoff: CutoffScheme::DEFAULT_LAMBDA,
            quad_rel_tol: QuadOptions::default().rel_tol,
            stability_eps: DEFAULT_STABILITY_EPS,
            pole_region: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    pub kind: Task,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_count: usize,
    pub z2_min: f64,
    pub z2_max: f64,
    pub z2_count: usize,
    pub axis: String,
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Default for TaskSection {
    fn default() -> Self {
        let r = GridSpec::DEFAULT_RANGE;
        Self {
            kind: Task::Covariance,
            rho_min: r.min,
            rho_max: r.max,
            rho_count: r.count,
            z2_min: r.min,
            z2_max: r.max,
            z2_count: r.count,
            axis: "z2".into(),
            from: 0.02,
            to: 2.0,
            count: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    /// `-` writes to stdout.
    pub path: String,
    pub format: Format,
}

impl Default for Output {
    fn default() -> Self {
        Self { path: "-".into(), format: Format::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub physical: Physical,
    pub numerics: Numerics,
    pub task: TaskSection,
    pub output: Output,
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("physical", &["z1", "z2", "rho", "gamma", "omega_p", "mass", "beta"]),
    ("numerics", &["cutoff", "quad_rel_tol", "stability_eps", "pole_region"]),
    ("task", &["kind", "rho_min", "rho_max", "rho_count", "z2_min", "z2_max", "z2_count", "axis", "from", "to", "count"]),
    ("output", &["path", "format"]),
];

fn section_of(key: &str) -> Result<(&'static str, String), CliError> {
    if key == "task" {
        return Ok(("task", "kind".to_string()));
    }
    if let Some((sec, k)) = key.split_once('.') {
        return SECTIONS
            .iter()
            .find(|(s, keys)| *s == sec && keys.contains(&k))
            .map(|(s, _)| (*s, k.to_string()))
            .ok_or_else(|| CliError::Config(format!("unknown config key '{key}'")));
    }
    SECTIONS
        .iter()
        .find(|(_, keys)| keys.contains(&key))
        .map(|(s, _)| (*s, key.to_string()))
        .ok_or_else(|| CliError::Config(format!("unknown config key '{key}'")))
}

/// Parse an override value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => Value::String(raw.to_string()),
    }
}

pub struct Loader {
    table: Table,
}

impl Loader {
    pub fn new() -> Self {
        Self { table: Table::new() }
    }

    pub fn file(mut self, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let parsed: Table = text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (sec, body) in parsed {
            let Value::Table(body) = body else {
                return Err(CliError::Config(format!("top-level key '{sec}' must be a section")));
            };
            for (k, v) in body {
                self.set_value(&format!("{sec}.{k}"), v)?;
            }
        }
        Ok(self)
    }

    pub fn env(mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self, CliError> {
        let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        vars.sort();
        for (k, v) in vars {
            let key = k[ENV_PREFIX.len()..].to_ascii_lowercase().replacen("__", ".", 1);
            self.set_value(&key, parse_value(&v))?;
        }
        Ok(self)
    }

    pub fn set(mut self, assignment: &str) -> Result<Self, CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got '{assignment}'")))?;
        self.set_value(k.trim(), parse_value(v))?;
        Ok(self)
    }

    fn set_value(&mut self, key: &str, value: Value) -> Result<(), CliError> {
        let (sec, k) = section_of(key)?;
        let entry = self.table.entry(sec).or_insert_with(|| Value::Table(Table::new()));
        entry.as_table_mut().unwrap().insert(k, value);
        Ok(())
    }

    pub fn finish(self) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = Value::Table(self.table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.pair()?;
        let n = &self.numerics;
        if !(n.quad_rel_tol > 0.0 && n.quad_rel_tol < 1.0) {
            return Err(CliError::Config(format!("quad_rel_tol must be in (0, 1), got {}", n.quad_rel_tol)));
        }
        if !(n.stability_eps >= 0.0 && n.stability_eps.is_finite()) {
            return Err(CliError::Config(format!("stability_eps must be >= 0, got {}", n.stability_eps)));
        }
        if let Some(r) = n.pole_region {
            if !(r.iter().all(|x| x.is_finite()) && r[0] < r[1] && r[2] < r[3]) {
                return Err(CliError::Config(format!("pole_region must be [re_min, re_max, im_min, im_max], got {r:?}")));
            }
        }
        match self.task.kind {
            Task::Map => self.grid()?.validate()?,
            Task::Line => {
                self.axis()?;
                if self.task.count == 0 {
                    return Err(CliError::Config("count must be at least 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn pair(&self) -> Result<AtomPairConfig, CliError> {
        let p = &self.physical;
        let field = match p.beta {
            None => FieldState::Vacuum,
            Some(b) => FieldState::thermal(b)?,
        };
        let cfg = AtomPairConfig::new(AtomPosition::new(0.0, p.z1)?, AtomPosition::new(p.rho, p.z2)?)
            .with_gamma(p.gamma)
            .with_omega_p(p.omega_p)
            .with_mass(p.mass)
            .with_cutoff(self.numerics.cutoff)
            .with_field(field);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn eval_options(&self) -> EvalOptions {
        let n = &self.numerics;
        EvalOptions {
            region: n.pole_region.map(|r| Region::new(r[0], r[1], r[2], r[3])),
            stability_eps: n.stability_eps,
            covariance: CovarianceOptions { quad: QuadOptions { rel_tol: n.quad_rel_tol, ..QuadOptions::default() } },
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let t = &self.task;
        let spec = GridSpec {
            rho: AxisRange::new(t.rho_min, t.rho_max, t.rho_count),
            z2: AxisRange::new(t.z2_min, t.z2_max, t.z2_count),
            template: self.pair()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn axis(&self) -> Result<SweepParam, CliError> {
        Ok(self.task.axis.parse()?)
    }
}
