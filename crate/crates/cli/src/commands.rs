use entdomain::dynamics::{default_region, find_poles_with, PoleSet};
use entdomain::gaussian_info::{log_negativity, purity, reduced_nu, symplectic_spectrum, von_neumann_entropy, SymplecticSpectrum};
use entdomain::steady_state::{covariance_with, CovarianceMatrix};
use entdomain::topography::{linspace, line_sweep_with, sweep_map_with, Cell, LineRow, PointOutcome};
use entdomain::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, Task};
use crate::error::CliError;
use crate::output::{num, opt, to_json, Csv, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Clean,
    Partial,
}

pub struct Outcome {
    pub status: Status,
    /// Short human-readable verdict.
    pub headline: String,
    pub summary: Value,
}

pub fn run(task: &Task, cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    match task {
        Task::Poles => poles(cfg, sink),
        Task::Stability => stability(cfg, sink),
        Task::Covariance => covariance(cfg, sink),
        Task::Purity => purity_report(cfg, sink),
        Task::Map => map(cfg, sink),
        Task::Line => line(cfg, sink),
    }
}

fn pole_set(cfg: &RunConfig) -> Result<PoleSet, CliError> {
    let pair = cfg.pair()?;
    let opts = cfg.eval_options();
    let region = opts.region.unwrap_or_else(|| default_region(&pair));
    Ok(find_poles_with(&pair, &region, opts.stability_eps)?)
}

fn verdict(set: &PoleSet) -> String {
    format!(
        "{} margin={} poles={} upper_half={}",
        if set.stable { "STABLE" } else { "UNSTABLE" },
        num(set.margin),
        set.poles.iter().map(|p| p.multiplicity).sum::<usize>(),
        set.upper_count
    )
}

fn poles(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let set = pole_set(cfg)?;
    let body = match cfg.output.format {
        Format::Csv => {
            let mut csv = Csv::new(&["re_omega", "im_omega", "residual"]);
            for p in &set.poles {
                csv.row(&[num(p.omega.re), num(p.omega.im), num(p.residual)]);
            }
            csv.into_string()
        }
        Format::Json => to_json(&set)?,
    };
    sink.primary(&body)?;
    Ok(Outcome {
        status: Status::Clean,
        headline: verdict(&set),
        summary: json!({ "stable": set.stable, "margin": set.margin, "upper_count": set.upper_count, "pole_count": set.poles.len() }),
    })
}

fn stability(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let set = pole_set(cfg)?;
    let body = match cfg.output.format {
        Format::Csv => {
            let mut csv = Csv::new(&["stable", "margin", "upper_count"]);
            csv.row(&[(set.stable as u8).to_string(), num(set.margin), set.upper_count.to_string()]);
            csv.into_string()
        }
        Format::Json => to_json(&json!({ "stable": set.stable, "margin": set.margin, "upper_count": set.upper_count }))?,
    };
    sink.primary(&body)?;
    Ok(Outcome { status: Status::Clean, headline: verdict(&set), summary: json!({ "stable": set.stable, "margin": set.margin }) })
}

fn stable_covariance(cfg: &RunConfig) -> Result<CovarianceMatrix, CliError> {
    let set = pole_set(cfg)?;
    if !set.stable {
        eprintln!("refusing: no steady state exists ({})", verdict(&set));
        for p in set.poles.iter().filter(|p| p.omega.im > 0.0) {
            eprintln!("  runaway pole {} {}i", num(p.omega.re), num(p.omega.im));
        }
        return Err(Error::Unstable { upper_poles: set.upper_count, max_im: set.max_im().unwrap_or(0.0) }.into());
    }
    Ok(covariance_with(&cfg.pair()?, &set, &cfg.eval_options().covariance)?)
}

#[derive(Serialize)]
struct AtomState {
    atom: usize,
    nu: f64,
    purity: f64,
    entropy: f64,
}

fn atom_states(cov: &CovarianceMatrix) -> Result<[AtomState; 2], CliError> {
    let one = |atom: usize, block: [[f64; 2]; 2]| -> Result<AtomState, CliError> {
        let nu = reduced_nu(&block)?;
        Ok(AtomState { atom, nu, purity: purity(nu)?, entropy: von_neumann_entropy(nu)? })
    };
    Ok([one(1, cov.a())?, one(2, cov.b())?])
}

#[derive(Serialize)]
struct CovarianceReport {
    sigma: [[f64; 4]; 4],
    spectrum: SymplecticSpectrum,
    log_negativity: f64,
    atoms: [AtomState; 2],
}

fn covariance(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let cov = stable_covariance(cfg)?;
    let spectrum = symplectic_spectrum(&cov)?;
    let atoms = atom_states(&cov)?;
    let report = CovarianceReport { sigma: cov.sigma, spectrum, log_negativity: log_negativity(spectrum.pt_lambda_minus_sq), atoms };
    let body = match cfg.output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut csv = Csv::new(&["quantity", "value"]);
            for i in 0..4 {
                for j in 0..4 {
                    csv.row(&[format!("sigma_{i}{j}"), num(cov.sigma[i][j])]);
                }
            }
            let inv = &spectrum.invariants;
            for (k, v) in [
                ("i1", inv.i1),
                ("i2", inv.i2),
                ("i3", inv.i3),
                ("i4", inv.i4),
                ("delta", inv.delta),
                ("delta_pt", inv.delta_pt),
                ("det_sigma", inv.det),
                ("lambda_minus", spectrum.lambda_minus),
                ("lambda_plus", spectrum.lambda_plus),
                ("lambda_minus_sq_pt", spectrum.pt_lambda_minus_sq),
                ("log_negativity", report.log_negativity),
            ] {
                csv.row(&[k.to_string(), num(v)]);
            }
            for a in &report.atoms {
                csv.row(&[format!("nu{}", a.atom), num(a.nu)]);
                csv.row(&[format!("purity{}", a.atom), num(a.purity)]);
                csv.row(&[format!("entropy{}", a.atom), num(a.entropy)]);
            }
            csv.into_string()
        }
    };
    sink.primary(&body)?;
    Ok(Outcome {
        status: Status::Clean,
        headline: format!(
            "{} lambda_minus_sq_pt={}",
            if spectrum.entangled() { "ENTANGLED" } else { "SEPARABLE" },
            num(spectrum.pt_lambda_minus_sq)
        ),
        summary: json!({ "lambda_minus_sq_pt": spectrum.pt_lambda_minus_sq, "entangled": spectrum.entangled() }),
    })
}

fn purity_report(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let cov = stable_covariance(cfg)?;
    let atoms = atom_states(&cov)?;
    let body = match cfg.output.format {
        Format::Json => to_json(&atoms)?,
        Format::Csv => {
            let mut csv = Csv::new(&["atom", "nu", "purity", "entropy"]);
            for a in &atoms {
                csv.row(&[a.atom.to_string(), num(a.nu), num(a.purity), num(a.entropy)]);
            }
            csv.into_string()
        }
    };
    sink.primary(&body)?;
    Ok(Outcome {
        status: Status::Clean,
        headline: format!("purity1={} purity2={}", num(atoms[0].purity), num(atoms[1].purity)),
        summary: json!({ "purity1": atoms[0].purity, "purity2": atoms[1].purity }),
    })
}

fn failure_log<'a>(items: impl Iterator<Item = (String, &'a PointOutcome)>) -> String {
    let mut log = String::new();
    for (label, outcome) in items {
        if let PointOutcome::Failed { message, .. } = outcome {
            log.push_str(&format!("{label}: {message}\n"));
        }
    }
    log
}

fn map(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    if sink.is_stdout() {
        return Err(CliError::Config("the map task writes several files; set output path".into()));
    }
    let spec = cfg.grid()?;
    let map = sweep_map_with(&spec, &cfg.eval_options())?;
    let body = match cfg.output.format {
        Format::Json => to_json(&map.cells)?,
        Format::Csv => {
            let mut csv = Csv::new(&["rho", "z2", "lambda_minus_sq", "stable", "correlation", "purity2"]);
            for c in &map.cells {
                csv.row(&map_row(c));
            }
            csv.into_string()
        }
    };
    sink.primary(&body)?;
    sink.sidecar("contours.json", &to_json(&map.contours)?)?;
    sink.sidecar("metrics.json", &to_json(&map.metrics)?)?;
    let log = failure_log(map.cells.iter().map(|c| (format!("rho={} z2={}", num(c.rho), num(c.z2)), &c.outcome)));
    let status = if log.is_empty() { Status::Clean } else { Status::Partial };
    if !log.is_empty() {
        sink.sidecar("failures.log", &log)?;
    }
    let m = &map.metrics;
    Ok(Outcome {
        status,
        headline: format!(
            "entangled_cells={} unstable_cells={} failed_cells={} closed_contours={} effective_radius={}",
            m.entangled_cell_count,
            m.unstable_cell_count,
            m.failed_cell_count,
            map.contours.iter().filter(|c| c.is_closed()).count(),
            opt(m.effective_radius)
        ),
        summary: serde_json::to_value(m).unwrap_or(Value::Null),
    })
}

fn map_row(c: &Cell) -> Vec<String> {
    let (lam, stable, corr, pur) = match &c.outcome {
        PointOutcome::Stable(v) => (num(v.lambda_minus_sq), "1".to_string(), num(v.correlation), num(v.purity2)),
        PointOutcome::Unstable { .. } => (String::new(), "0".to_string(), String::new(), String::new()),
        PointOutcome::Failed { .. } => Default::default(),
    };
    vec![num(c.rho), num(c.z2), lam, stable, corr, pur]
}

fn line(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let t = &cfg.task;
    let values = linspace(t.from, t.to, t.count);
    let rows = line_sweep_with(&cfg.pair()?, cfg.axis()?, &values, &cfg.eval_options());
    let body = match cfg.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut csv = Csv::new(&["param", "chi2_sq", "correlation", "lambda_minus_sq", "purity2", "entropy2"]);
            for r in &rows {
                csv.row(&line_row(r));
            }
            csv.into_string()
        }
    };
    sink.primary(&body)?;
    let log = failure_log(rows.iter().map(|r| (format!("{}={}", t.axis, num(r.param)), &r.outcome)));
    let status = if log.is_empty() { Status::Clean } else { Status::Partial };
    if !log.is_empty() {
        eprint!("{log}");
        sink.sidecar("failures.log", &log)?;
    }
    let unstable = rows.iter().filter(|r| r.outcome.is_unstable()).count();
    Ok(Outcome {
        status,
        headline: format!("rows={} unstable_rows={unstable}", rows.len()),
        summary: json!({ "rows": rows.len(), "unstable_rows": unstable }),
    })
}

fn line_row(r: &LineRow) -> Vec<String> {
    match r.outcome.values() {
        Some(v) => vec![num(r.param), num(v.chi2_sq), num(v.correlation), num(v.lambda_minus_sq), num(v.purity2), num(v.entropy2)],
        None => {
            let mut row = vec![num(r.param)];
            row.extend(std::iter::repeat(String::new()).take(5));
            row
        }
    }
}
