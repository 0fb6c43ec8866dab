use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ids_lab_core::ids::{
    bloch_oracle, bracketing_bounds, exhaustion_estimate, self_averaging, trace_estimate, wegner_experiment,
    ExhaustionOptions, TraceOptions,
};
use ids_lab_core::lattice::FolnerSequence;
use ids_lab_core::{IdsError, Model};
use serde::Serialize;
use serde_json::json;

use crate::config::{experiment_seed, Experiment, ExperimentConfig};
use crate::output::{line_chart, num, opt, Series, Table};

#[derive(Debug)]
pub enum RunError {
    Estimator { experiment: String, error: IdsError },
    Io { experiment: String, error: std::io::Error },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Estimator { experiment, error } => write!(f, "experiment `{experiment}` failed: {error}"),
            RunError::Io { experiment, error } => write!(f, "experiment `{experiment}`: cannot write output: {error}"),
        }
    }
}

impl std::error::Error for RunError {}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub estimator: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub files: Vec<String>,
}

/// Files produced by one experiment, relative to the output directory.
struct Outputs<'a> {
    dir: &'a Path,
    hash: &'a str,
    plots: bool,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, file: String) -> PathBuf {
        let p = self.dir.join(&file);
        self.files.push(file);
        p
    }

    fn table(&mut self, file: String, t: &Table) -> std::io::Result<()> {
        let p = self.path(file);
        t.write(&p, self.hash)
    }

    fn json(&mut self, file: String, value: &serde_json::Value) -> std::io::Result<()> {
        let p = self.path(file);
        let mut text = serde_json::to_string_pretty(value).expect("json serializes");
        text.push('\n');
        std::fs::write(p, text)
    }

    fn svg(&mut self, file: String, make: impl FnOnce() -> String) -> std::io::Result<()> {
        if !self.plots {
            return Ok(());
        }
        let p = self.path(file);
        std::fs::write(p, make())
    }
}

pub fn run_all(config: &ExperimentConfig, experiments: &[Experiment], dir: &Path) -> Result<Vec<ExperimentRecord>, RunError> {
    let hash = config.hash();
    let mut records = Vec::with_capacity(experiments.len());
    for e in experiments {
        let name = e.name().to_string();
        let seed = experiment_seed(config.run.seed, &name);
        let started = Instant::now();
        let mut out = Outputs { dir, hash: &hash, plots: config.run.plots, files: Vec::new() };
        run_one(&config.model, e, seed, &mut out)?;
        records.push(ExperimentRecord {
            name,
            estimator: e.kind().to_string(),
            seed,
            wall_time_s: started.elapsed().as_secs_f64(),
            files: out.files,
        });
    }
    Ok(records)
}

enum Failure {
    Estimator(IdsError),
    Io(std::io::Error),
}

impl From<IdsError> for Failure {
    fn from(e: IdsError) -> Self {
        Failure::Estimator(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn run_one(model: &Model, e: &Experiment, seed: u64, out: &mut Outputs) -> Result<(), RunError> {
    let experiment = e.name().to_string();
    run_inner(model, e, seed, out).map_err(|f| match f {
        Failure::Estimator(error) => RunError::Estimator { experiment, error },
        Failure::Io(error) => RunError::Io { experiment, error },
    })
}

fn run_inner(model: &Model, e: &Experiment, seed: u64, out: &mut Outputs) -> Result<(), Failure> {
    let name = e.name();
    match e {
        Experiment::Ids { lambdas, radii, bc, oracle_theta, .. } => {
            let lambdas = lambdas.values();
            let seq = FolnerSequence::centered_boxes(model.dim(), radii)?;
            let opts = ExhaustionOptions { bc: *bc, ..Default::default() };
            let ex = exhaustion_estimate(model, seed, &seq, &lambdas, opts)?;
            let theta = oracle_theta.unwrap_or(if model.dim() == 1 { 4096 } else { 64 });
            let oracle = if model.is_periodic() { Some(bloch_oracle(model, &lambdas, theta)?) } else { None };

            let mut t = Table::new(&["j", "lambda", "N_value"]);
            for s in &ex.steps {
                for (l, v) in lambdas.iter().zip(&s.curve.values) {
                    t.push(vec![s.label.to_string(), num(*l), num(*v)]);
                }
            }
            out.table(format!("{name}.csv"), &t)?;

            let mut conv = Table::new(&["j", "cells", "volume", "boundary_ratio", "sup_step", "sup_error_oracle"]);
            let mut boundary_constant: Option<f64> = None;
            for (k, s) in ex.steps.iter().enumerate() {
                let err = oracle.as_ref().map(|o| s.curve.sup_distance(o));
                let bonds_per_volume = s.boundary_ratio * s.vertices as f64 / s.volume;
                if let Some(err) = err.filter(|_| bonds_per_volume > 0.0) {
                    let c = err / bonds_per_volume;
                    boundary_constant = Some(boundary_constant.map_or(c, |b| b.max(c)));
                }
                conv.push(vec![
                    s.label.to_string(),
                    s.cells.to_string(),
                    num(s.volume),
                    num(s.boundary_ratio),
                    opt(k.checked_sub(1).map(|p| ex.successive_sup[p])),
                    opt(err),
                ]);
            }
            out.table(format!("{name}.convergence.csv"), &conv)?;
            let sup = ex.tempered.sup_ratio;
            out.json(
                format!("{name}.summary.json"),
                &json!({
                    "boundary": bc,
                    "successive_sup": ex.successive_sup,
                    "suspected_atoms": ex.suspected_atoms,
                    "tempered_sup_ratio": *sup.numer() as f64 / *sup.denom() as f64,
                    "oracle_theta_samples": oracle.as_ref().map(|_| theta),
                    "boundary_constant": boundary_constant,
                }),
            )?;
            out.svg(format!("{name}.svg"), || {
                let mut series: Vec<Series> = ex
                    .steps
                    .iter()
                    .map(|s| Series::new(format!("j = {}", s.label), zip(&lambdas, &s.curve.values)))
                    .collect();
                if let Some(o) = &oracle {
                    series.push(Series::new("Bloch", zip(&lambdas, &o.values)).dashed());
                }
                line_chart(&format!("{name}: exhaustion"), "λ", "N(λ)", &series)
            })?;
        }
        Experiment::Oracle { lambdas, theta_samples, .. } => {
            let lambdas = lambdas.values();
            let curve = bloch_oracle(model, &lambdas, *theta_samples)?;
            let mut t = Table::new(&["lambda", "N_value", "theta_samples"]);
            for (l, v) in lambdas.iter().zip(&curve.values) {
                t.push(vec![num(*l), num(*v), theta_samples.to_string()]);
            }
            out.table(format!("{name}.csv"), &t)?;
            out.svg(format!("{name}.svg"), || {
                line_chart(&format!("{name}: Bloch"), "λ", "N(λ)", &[Series::new("Bloch", zip(&lambdas, &curve.values))])
            })?;
        }
        Experiment::Bracket { lambdas, samples, .. } => {
            let lambdas = lambdas.values();
            let b = bracketing_bounds(model, &lambdas, *samples, seed)?;
            let (lse, use_) = (b.lower.std_errors.clone().unwrap_or_default(), b.upper.std_errors.clone().unwrap_or_default());
            let mut t = Table::new(&["lambda", "lower", "lower_se", "upper", "upper_se"]);
            for k in 0..lambdas.len() {
                t.push(vec![num(lambdas[k]), num(b.lower.values[k]), num(lse[k]), num(b.upper.values[k]), num(use_[k])]);
            }
            out.table(format!("{name}.csv"), &t)?;
            out.svg(format!("{name}.svg"), || {
                line_chart(
                    &format!("{name}: bracketing"),
                    "λ",
                    "N(λ)",
                    &[
                        Series::new("doubled Dirichlet (lower)", zip(&lambdas, &b.lower.values)),
                        Series::new("Neumann (upper)", zip(&lambdas, &b.upper.values)),
                    ],
                )
            })?;
        }
        Experiment::Trace { lambdas, radius, samples, bc, .. } => {
            let lambdas = lambdas.values();
            let opts = TraceOptions { bc: *bc, ..Default::default() };
            let curve = trace_estimate(model, &lambdas, *radius, *samples, seed, opts)?;
            let se = curve.std_errors.clone().unwrap_or_default();
            let mut t = Table::new(&["lambda", "N_value", "se"]);
            for k in 0..lambdas.len() {
                t.push(vec![num(lambdas[k]), num(curve.values[k]), num(se[k])]);
            }
            out.table(format!("{name}.csv"), &t)?;
            out.svg(format!("{name}.svg"), || {
                line_chart(&format!("{name}: trace"), "λ", "N(λ)", &[Series::new(format!("j = {radius}"), zip(&lambdas, &curve.values))])
            })?;
        }
        Experiment::Wegner { energy, epsilons, sides, samples, .. } => {
            let table = wegner_experiment(model, *energy, epsilons, sides, *samples, seed)?;
            let mut t = Table::new(&["epsilon", "J_size", "mean_trace", "se", "n_samples"]);
            for r in &table.rows {
                t.push(vec![num(r.epsilon), r.cells.to_string(), num(r.mean_trace), num(r.std_error), r.samples.to_string()]);
            }
            out.table(format!("{name}.csv"), &t)?;
            out.json(format!("{name}.fit.json"), &json!({ "energy": table.energy, "fit": table.fit }))?;
            out.svg(format!("{name}.svg"), || {
                let f = &table.fit;
                let mut series = Vec::new();
                for chunk in table.rows.chunks(epsilons.len()) {
                    let cells = chunk[0].cells as f64;
                    let pts = chunk.iter().filter(|r| r.mean_trace > 0.0).map(|r| (r.epsilon.ln(), r.mean_trace.ln())).collect();
                    series.push(Series::new(format!("|J| = {cells}"), pts));
                    let fit = chunk.iter().map(|r| (r.epsilon.ln(), f.log_c + f.alpha * r.epsilon.ln() + f.beta * cells.ln())).collect();
                    series.push(Series::new(format!("fit |J| = {cells}"), fit).dashed());
                }
                line_chart(&format!("{name}: Wegner (α = {:.3}, β = {:.3})", f.alpha, f.beta), "ln ε", "ln E[tr P]", &series)
            })?;
        }
        Experiment::Selfavg { lambda, radii, samples, .. } => {
            let rows = self_averaging(model, *lambda, radii, *samples, seed)?;
            let mut t = Table::new(&["j", "lambda", "mean", "variance", "n_samples"]);
            for r in &rows {
                t.push(vec![r.radius.to_string(), num(r.lambda), num(r.mean), num(r.variance), r.samples.to_string()]);
            }
            out.table(format!("{name}.csv"), &t)?;
            out.svg(format!("{name}.svg"), || {
                let pts = rows.iter().map(|r| (r.radius as f64, r.variance)).collect();
                line_chart(&format!("{name}: self-averaging at λ = {lambda}"), "j", "Var N(λ)", &[Series::new("variance", pts)])
            })?;
        }
    }
    Ok(())
}

fn zip(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    x.iter().copied().zip(y.iter().copied()).collect()
}
