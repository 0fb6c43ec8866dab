//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string, or throws a string describing the
//! error.

use ids_lab_core::ids::{
    bloch_oracle, bracketing_bounds, exhaustion_estimate, linspace, wegner_experiment, ExhaustionOptions,
};
use ids_lab_core::lattice::FolnerSequence;
use ids_lab_core::{DistributionSpec, FundamentalCell, IdsError, Model};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const GRID_POINTS: usize = 121;

fn cell(lattice: &str) -> Result<FundamentalCell, String> {
    match lattice {
        "line" => Ok(FundamentalCell::hypercubic(1)),
        "ladder" => Ok(FundamentalCell::ladder()),
        "square" => Ok(FundamentalCell::hypercubic(2)),
        other => Err(format!("unknown lattice `{other}` (expected line, ladder or square)")),
    }
}

/// Free Laplacian plus couplings uniform on `[0, disorder]` times the cell
/// indicator; `disorder = 0` gives the periodic model.
fn model(lattice: &str, disorder: f64) -> Result<Model, String> {
    let c = cell(lattice)?;
    if !(disorder >= 0.0 && disorder.is_finite()) {
        return Err("disorder must be a nonnegative number".into());
    }
    if disorder == 0.0 {
        return Ok(Model::free(c));
    }
    Model::alloy(c, DistributionSpec::Uniform { a: 0.0, b: disorder }, 1.0).map_err(err)
}

fn err(e: IdsError) -> String {
    e.to_string()
}

/// Upper end of the spectrum: twice the maximal degree plus the coupling.
fn top(lattice: &str, disorder: f64) -> f64 {
    let degree = match lattice {
        "square" => 4.0,
        "ladder" => 3.0,
        _ => 2.0,
    };
    2.0 * degree + disorder
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

#[derive(Serialize)]
struct Curves {
    lambdas: Vec<f64>,
    /// One counting function per radius.
    exhaustion: Vec<Step>,
    /// Bloch IDS of the disorder-free model on the same cell.
    bloch: Vec<f64>,
}

#[derive(Serialize)]
struct Step {
    radius: u32,
    vertices: usize,
    values: Vec<f64>,
}

/// Exhaustion on centered boxes of radius `1, 2, 4, ..` up to `max_radius`
/// for one realization, together with the periodic reference curve.
#[wasm_bindgen]
pub fn ids_curves(lattice: &str, disorder: f64, max_radius: u32, seed: u32) -> Result<String, String> {
    let m = model(lattice, disorder)?;
    let limit = if m.dim() == 2 { 24 } else { 400 };
    if max_radius == 0 || max_radius > limit {
        return Err(format!("radius must be between 1 and {limit} for this lattice"));
    }
    let mut radii: Vec<u32> = std::iter::successors(Some(1u32), |r| Some(r * 2)).take_while(|&r| r < max_radius).collect();
    radii.push(max_radius);
    let lambdas = linspace(-0.5, top(lattice, disorder) + 0.5, GRID_POINTS);
    let seq = FolnerSequence::centered_boxes(m.dim(), &radii).map_err(err)?;
    let ex = exhaustion_estimate(&m, seed as u64, &seq, &lambdas, ExhaustionOptions::default()).map_err(err)?;
    let theta = if m.dim() == 1 { 2048 } else { 96 };
    let bloch = bloch_oracle(&model(lattice, 0.0)?, &lambdas, theta).map_err(err)?;
    Ok(to_json(&Curves {
        exhaustion: ex
            .steps
            .iter()
            .map(|s| Step { radius: s.label, vertices: s.vertices, values: s.curve.values.clone() })
            .collect(),
        bloch: bloch.values,
        lambdas,
    }))
}

#[derive(Serialize)]
struct Bounds {
    lambdas: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    lower_se: Vec<f64>,
    upper_se: Vec<f64>,
    samples: usize,
}

/// Single-cell lower (doubled Dirichlet) and upper (Neumann) bounds averaged over `samples`.
#[wasm_bindgen]
pub fn bracket(lattice: &str, disorder: f64, samples: u32, seed: u32) -> Result<String, String> {
    let m = model(lattice, disorder)?;
    if !(2..=20_000).contains(&samples) {
        return Err("samples must be between 2 and 20000".into());
    }
    let lambdas = linspace(-0.5, 2.0 * top(lattice, disorder) + 0.5, GRID_POINTS);
    let b = bracketing_bounds(&m, &lambdas, samples as usize, seed as u64).map_err(err)?;
    Ok(to_json(&Bounds {
        lower_se: b.lower.std_errors.clone().unwrap_or_default(),
        upper_se: b.upper.std_errors.clone().unwrap_or_default(),
        lower: b.lower.values,
        upper: b.upper.values,
        samples: b.samples,
        lambdas,
    }))
}

#[derive(Serialize)]
struct Scan {
    energy: f64,
    rows: Vec<ids_lab_core::ids::WegnerRow>,
    fit: ids_lab_core::ids::WegnerFit,
}

/// Wegner experiment at `energy` on line boxes of 16, 32 and 64 cells over
/// a fixed ε grid.
#[wasm_bindgen]
pub fn wegner_scan(disorder: f64, energy: f64, samples: u32, seed: u32) -> Result<String, String> {
    let m = model("line", disorder)?;
    if disorder == 0.0 {
        return Err("the Wegner scan needs disorder > 0".into());
    }
    if !(1..=5_000).contains(&samples) {
        return Err("samples must be between 1 and 5000".into());
    }
    let epsilons = [0.02, 0.05, 0.1, 0.2, 0.4];
    let t = wegner_experiment(&m, energy, &epsilons, &[16, 32, 64], samples as usize, seed as u64).map_err(err)?;
    Ok(to_json(&Scan { energy: t.energy, rows: t.rows, fit: t.fit }))
}
