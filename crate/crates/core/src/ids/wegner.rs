use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, IdsError, Result};
use crate::lattice::{build_region, CellSet};
use crate::model::Model;
use crate::operator::{assemble, Boundary};
use crate::par::par_map;
use crate::spectral::InertiaCounter;

use super::realization_seed;
use super::stats::RunningStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WegnerRow {
    pub epsilon: f64,
    /// `|J|`, the number of cells.
    pub cells: usize,
    pub vertices: usize,
    pub mean_trace: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Least-squares fit `ln(mean) ≈ ln C + α ln ε + β ln |J|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WegnerFit {
    pub log_c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_se: f64,
    pub beta_se: f64,
    /// 95% confidence intervals (Student t).
    pub alpha_ci: (f64, f64),
    pub beta_ci: (f64, f64),
    pub r_squared: f64,
    pub rows_used: usize,
    /// Whether the β interval contains 1, the case in which a Hölder bound
    /// for the IDS follows.
    pub holder: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WegnerTable {
    pub energy: f64,
    pub rows: Vec<WegnerRow>,
    pub fit: WegnerFit,
}

/// Expected number of Dirichlet eigenvalues in `[E - ε, E + ε)` on anchored
/// boxes `{0..L}^d`, for each `(ε, L)`, plus the log-log fit.
///
/// The count for one realization is `count_below(E+ε) - count_below(E-ε)`.
/// For a fixed box side, every ε reuses the same realizations.
pub fn wegner_experiment(
    model: &Model,
    energy: f64,
    epsilons: &[f64],
    side_lengths: &[u32],
    samples: usize,
    seed: u64,
) -> Result<WegnerTable> {
    if epsilons.is_empty() || side_lengths.is_empty() || samples == 0 {
        return Err(invalid("wegner experiment needs epsilons, box sides and samples"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) || side_lengths.contains(&0) {
        return Err(invalid("epsilons and box sides must be positive"));
    }
    let mut rows = Vec::with_capacity(epsilons.len() * side_lengths.len());
    for &side in side_lengths {
        let region = build_region(model.cell(), &CellSet::anchored_box(model.dim(), side));
        let per = par_map(samples, |s| -> Result<Vec<usize>> {
            let omega = model.realize(realization_seed(seed, side as u64, s as u64), &region);
            let op = assemble(&region, &omega, model, Boundary::Dirichlet)?;
            let counter = InertiaCounter::new(&op);
            epsilons
                .iter()
                .map(|&eps| {
                    let hi = counter.count_robust(energy + eps)?.count;
                    let lo = counter.count_robust(energy - eps)?.count;
                    Ok(hi - lo)
                })
                .collect()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        for (k, &eps) in epsilons.iter().enumerate() {
            let mut st = RunningStats::default();
            per.iter().for_each(|p| st.push(p[k] as f64));
            rows.push(WegnerRow {
                epsilon: eps,
                cells: region.cells().len(),
                vertices: region.n(),
                mean_trace: st.mean(),
                std_error: st.std_error(),
                samples,
            });
        }
    }
    let fit = fit_wegner(&rows)?;
    Ok(WegnerTable { energy, rows, fit })
}

/// Ordinary least squares on the rows with positive mean trace.
pub fn fit_wegner(rows: &[WegnerRow]) -> Result<WegnerFit> {
    let usable: Vec<&WegnerRow> = rows.iter().filter(|r| r.mean_trace > 0.0).collect();
    if usable.len() < 3 {
        return Err(IdsError::InsufficientData { usable: usable.len(), required: 3 });
    }
    let design: Vec<Vector3<f64>> = usable
        .iter()
        .map(|r| Vector3::new(1.0, r.epsilon.ln(), (r.cells as f64).ln()))
        .collect();
    let y: Vec<f64> = usable.iter().map(|r| r.mean_trace.ln()).collect();
    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    for (x, &yi) in design.iter().zip(&y) {
        xtx += x * x.transpose();
        xty += x * yi;
    }
    let inv = xtx
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| invalid("Wegner fit needs at least two distinct epsilons and two distinct region sizes"))?;
    let coef = inv * xty;
    let n = y.len();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let ss_res: f64 = design.iter().zip(&y).map(|(x, yi)| (yi - coef.dot(x)).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let dof = n.saturating_sub(3);
    let (alpha_se, beta_se, t) = if dof > 0 {
        let sigma2 = ss_res / dof as f64;
        let t = StudentsT::new(0.0, 1.0, dof as f64)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::INFINITY);
        ((sigma2 * inv[(1, 1)]).sqrt(), (sigma2 * inv[(2, 2)]).sqrt(), t)
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };
    let ci = |c: f64, se: f64| (c - t * se, c + t * se);
    let beta_ci = ci(coef[2], beta_se);
    Ok(WegnerFit {
        log_c: coef[0],
        alpha: coef[1],
        beta: coef[2],
        alpha_se,
        beta_se,
        alpha_ci: ci(coef[1], alpha_se),
        beta_ci,
        r_squared,
        rows_used: n,
        holder: beta_ci.0 <= 1.0 && 1.0 <= beta_ci.1,
    })
}
