use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, IdsError, Result};
use crate::model::Model;
use crate::par::par_map;
use crate::spectral::check_grid;

use super::{Estimator, IdsCurve};

const CHUNK: usize = 256;

/// Exact IDS of a periodic model from its Floquet fibers.
///
/// Quasimomenta run over the midpoint grid `θ_k = 2π(k + ½)/T` in each
/// coordinate. Each cross bond of offset `γ` is twisted by `e^{iθ·γ}` in the
/// `m × m` fiber, and `N(λ)` is the θ-average of the fiber counts divided by
/// the cell volume.
pub fn bloch_oracle(model: &Model, lambdas: &[f64], theta_samples: usize) -> Result<IdsCurve> {
    check_grid(lambdas)?;
    if theta_samples == 0 {
        return Err(invalid("theta_samples must be positive"));
    }
    let (a, v) = model.periodic_fields().ok_or(IdsError::NotPeriodic)?;
    let cell = model.cell();
    let (d, m) = (cell.dim(), cell.m());
    let total = theta_samples
        .checked_pow(d as u32)
        .ok_or_else(|| invalid("theta grid too large"))?;

    let mu: Vec<f64> = (0..m).map(|i| cell.vertex_weights()[i] * a[i]).collect();
    let inv_sqrt: Vec<f64> = mu.iter().map(|x| 1.0 / x.sqrt()).collect();
    let cell_volume: f64 = mu.iter().sum();
    let mut base_diag: Vec<f64> = (0..m).map(|i| v[i] * mu[i]).collect();
    let internal: Vec<(usize, usize, f64)> = cell
        .internal_edges()
        .iter()
        .map(|e| (e.a, e.b, e.weight * (a[e.a] * a[e.b]).sqrt()))
        .collect();
    let bonds: Vec<(usize, usize, f64, Vec<f64>)> = cell
        .cross_bonds()
        .iter()
        .map(|b| {
            let offset = b.offset.coords().iter().map(|&c| c as f64).collect();
            (b.from, b.to, b.weight * (a[b.from] * a[b.to]).sqrt(), offset)
        })
        .collect();
    for &(i, j, w) in &internal {
        base_diag[i] += w;
        base_diag[j] += w;
    }
    for (i, j, w, _) in &bonds {
        base_diag[*i] += w;
        base_diag[*j] += w;
    }

    let theta = |k: usize| 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / theta_samples as f64;
    let fiber_eigs = |index: usize| -> Vec<f64> {
        let mut rest = index;
        let angles: Vec<f64> = (0..d)
            .map(|_| {
                let t = theta(rest % theta_samples);
                rest /= theta_samples;
                t
            })
            .collect();
        let mut k = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            k[(i, i)] = Complex64::new(base_diag[i], 0.0);
        }
        for &(i, j, w) in &internal {
            k[(i, j)] -= w;
            k[(j, i)] -= w;
        }
        for (i, j, w, offset) in &bonds {
            let phase: f64 = angles.iter().zip(offset).map(|(t, g)| t * g).sum();
            let z = Complex64::from_polar(*w, phase);
            k[(*i, *j)] -= z;
            k[(*j, *i)] -= z.conj();
        }
        for i in 0..m {
            for j in 0..m {
                k[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
            }
        }
        if m == 1 {
            vec![k[(0, 0)].re]
        } else {
            let mut ev: Vec<f64> = k.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        }
    };

    let chunks = total.div_ceil(CHUNK);
    let partial = par_map(chunks, |c| {
        let mut counts = vec![0u64; lambdas.len()];
        for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
            let ev = fiber_eigs(index);
            for (slot, &l) in counts.iter_mut().zip(lambdas) {
                *slot += ev.partition_point(|&e| e < l) as u64;
            }
        }
        counts
    });
    let mut counts = vec![0u64; lambdas.len()];
    for p in partial {
        for (c, x) in counts.iter_mut().zip(p) {
            *c += x;
        }
    }
    let norm = total as f64 * cell_volume;
    Ok(IdsCurve {
        lambdas: lambdas.to_vec(),
        values: counts.iter().map(|&c| c as f64 / norm).collect(),
        std_errors: None,
        estimator: Estimator::Bloch,
        seed: None,
        region: format!("theta grid {theta_samples}^{d}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DistributionSpec;
    use crate::lattice::FundamentalCell;

    #[test]
    fn free_line_matches_arccos() {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let lambdas = crate::ids::linspace(0.05, 3.95, 40);
        let curve = bloch_oracle(&model, &lambdas, 8192).unwrap();
        for (l, n) in lambdas.iter().zip(&curve.values) {
            let exact = (1.0 - l / 2.0).acos() / std::f64::consts::PI;
            assert!((n - exact).abs() <= 1.0 / 8192.0 + 1e-12, "λ={l}: {n} vs {exact}");
        }
        let ends = bloch_oracle(&model, &[-0.1, 2.0, 4.1], 4096).unwrap();
        assert_eq!(ends.values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn ladder_bands_split_evenly() {
        // bands 2 - 2cos θ and 4 - 2cos θ, half the states each
        let model = Model::free(FundamentalCell::ladder());
        let curve = bloch_oracle(&model, &[2.0, 4.0, 6.5], 2048).unwrap();
        assert!((curve.values[0] - 0.25).abs() < 1e-3);
        assert!((curve.values[1] - 0.75).abs() < 1e-3);
        assert_eq!(curve.values[2], 1.0);
    }

    #[test]
    fn random_model_is_rejected() {
        let model = Model::alloy(FundamentalCell::hypercubic(1), DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 1.0).unwrap();
        assert_eq!(bloch_oracle(&model, &[1.0], 16), Err(IdsError::NotPeriodic));
    }
}
