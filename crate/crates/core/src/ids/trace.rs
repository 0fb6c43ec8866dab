use crate::error::{invalid, Result};
use crate::lattice::{build_region, CellSet, GroupElement};
use crate::model::Model;
use crate::operator::{assemble, Boundary};
use crate::par::par_map;
use crate::spectral::{check_grid, dense_eigenpairs, DEFAULT_ORACLE_CAP};

use super::stats::ratio_estimate;
use super::{realization_seed, Estimator, IdsCurve};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub bc: Boundary,
    pub oracle_cap: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { bc: Boundary::Dirichlet, oracle_cap: DEFAULT_ORACLE_CAP }
    }
}

/// `E[tr(χ_ℱ P(λ))] / E[vol(ℱ)]` with `P(λ)` the spectral projector below `λ`
/// of the operator restricted to the centered box of `radius`.
///
/// Per realization the trace is `Σ_{λ_k < λ} Σ_{x ∈ ℱ} |φ_k(x)|² μ(x)` for
/// `M`-orthonormal eigenvectors `φ_k`.
pub fn trace_estimate(
    model: &Model,
    lambdas: &[f64],
    radius: u32,
    samples: usize,
    seed: u64,
    opts: TraceOptions,
) -> Result<IdsCurve> {
    check_grid(lambdas)?;
    if samples == 0 {
        return Err(invalid("trace estimate needs at least one sample"));
    }
    let region = build_region(model.cell(), &CellSet::centered_box(model.dim(), radius));
    let central = region
        .cell_vertices(&GroupElement::zero(model.dim()))
        .expect("centered box contains the origin");

    let per = par_map(samples, |s| -> Result<(Vec<f64>, f64)> {
        let omega = model.realize(realization_seed(seed, 0, s as u64), &region);
        let op = assemble(&region, &omega, model, opts.bc)?;
        let (values, vectors) = dense_eigenpairs(&op, opts.oracle_cap)?;
        let mu = op.volumes();
        let weights: Vec<f64> = (0..op.n())
            .map(|k| central.clone().map(|x| vectors[(x, k)].powi(2) * mu[x]).sum())
            .collect();
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        prefix.push(0.0);
        for w in &weights {
            prefix.push(prefix.last().unwrap() + w);
        }
        let traces = lambdas.iter().map(|&l| prefix[values.partition_point(|&e| e < l)]).collect();
        let cell_volume = central.clone().map(|x| mu[x]).sum();
        Ok((traces, cell_volume))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let volumes: Vec<f64> = per.iter().map(|p| p.1).collect();
    let (values, errors) = (0..lambdas.len())
        .map(|k| {
            let t: Vec<f64> = per.iter().map(|p| p.0[k]).collect();
            ratio_estimate(&t, &volumes)
        })
        .unzip();
    Ok(IdsCurve {
        lambdas: lambdas.to_vec(),
        values,
        std_errors: Some(errors),
        estimator: Estimator::Trace,
        seed: Some(seed),
        region: format!("centered box radius {radius}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DistributionSpec;
    use crate::ids::bracketing_bounds;
    use crate::lattice::FundamentalCell;

    #[test]
    fn single_cell_equals_lower_bracket() {
        let model = Model::alloy(FundamentalCell::ladder(), DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 1.0).unwrap();
        let lambdas = crate::ids::linspace(0.1, 9.9, 14);
        let opts = TraceOptions { bc: Boundary::DoubledDirichlet, ..Default::default() };
        let trace = trace_estimate(&model, &lambdas, 0, 20, 9, opts).unwrap();
        let bracket = bracketing_bounds(&model, &lambdas, 20, 9).unwrap();
        for (t, l) in trace.values.iter().zip(&bracket.lower.values) {
            assert!((t - l).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_and_capped() {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let lambdas = crate::ids::linspace(-0.5, 4.5, 21);
        let curve = trace_estimate(&model, &lambdas, 10, 1, 0, TraceOptions::default()).unwrap();
        assert!(curve.is_monotone());
        assert!((curve.values.last().unwrap() - 1.0).abs() < 1e-12);
        let tiny_cap = TraceOptions { oracle_cap: 5, ..Default::default() };
        assert!(trace_estimate(&model, &lambdas, 10, 1, 0, tiny_cap).is_err());
    }
}
