use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::{build_region, CellSet};
use crate::model::Model;
use crate::operator::{assemble, Boundary};
use crate::par::par_map;
use crate::spectral::InertiaCounter;

use super::realization_seed;
use super::stats::RunningStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfAvgRow {
    pub radius: u32,
    pub lambda: f64,
    pub mean: f64,
    pub variance: f64,
    pub samples: usize,
}

/// Ensemble mean and variance of `N_ω^j(λ)` on centered boxes, with
/// independent realizations for every radius.
pub fn self_averaging(model: &Model, lambda: f64, radii: &[u32], samples: usize, seed: u64) -> Result<Vec<SelfAvgRow>> {
    if samples < 10 {
        return Err(invalid("self-averaging needs at least 10 samples"));
    }
    if radii.is_empty() || !lambda.is_finite() {
        return Err(invalid("self-averaging needs radii and a finite lambda"));
    }
    radii
        .iter()
        .map(|&radius| {
            let region = build_region(model.cell(), &CellSet::centered_box(model.dim(), radius));
            let values = par_map(samples, |s| -> Result<f64> {
                let omega = model.realize(realization_seed(seed, radius as u64, s as u64), &region);
                let op = assemble(&region, &omega, model, Boundary::Dirichlet)?;
                let c = InertiaCounter::new(&op).count_robust(lambda)?;
                Ok(c.count as f64 / op.total_volume())
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let st = RunningStats::from_slice(&values);
            Ok(SelfAvgRow { radius, lambda, mean: st.mean(), variance: st.variance(), samples })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DistributionSpec;
    use crate::lattice::FundamentalCell;

    #[test]
    fn periodic_model_has_zero_variance() {
        let model = Model::free(FundamentalCell::ladder());
        let rows = self_averaging(&model, 1.3, &[2, 5], 12, 0).unwrap();
        assert!(rows.iter().all(|r| r.variance == 0.0));
    }

    #[test]
    fn too_few_samples() {
        let model = Model::alloy(FundamentalCell::hypercubic(1), DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 1.0).unwrap();
        assert!(self_averaging(&model, 2.0, &[4], 9, 0).is_err());
    }
}
