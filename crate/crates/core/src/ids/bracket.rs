use crate::error::{invalid, Result};
use crate::lattice::{build_region, CellSet, GroupElement};
use crate::model::Model;
use crate::operator::{assemble, Boundary};
use crate::par::par_map;
use crate::spectral::{check_grid, counts_on_grid};

use super::stats::ratio_estimate;
use super::{realization_seed, Estimator, IdsCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub lower: IdsCurve,
    pub upper: IdsCurve,
    pub samples: usize,
}

struct CellSample {
    dirichlet: Vec<usize>,
    neumann: Vec<usize>,
    volume: f64,
}

/// Monte Carlo Dirichlet (lower) and Neumann (upper) single-cell bounds:
/// expected count below `λ` over expected cell volume.
///
/// The lower bound uses [`Boundary::DoubledDirichlet`]; the plain restriction
/// is not a valid lower bracket on a graph.
pub fn bracketing_bounds(model: &Model, lambdas: &[f64], samples: usize, seed: u64) -> Result<Bracket> {
    check_grid(lambdas)?;
    if samples < 2 {
        return Err(invalid("bracketing needs at least 2 samples"));
    }
    let region = build_region(model.cell(), &CellSet::singleton(GroupElement::zero(model.dim())));
    let per = par_map(samples, |s| -> Result<CellSample> {
        let omega = model.realize(realization_seed(seed, 0, s as u64), &region);
        let dir = assemble(&region, &omega, model, Boundary::DoubledDirichlet)?;
        let neu = assemble(&region, &omega, model, Boundary::Neumann)?;
        Ok(CellSample {
            dirichlet: counts_on_grid(&dir, lambdas)?,
            neumann: counts_on_grid(&neu, lambdas)?,
            volume: dir.total_volume(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let volumes: Vec<f64> = per.iter().map(|p| p.volume).collect();
    let curve = |pick: fn(&CellSample) -> &Vec<usize>, estimator| {
        let (values, errors): (Vec<f64>, Vec<f64>) = (0..lambdas.len())
            .map(|k| {
                let counts: Vec<f64> = per.iter().map(|p| pick(p)[k] as f64).collect();
                ratio_estimate(&counts, &volumes)
            })
            .unzip();
        IdsCurve {
            lambdas: lambdas.to_vec(),
            values,
            std_errors: Some(errors),
            estimator,
            seed: Some(seed),
            region: "single cell".into(),
        }
    };
    Ok(Bracket {
        lower: curve(|p| &p.dirichlet, Estimator::BracketLower),
        upper: curve(|p| &p.neumann, Estimator::BracketUpper),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DistributionSpec;
    use crate::lattice::FundamentalCell;

    #[test]
    fn free_line_single_cell_steps() {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let b = bracketing_bounds(&model, &[-0.5, 0.5, 3.5, 4.5], 2, 0).unwrap();
        // Neumann cell eigenvalue 0, doubled Dirichlet cell eigenvalue 4
        assert_eq!(b.upper.values, vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(b.lower.values, vec![0.0, 0.0, 0.0, 1.0]);
        assert!(b.lower.std_errors.unwrap().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn periodic_ids_lies_between() {
        for cell in [FundamentalCell::hypercubic(1), FundamentalCell::ladder(), FundamentalCell::hypercubic(2)] {
            let model = Model::free(cell);
            let lambdas = crate::ids::linspace(-0.5, 8.5, 37);
            let b = bracketing_bounds(&model, &lambdas, 2, 0).unwrap();
            let n = crate::ids::bloch_oracle(&model, &lambdas, 128).unwrap();
            for k in 0..lambdas.len() {
                assert!(b.lower.values[k] <= n.values[k] && n.values[k] <= b.upper.values[k], "λ = {}", lambdas[k]);
            }
        }
    }

    #[test]
    fn alloy_bounds_are_ordered() {
        let model = Model::alloy(FundamentalCell::ladder(), DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 1.0).unwrap();
        let lambdas = crate::ids::linspace(-0.5, 7.5, 33);
        let b = bracketing_bounds(&model, &lambdas, 64, 3).unwrap();
        assert!(b.lower.values.iter().zip(&b.upper.values).all(|(l, u)| l <= u));
        assert!(b.lower.is_monotone() && b.upper.is_monotone());
        assert!(bracketing_bounds(&model, &lambdas, 1, 3).is_err());
    }
}
