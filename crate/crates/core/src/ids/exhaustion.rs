use crate::error::{IdsError, Result};
use crate::lattice::{build_region, is_tempered, FolnerSequence, TemperedReport};
use crate::model::Model;
use crate::operator::{assemble, Boundary};
use crate::par::par_map;
use crate::spectral::{check_grid, counting_function};

use super::{Estimator, IdsCurve};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustionOptions {
    pub bc: Boundary,
    /// Bound on the sumset growth ratio; `None` means `2^d + 1`.
    pub tempered_bound: Option<f64>,
    /// A jump between the last two curves larger than this flags a grid
    /// point as a suspected atom.
    pub atom_threshold: f64,
}

impl Default for ExhaustionOptions {
    fn default() -> Self {
        Self { bc: Boundary::Dirichlet, tempered_bound: None, atom_threshold: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionStep {
    /// Box radius (or sequence position for custom sequences).
    pub label: u32,
    pub cells: usize,
    pub vertices: usize,
    pub volume: f64,
    /// Crossing bonds per vertex.
    pub boundary_ratio: f64,
    pub curve: IdsCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustion {
    pub steps: Vec<ExhaustionStep>,
    /// `sup_λ |N^{j} - N^{j-1}|` for each consecutive pair.
    pub successive_sup: Vec<f64>,
    /// Grid points where the last two curves differ by more than the
    /// configured threshold.
    pub suspected_atoms: Vec<f64>,
    pub tempered: TemperedReport,
}

impl Exhaustion {
    pub fn final_curve(&self) -> &IdsCurve {
        &self.steps.last().expect("nonempty exhaustion").curve
    }
}

/// Normalized counting functions `N_ω^j` of one realization on each region
/// of a tempered Følner sequence.
pub fn exhaustion_estimate(
    model: &Model,
    seed: u64,
    folner: &FolnerSequence,
    lambdas: &[f64],
    opts: ExhaustionOptions,
) -> Result<Exhaustion> {
    check_grid(lambdas)?;
    let bound = opts.tempered_bound.unwrap_or((1u64 << model.dim()) as f64 + 1.0);
    let tempered = is_tempered(folner, bound)?;
    if !tempered.tempered {
        let sup = *tempered.sup_ratio.numer() as f64 / *tempered.sup_ratio.denom() as f64;
        return Err(IdsError::NotTempered { ratio: sup, bound });
    }

    let regions: Vec<_> = folner.sets().iter().map(|s| build_region(model.cell(), s)).collect();
    // one ω for the whole sequence: materialize it on the largest window
    let omega = model.realize(seed, regions.last().expect("nonempty sequence"));

    let steps = par_map(regions.len(), |k| -> Result<ExhaustionStep> {
        let region = &regions[k];
        let op = assemble(region, &omega, model, opts.bc)?;
        let vol = op.total_volume();
        let values = counting_function(&op, vol, lambdas)?;
        Ok(ExhaustionStep {
            label: folner.labels()[k],
            cells: region.cells().len(),
            vertices: region.n(),
            volume: vol,
            boundary_ratio: region.boundary_ratio(),
            curve: IdsCurve {
                lambdas: lambdas.to_vec(),
                values,
                std_errors: None,
                estimator: Estimator::Exhaustion,
                seed: Some(seed),
                region: format!("{:?} #{}", folner.shape(), folner.labels()[k]),
            },
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let successive_sup = steps.windows(2).map(|w| w[1].curve.sup_distance(&w[0].curve)).collect();
    let suspected_atoms = match steps.len() {
        0 | 1 => Vec::new(),
        n => {
            let (a, b) = (&steps[n - 2].curve, &steps[n - 1].curve);
            lambdas
                .iter()
                .zip(a.values.iter().zip(&b.values))
                .filter(|(_, (x, y))| (*x - *y).abs() > opts.atom_threshold)
                .map(|(l, _)| *l)
                .collect()
        }
    };
    Ok(Exhaustion { steps, successive_sup, suspected_atoms, tempered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DistributionSpec;
    use crate::lattice::{CellSet, FundamentalCell};

    #[test]
    fn single_cell_free_line_steps_at_two() {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let seq = FolnerSequence::new(vec![CellSet::centered_box(1, 0)]).unwrap();
        let lambdas = [1.0, 1.9, 2.1, 3.0];
        let ex = exhaustion_estimate(&model, 0, &seq, &lambdas, ExhaustionOptions::default()).unwrap();
        assert_eq!(ex.final_curve().values, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn curves_are_monotone() {
        let model = Model::alloy(FundamentalCell::hypercubic(2), DistributionSpec::Uniform { a: 0.0, b: 2.0 }, 1.0).unwrap();
        let seq = FolnerSequence::centered_boxes(2, &[1, 2, 4]).unwrap();
        let lambdas = crate::ids::linspace(-0.5, 10.5, 23);
        let ex = exhaustion_estimate(&model, 5, &seq, &lambdas, ExhaustionOptions::default()).unwrap();
        assert_eq!(ex.steps.len(), 3);
        assert!(ex.steps.iter().all(|s| s.curve.is_monotone()));
        assert_eq!(ex.successive_sup.len(), 2);
        assert_eq!(ex.final_curve().values.last(), Some(&1.0));
    }

    #[test]
    fn untempered_sequence_is_rejected() {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let seq = FolnerSequence::centered_boxes(1, &[1, 2]).unwrap();
        let opts = ExhaustionOptions { tempered_bound: Some(1.2), ..Default::default() };
        assert!(matches!(
            exhaustion_estimate(&model, 0, &seq, &[1.0], opts),
            Err(IdsError::NotTempered { .. })
        ));
    }
}
