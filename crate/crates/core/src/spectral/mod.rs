//! Eigenvalue counting for the pencil `(K, M)`.
//!
//! [`count_below`] counts generalized eigenvalues below `λ` from the inertia
//! of `K - λM` (Sylvester's law), without computing any eigenvalue. The dense
//! solver in [`dense`] is the oracle it is checked against.

pub mod dense;
pub mod ldlt;

use serde::Serialize;

use crate::error::{invalid, IdsError, Result};
use crate::lattice::Permutation;
use crate::operator::WeightedOperator;

pub use dense::{dense_eigenpairs, dense_eigs, DEFAULT_ORACLE_CAP};
use ldlt::{profile_of, reverse_cuthill_mckee, Envelope};

/// Default relative pivot tolerance, scaled by `‖K‖∞`.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Dense,
    Inertia,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCount {
    pub lambda: f64,
    pub count: usize,
    pub method: CountMethod,
    /// Perturbation added to `lambda` after a pivot breakdown (0 if none).
    pub shift_applied: f64,
}

/// Inertia counter bound to one operator; the ordering and the absolute
/// pivot tolerance are computed once.
#[derive(Debug, Clone)]
pub struct InertiaCounter<'a> {
    op: &'a WeightedOperator,
    order: Permutation,
    tol: f64,
}

impl<'a> InertiaCounter<'a> {
    pub fn new(op: &'a WeightedOperator) -> Self {
        Self::with_tolerance(op, DEFAULT_PIVOT_TOL)
    }

    /// `rel_tol` is scaled by `‖K‖∞` to give the absolute pivot tolerance.
    pub fn with_tolerance(op: &'a WeightedOperator, rel_tol: f64) -> Self {
        let k = op.stiffness();
        let natural = Permutation::identity(op.n());
        let rcm = reverse_cuthill_mckee(k);
        let order = if profile_of(k, &rcm) < profile_of(k, &natural) { rcm } else { natural };
        let tol = rel_tol * k.norm_inf().max(f64::MIN_POSITIVE);
        Self { op, order, tol }
    }

    /// Absolute pivot tolerance.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `#{λ_i < λ}` from the negative pivots of `K - λM`.
    pub fn count(&self, lambda: f64) -> Result<SpectralCount> {
        let env = Envelope::shifted(self.op.stiffness(), self.op.volumes(), lambda, &self.order);
        match env.factorize(self.tol) {
            Ok(inertia) => Ok(SpectralCount {
                lambda,
                count: inertia.negative,
                method: CountMethod::Inertia,
                shift_applied: 0.0,
            }),
            Err(b) => Err(IdsError::PivotBreakdown { lambda, row: b.row, pivot: b.pivot }),
        }
    }

    /// Like [`count`](Self::count), retrying at `λ ∓ s·tol` for
    /// `s = 10, 10³, 10⁵` after a pivot breakdown. Downward retries come first
    /// so that an eigenvalue sitting exactly at `λ` is not counted; the larger
    /// shifts are needed on highly degenerate spectra, where elimination at
    /// a tiny offset can still cancel to a zero pivot.
    pub fn count_robust(&self, lambda: f64) -> Result<SpectralCount> {
        match self.count(lambda) {
            Err(IdsError::PivotBreakdown { .. }) => {
                let mut last = None;
                for scale in [1e1, 1e3, 1e5] {
                    for shift in [-scale * self.tol, scale * self.tol] {
                        match self.count(lambda + shift) {
                            Ok(c) => return Ok(SpectralCount { lambda, shift_applied: shift, ..c }),
                            Err(e) => last = Some(e),
                        }
                    }
                }
                Err(last.expect("at least one retry"))
            }
            other => other,
        }
    }
}

/// `#{i : λ_i(K, M) < λ}` by factorization inertia. Fails with
/// [`IdsError::PivotBreakdown`] when `λ` is numerically on the spectrum.
pub fn count_below(op: &WeightedOperator, lambda: f64) -> Result<SpectralCount> {
    InertiaCounter::new(op).count(lambda)
}

/// Normalized counting function `count_below(λ) / vol` on a strictly
/// ascending grid, retrying breakdowns.
pub fn counting_function(op: &WeightedOperator, vol: f64, lambdas: &[f64]) -> Result<Vec<f64>> {
    check_grid(lambdas)?;
    if !(vol > 0.0) {
        return Err(invalid("volume must be positive"));
    }
    let counter = InertiaCounter::new(op);
    lambdas.iter().map(|&l| counter.count_robust(l).map(|c| c.count as f64 / vol)).collect()
}

/// Raw counts on a grid (not normalized), retrying breakdowns.
pub fn counts_on_grid(op: &WeightedOperator, lambdas: &[f64]) -> Result<Vec<usize>> {
    let counter = InertiaCounter::new(op);
    lambdas.iter().map(|&l| counter.count_robust(l).map(|c| c.count)).collect()
}

pub(crate) fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(invalid("lambda grid is empty"));
    }
    if lambdas.iter().any(|l| !l.is_finite()) || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("lambda grid must be finite and strictly ascending"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_region, CellSet, FundamentalCell};
    use crate::model::Model;
    use crate::operator::{assemble, Boundary};

    fn free_path(n: u32, bc: Boundary) -> WeightedOperator {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let region = build_region(model.cell(), &CellSet::anchored_box(1, n));
        assemble(&region, &model.realize(0, &region), &model, bc).unwrap()
    }

    #[test]
    fn counts_outside_spectrum() {
        let op = free_path(10, Boundary::Dirichlet);
        assert_eq!(count_below(&op, -0.5).unwrap().count, 0);
        let (_, hi) = op.gershgorin();
        assert_eq!(count_below(&op, hi + 0.1).unwrap().count, 10);
    }

    #[test]
    fn neumann_path_counting_function() {
        // eigenvalues {0, 1, 3}
        let op = free_path(3, Boundary::Neumann);
        let vals = counting_function(&op, 3.0, &[0.5, 1.5, 3.5]).unwrap();
        assert_eq!(vals, vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(counting_function(&op, 3.0, &[-1.0]).unwrap(), vec![0.0]);
        assert!(counting_function(&op, 3.0, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn breakdown_is_retried_downward() {
        // 2 is an eigenvalue of the Dirichlet 3-path: {2-√2, 2, 2+√2}
        let op = free_path(3, Boundary::Dirichlet);
        assert!(matches!(count_below(&op, 2.0), Err(IdsError::PivotBreakdown { .. })));
        let c = InertiaCounter::new(&op).count_robust(2.0).unwrap();
        assert_eq!(c.count, 1);
        assert!(c.shift_applied < 0.0);
    }

    #[test]
    fn degenerate_ladder_needs_larger_retry() {
        // the free ladder has 3 as a highly degenerate Dirichlet eigenvalue
        let model = Model::free(FundamentalCell::ladder());
        let region = build_region(model.cell(), &CellSet::centered_box(1, 64));
        let op = assemble(&region, &model.realize(0, &region), &model, Boundary::Dirichlet).unwrap();
        let c = InertiaCounter::new(&op).count_robust(3.0).unwrap();
        let dense = dense_eigs(&op, DEFAULT_ORACLE_CAP).unwrap();
        let below = dense.iter().filter(|&&e| e < 3.0 - 1e-8).count();
        let at_most = dense.iter().filter(|&&e| e < 3.0 + 1e-8).count();
        assert!((below..=at_most).contains(&c.count), "{} not in {below}..={at_most}", c.count);
        assert!(c.shift_applied.abs() > 10.0 * InertiaCounter::new(&op).tolerance());
    }
}
