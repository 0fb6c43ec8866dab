//! Dense oracle for the symmetric-definite pencil. `M` is diagonal, so the
//! pencil reduces to the standard problem for `M^{-1/2} K M^{-1/2}`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{IdsError, Result};
use crate::operator::WeightedOperator;

pub const DEFAULT_ORACLE_CAP: usize = 2000;

fn reduced(op: &WeightedOperator, cap: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = op.n();
    if n > cap {
        return Err(IdsError::OracleCapExceeded { n, cap });
    }
    let inv_sqrt: Vec<f64> = op.volumes().iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = op.stiffness().to_dense();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    Ok((a, inv_sqrt))
}

/// Ascending generalized eigenvalues.
pub fn dense_eigs(op: &WeightedOperator, cap: usize) -> Result<Vec<f64>> {
    let (a, _) = reduced(op, cap)?;
    let mut vals: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Ascending eigenvalues with `M`-orthonormal eigenvectors as columns.
pub fn dense_eigenpairs(op: &WeightedOperator, cap: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (a, inv_sqrt) = reduced(op, cap)?;
    let n = op.n();
    let eig = SymmetricEigen::new(a);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        for x in 0..n {
            vectors[(x, col)] = eig.eigenvectors[(x, i)] * inv_sqrt[x];
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_region, CellSet, FundamentalCell};
    use crate::model::Model;
    use crate::operator::{assemble, Boundary, SymmetricMatrix};

    #[test]
    fn dirichlet_path_spectrum() {
        let model = Model::free(FundamentalCell::hypercubic(1));
        let region = build_region(model.cell(), &CellSet::anchored_box(1, 4));
        let op = assemble(&region, &model.realize(0, &region), &model, Boundary::Dirichlet).unwrap();
        let vals = dense_eigs(&op, 10).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let s = ((k + 1) as f64 * std::f64::consts::PI / 10.0).sin();
            assert!((v - 4.0 * s * s).abs() < 1e-12);
        }
        assert!((vals[0] - 0.381_966).abs() < 1e-6);
        assert!((vals[3] - 3.618_034).abs() < 1e-6);
    }

    #[test]
    fn neumann_kernel_is_constant() {
        let model = Model::free(FundamentalCell::ladder());
        let region = build_region(model.cell(), &CellSet::anchored_box(1, 5));
        let op = assemble(&region, &model.realize(0, &region), &model, Boundary::Neumann).unwrap();
        let (vals, vecs) = dense_eigenpairs(&op, 100).unwrap();
        assert!(vals[0].abs() < 1e-12);
        let v0 = vecs.column(0);
        assert!(v0.iter().all(|x| (x.abs() - v0[0].abs()).abs() < 1e-10));
    }

    #[test]
    fn one_by_one() {
        let op = WeightedOperator::from_parts(SymmetricMatrix::new(vec![3.0], []), vec![1.5], Boundary::Dirichlet);
        assert!((dense_eigs(&op, 1).unwrap()[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let op = WeightedOperator::from_parts(SymmetricMatrix::new(vec![1.0; 5], []), vec![1.0; 5], Boundary::Neumann);
        assert_eq!(dense_eigs(&op, 4), Err(IdsError::OracleCapExceeded { n: 5, cap: 4 }));
    }
}
