//! Restricted random operators as a sparse symmetric-definite pencil.
//!
//! On a region `D` the operator `H = Δ_ω + V_ω` is represented by the pair
//! `(K, M)`: `K` is the matrix of the quadratic form
//!
//! ```text
//! Q(f) = Σ_{edges} w(x,y) (f(x) - f(y))²  [+ Σ_{crossing} w(x,∂) f(x)²]  + Σ_x V(x) μ(x) f(x)²
//! ```
//!
//! and `M = diag(μ)` is the vertex volume. Weights follow the conformal
//! factor `a`: `μ(x) = μ₀(x) a(x)` and `w(x,y) = w₀ √(a(x) a(y))`. The
//! bracketed crossing term is present for Dirichlet and absent for Neumann
//! boundary conditions. Eigenpairs solve `Kφ = λMφ`.
//!
//! Plain Dirichlet is the restriction of `H` itself. It does not dominate the
//! decoupled operator on a union of cells, because a cut bond contributes
//! `w (f(x) - f(y))²`, which can exceed `w f(x)² + w f(y)²`. The doubled
//! variant charges `2w` per crossing bond and does dominate it, which is
//! what a lower bracketing bound needs.

use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{alloy_potential, conformal_factor_at, OmegaRealization};
use crate::lattice::{act, CoverRegion, GroupElement, Permutation};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
    /// Crossing bonds enter the diagonal with twice their weight.
    DoubledDirichlet,
}

impl Boundary {
    /// Multiplier of the crossing-bond term.
    fn crossing_factor(self) -> f64 {
        match self {
            Boundary::Dirichlet => 1.0,
            Boundary::Neumann => 0.0,
            Boundary::DoubledDirichlet => 2.0,
        }
    }
}

/// Symmetric sparse matrix: the diagonal plus each off-diagonal pair once
/// (`row < col`, sorted).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    diag: Vec<f64>,
    upper: Vec<(usize, usize, f64)>,
}

impl SymmetricMatrix {
    pub fn new(diag: Vec<f64>, upper: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in upper {
            assert!(i != j && i < diag.len() && j < diag.len(), "bad off-diagonal entry ({i}, {j})");
            *acc.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        Self { diag, upper: acc.into_iter().map(|((i, j), v)| (i, j, v)).collect() }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[(usize, usize, f64)] {
        &self.upper
    }

    /// Stored entries: diagonal plus strict upper triangle.
    pub fn nnz(&self) -> usize {
        self.diag.len() + self.upper.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for &(i, j, v) in &self.upper {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        debug_assert_eq!(a.nrows(), n);
        a
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, x)| d * x).collect();
        for &(i, j, v) in &self.upper {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
        y
    }

    /// `Σ_y |A_xy|` per row.
    pub fn abs_row_sums(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.diag.iter().map(|d| d.abs()).collect();
        for &(i, j, v) in &self.upper {
            s[i] += v.abs();
            s[j] += v.abs();
        }
        s
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.abs_row_sums().into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(self.upper.iter().map(|(_, _, v)| v))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `P A Pᵀ` where `perm[k]` is the new index of old index `k`.
    pub fn permuted(&self, perm: &Permutation) -> Self {
        let mut diag = vec![0.0; self.n()];
        for (k, &d) in self.diag.iter().enumerate() {
            diag[perm.0[k]] = d;
        }
        Self::new(diag, self.upper.iter().map(|&(i, j, v)| (perm.0[i], perm.0[j], v)))
    }

    /// Coordinate text form: `n nnz` header, then 1-based `row col value`
    /// triples of the upper triangle including the diagonal.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut entries: Vec<(usize, usize, f64)> =
            self.diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        entries.extend(self.upper.iter().copied());
        entries.sort_by_key(|&(i, j, _)| (i, j));
        writeln!(out, "{} {}", self.n(), entries.len())?;
        for (i, j, v) in entries {
            writeln!(out, "{} {} {}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub cells: usize,
    pub seed: u64,
    pub base_shift: Vec<i64>,
    pub model_hash: String,
}

/// The pencil `(K, M)` of a restricted operator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator {
    stiffness: SymmetricMatrix,
    volumes: Vec<f64>,
    potential: Vec<f64>,
    bc: Boundary,
    provenance: Provenance,
}

impl WeightedOperator {
    /// Direct construction from a pencil; `volumes` must be strictly positive.
    pub fn from_parts(stiffness: SymmetricMatrix, volumes: Vec<f64>, bc: Boundary) -> Self {
        assert_eq!(stiffness.n(), volumes.len());
        assert!(volumes.iter().all(|&m| m > 0.0), "volumes must be positive");
        let n = volumes.len();
        Self {
            stiffness,
            volumes,
            potential: vec![0.0; n],
            bc,
            provenance: Provenance { cells: 0, seed: 0, base_shift: Vec::new(), model_hash: String::new() },
        }
    }

    pub fn n(&self) -> usize {
        self.volumes.len()
    }

    pub fn stiffness(&self) -> &SymmetricMatrix {
        &self.stiffness
    }

    /// Diagonal of `M`.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// `V_ω` at each vertex.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Gershgorin enclosure `[min_x (K_xx - r_x)/μ_x, max_x (K_xx + r_x)/μ_x]`
    /// of the generalized spectrum, `r_x` the off-diagonal absolute row sum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let sums = self.stiffness.abs_row_sums();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in 0..self.n() {
            let d = self.stiffness.diag[x];
            let off = sums[x] - d.abs();
            lo = lo.min((d - off) / self.volumes[x]);
            hi = hi.max((d + off) / self.volumes[x]);
        }
        (lo, hi)
    }

    pub fn volume_matrix(&self) -> SymmetricMatrix {
        SymmetricMatrix::new(self.volumes.clone(), std::iter::empty())
    }
}

fn conformal_values(region: &CoverRegion, omega: &OmegaRealization, model: &Model) -> Result<Vec<f64>> {
    match model.metric() {
        None => Ok(vec![1.0; region.n()]),
        Some(g) => (0..region.n())
            .map(|k| {
                let (c, i) = region.vertex(k);
                conformal_factor_at(omega, &g.deformation, c, i)
            })
            .collect(),
    }
}

/// Assembles `H_ω` restricted to `region` with boundary condition `bc`.
pub fn assemble(region: &CoverRegion, omega: &OmegaRealization, model: &Model, bc: Boundary) -> Result<WeightedOperator> {
    let n = region.n();
    let cell = region.cell();
    let a = conformal_values(region, omega, model)?;
    let potential = match model.potential() {
        Some(p) => alloy_potential(omega, region, &p.single_site, model.v_per(), model.require_nonnegative())?,
        None => (0..n).map(|k| model.v_per()[region.vertex(k).1]).collect(),
    };
    let volumes: Vec<f64> = (0..n).map(|k| cell.vertex_weights()[region.vertex(k).1] * a[k]).collect();

    let mut diag = vec![0.0; n];
    let mut upper = Vec::with_capacity(region.edges().len());
    for e in region.edges() {
        let w = e.weight * (a[e.a] * a[e.b]).sqrt();
        diag[e.a] += w;
        diag[e.b] += w;
        upper.push((e.a, e.b, -w));
    }
    let factor = bc.crossing_factor();
    if factor > 0.0 {
        for c in region.crossing_bonds() {
            let a_out = match model.metric() {
                None => 1.0,
                Some(g) => conformal_factor_at(omega, &g.deformation, &c.outside_cell, c.outside_vertex)?,
            };
            diag[c.inside] += factor * c.weight * (a[c.inside] * a_out).sqrt();
        }
    }
    for k in 0..n {
        diag[k] += potential[k] * volumes[k];
    }
    Ok(WeightedOperator {
        stiffness: SymmetricMatrix::new(diag, upper),
        volumes,
        potential,
        bc,
        provenance: Provenance {
            cells: region.cells().len(),
            seed: omega.seed(),
            base_shift: omega.base_shift().coords().to_vec(),
            model_hash: model.hash(),
        },
    })
}

/// `vol_ω(D) = Σ_x μ_ω(x)`.
pub fn volume(region: &CoverRegion, omega: &OmegaRealization, model: &Model) -> Result<f64> {
    let a = conformal_values(region, omega, model)?;
    let w = region.cell().vertex_weights();
    Ok((0..region.n()).map(|k| w[region.vertex(k).1] * a[k]).sum())
}

/// Exact entrywise comparison of `assemble(γD, γω)` with the permutation
/// conjugate of `assemble(D, ω)`.
pub fn conjugate_check(
    region: &CoverRegion,
    omega: &OmegaRealization,
    g: &GroupElement,
    model: &Model,
    bc: Boundary,
) -> Result<bool> {
    let base = assemble(region, omega, model, bc)?;
    let (moved, perm) = act(g, region);
    let translated = assemble(&moved, &omega.shift(g), model, bc)?;
    let conj = base.stiffness.permuted(&perm);
    let mut vols = vec![0.0; base.n()];
    for (k, &v) in base.volumes.iter().enumerate() {
        vols[perm.0[k]] = v;
    }
    let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let same_upper = conj.upper.len() == translated.stiffness.upper.len()
        && conj
            .upper
            .iter()
            .zip(&translated.stiffness.upper)
            .all(|(p, q)| p.0 == q.0 && p.1 == q.1 && p.2.to_bits() == q.2.to_bits());
    Ok(same_upper && bits(&conj.diag) == bits(&translated.stiffness.diag) && bits(&vols) == bits(&translated.volumes))
}
