//! Model description: cell geometry plus the random potential and metric.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::fields::{sample_omega, DistributionSpec, OmegaRealization, SingleSiteFunction};
use crate::lattice::{CellSet, CoverRegion, FundamentalCell};

/// Alloy-type potential `Σ_γ q_γ v(γ⁻¹x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlloyPotential {
    pub coupling: DistributionSpec,
    pub single_site: SingleSiteFunction,
}

/// Alloy-type conformal factor `Σ_γ e^{r_γ} u(γ⁻¹x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlloyMetric {
    pub log_scale: DistributionSpec,
    pub deformation: SingleSiteFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct Model {
    cell: Arc<FundamentalCell>,
    potential: Option<AlloyPotential>,
    metric: Option<AlloyMetric>,
    v_per: Vec<f64>,
    require_nonnegative: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    cell: FundamentalCell,
    #[serde(default)]
    potential: Option<AlloyPotential>,
    #[serde(default)]
    metric: Option<AlloyMetric>,
    #[serde(default)]
    v_per: Vec<f64>,
    #[serde(default = "yes")]
    require_nonnegative: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<RawModel> for Model {
    type Error = crate::error::IdsError;

    fn try_from(raw: RawModel) -> Result<Self> {
        Model::new(raw.cell, raw.potential, raw.metric, raw.v_per, raw.require_nonnegative)
    }
}

impl From<Model> for RawModel {
    fn from(m: Model) -> Self {
        RawModel {
            cell: (*m.cell).clone(),
            potential: m.potential,
            metric: m.metric,
            v_per: m.v_per,
            require_nonnegative: m.require_nonnegative,
        }
    }
}

impl Model {
    /// An empty `v_per` means a zero periodic background.
    pub fn new(
        cell: FundamentalCell,
        potential: Option<AlloyPotential>,
        metric: Option<AlloyMetric>,
        v_per: Vec<f64>,
        require_nonnegative: bool,
    ) -> Result<Self> {
        let (d, m) = (cell.dim(), cell.m());
        let v_per = if v_per.is_empty() { vec![0.0; m] } else { v_per };
        if v_per.len() != m || v_per.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("v_per must list {m} finite values")));
        }
        if let Some(p) = &potential {
            p.coupling.validate()?;
            p.single_site.validate(d, m)?;
            if require_nonnegative {
                let lo = p.coupling.support().0;
                if lo < 0.0 {
                    return Err(invalid("coupling distribution takes negative values but V >= 0 is required"));
                }
            }
        }
        if let Some(g) = &metric {
            g.log_scale.validate()?;
            g.deformation.validate(d, m)?;
        }
        if require_nonnegative && v_per.iter().any(|&v| v < 0.0) {
            return Err(invalid("v_per has negative entries but V >= 0 is required"));
        }
        Ok(Self { cell: Arc::new(cell), potential, metric, v_per, require_nonnegative })
    }

    /// No potential, reference metric.
    pub fn free(cell: FundamentalCell) -> Self {
        Self::new(cell, None, None, Vec::new(), true).expect("free model is valid")
    }

    /// Alloy potential `Σ q_γ κ χ_ℱ(γ⁻¹x)` over the free Laplacian of `cell`.
    pub fn alloy(cell: FundamentalCell, coupling: DistributionSpec, kappa: f64) -> Result<Self> {
        let v = SingleSiteFunction::cell_indicator(cell.dim(), cell.m(), kappa);
        Self::new(cell, Some(AlloyPotential { coupling, single_site: v }), None, Vec::new(), true)
    }

    pub fn with_metric(self, metric: AlloyMetric) -> Result<Self> {
        Self::new((*self.cell).clone(), self.potential, Some(metric), self.v_per, self.require_nonnegative)
    }

    pub fn cell(&self) -> &Arc<FundamentalCell> {
        &self.cell
    }

    pub fn potential(&self) -> Option<&AlloyPotential> {
        self.potential.as_ref()
    }

    pub fn metric(&self) -> Option<&AlloyMetric> {
        self.metric.as_ref()
    }

    pub fn v_per(&self) -> &[f64] {
        &self.v_per
    }

    pub fn require_nonnegative(&self) -> bool {
        self.require_nonnegative
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    /// Coupling and log-scale laws; absent components are point masses at 0.
    pub fn specs(&self) -> (DistributionSpec, DistributionSpec) {
        (
            self.potential.as_ref().map_or(DistributionSpec::constant(0.0), |p| p.coupling),
            self.metric.as_ref().map_or(DistributionSpec::constant(0.0), |g| g.log_scale),
        )
    }

    /// True when neither field carries randomness.
    pub fn is_periodic(&self) -> bool {
        let (q, r) = self.specs();
        q.degenerate_value().is_some() && r.degenerate_value().is_some()
    }

    /// Per-local-vertex `(a, V)` of a periodic model.
    pub fn periodic_fields(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let (q, r) = self.specs();
        let (q, r) = (q.degenerate_value()?, r.degenerate_value()?);
        let m = self.cell.m();
        let a = (0..m)
            .map(|i| self.metric.as_ref().map_or(1.0, |g| r.exp() * g.deformation.periodized(i)))
            .collect();
        let v = (0..m)
            .map(|i| self.v_per[i] + self.potential.as_ref().map_or(0.0, |p| q * p.single_site.periodized(i)))
            .collect();
        Some((a, v))
    }

    /// Cells on which `ω` must be materialized to assemble on `region`,
    /// including the outer ends of crossing bonds.
    pub fn required_window(&self, region: &CoverRegion) -> CellSet {
        let closure = region.closure_cells();
        let mut window = closure.clone();
        if let Some(p) = &self.potential {
            window = window.union(&p.single_site.source_cells(&closure));
        }
        if let Some(g) = &self.metric {
            window = window.union(&g.deformation.source_cells(&closure));
        }
        window
    }

    /// Samples `ω` for `seed` on the window of `region`.
    pub fn realize(&self, seed: u64, region: &CoverRegion) -> OmegaRealization {
        sample_omega(seed, &self.required_window(region), self.specs())
    }

    /// Short SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("model serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_region, GroupElement};

    #[test]
    fn periodic_detection() {
        let free = Model::free(FundamentalCell::hypercubic(1));
        assert!(free.is_periodic());
        assert_eq!(free.periodic_fields(), Some((vec![1.0], vec![0.0])));
        let constant = Model::alloy(FundamentalCell::hypercubic(1), DistributionSpec::constant(0.5), 2.0).unwrap();
        assert_eq!(constant.periodic_fields(), Some((vec![1.0], vec![1.0])));
        let random = Model::alloy(FundamentalCell::hypercubic(1), DistributionSpec::Uniform { a: 0.0, b: 1.0 }, 1.0).unwrap();
        assert!(!random.is_periodic());
        assert!(random.periodic_fields().is_none());
    }

    #[test]
    fn window_covers_crossing_ends() {
        let m = Model::free(FundamentalCell::hypercubic(1));
        let r = build_region(m.cell(), &CellSet::anchored_box(1, 4));
        let w = m.required_window(&r);
        assert!(w.contains(&GroupElement::new(vec![-1])));
        assert!(w.contains(&GroupElement::new(vec![4])));
        assert_eq!(w.len(), 6);
    }

    #[test]
    fn negative_coupling_rejected_when_nonnegative_required() {
        let c = DistributionSpec::Uniform { a: -1.0, b: 1.0 };
        assert!(Model::alloy(FundamentalCell::hypercubic(1), c, 1.0).is_err());
        let v = SingleSiteFunction::cell_indicator(1, 1, 1.0);
        let p = AlloyPotential { coupling: c, single_site: v };
        assert!(Model::new(FundamentalCell::hypercubic(1), Some(p), None, vec![], false).is_ok());
    }

    #[test]
    fn serde_round_trip() {
        let m = Model::alloy(FundamentalCell::ladder(), DistributionSpec::Triangular { a: 0.0, b: 2.0 }, 0.5).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: Model = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert_eq!(m.hash(), back.hash());
    }
}
