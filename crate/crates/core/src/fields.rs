//! Stationary i.i.d. random fields over the deck group.
//!
//! A realization assigns to every cell `γ` a pair `(q_γ, r_γ)`: the alloy
//! coupling constant and the log-scale of the conformal factor. Both are pure
//! functions of `(seed, γ + base_shift)`, generated by a ChaCha8 stream keyed
//! on the seed and selected by a hash of the cell coordinates.

use std::collections::HashMap;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, IdsError, Result};
use crate::lattice::{CellSet, CoverRegion, GroupElement};

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for work item `stream` from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(mix64(master) ^ mix64(stream.wrapping_add(0x632B_E59B_D9B4_E019)))
}

fn cell_stream(g: &GroupElement) -> u64 {
    g.coords()
        .iter()
        .fold(0xD1B5_4A32_D192_ED03u64 ^ g.dim() as u64, |h, &c| mix64(h ^ c as u64))
}

fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Single-variable law of the i.i.d. field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { a: f64, b: f64 },
    /// Symmetric triangular density on `[a, b]` with mode at the midpoint.
    Triangular { a: f64, b: f64 },
    /// `x0` with probability `p`, `x1` otherwise.
    TwoPoint { p: f64, x0: f64, x1: f64 },
}

impl DistributionSpec {
    pub fn constant(c: f64) -> Self {
        DistributionSpec::TwoPoint { p: 1.0, x0: c, x1: c }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistributionSpec::Uniform { a, b } | DistributionSpec::Triangular { a, b } => {
                a.is_finite() && b.is_finite() && a <= b
            }
            DistributionSpec::TwoPoint { p, x0, x1 } => (0.0..=1.0).contains(&p) && x0.is_finite() && x1.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid distribution {self:?}")))
        }
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => a + (b - a) * u,
            DistributionSpec::Triangular { a, b } => {
                let w = b - a;
                if u < 0.5 {
                    a + w * (u / 2.0).sqrt()
                } else {
                    b - w * ((1.0 - u) / 2.0).sqrt()
                }
            }
            DistributionSpec::TwoPoint { p, x0, x1 } => {
                if u < p {
                    x0
                } else {
                    x1
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } | DistributionSpec::Triangular { a, b } => 0.5 * (a + b),
            DistributionSpec::TwoPoint { p, x0, x1 } => p * x0 + (1.0 - p) * x1,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => (b - a).powi(2) / 12.0,
            DistributionSpec::Triangular { a, b } => (b - a).powi(2) / 24.0,
            DistributionSpec::TwoPoint { p, x0, x1 } => p * (1.0 - p) * (x1 - x0).powi(2),
        }
    }

    /// Closed support `[min, max]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistributionSpec::Uniform { a, b } | DistributionSpec::Triangular { a, b } => (a, b),
            DistributionSpec::TwoPoint { p, x0, x1 } => {
                if p >= 1.0 {
                    (x0, x0)
                } else if p <= 0.0 {
                    (x1, x1)
                } else {
                    (x0.min(x1), x0.max(x1))
                }
            }
        }
    }

    /// The constant value if the law is a point mass.
    pub fn degenerate_value(&self) -> Option<f64> {
        let (lo, hi) = self.support();
        (lo == hi).then_some(lo)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b } => {
                if x < a {
                    0.0
                } else if x >= b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            DistributionSpec::Triangular { a, b } => {
                let mid = 0.5 * (a + b);
                let w = b - a;
                if x <= a {
                    0.0
                } else if x >= b {
                    1.0
                } else if x <= mid {
                    2.0 * ((x - a) / w).powi(2)
                } else {
                    1.0 - 2.0 * ((b - x) / w).powi(2)
                }
            }
            DistributionSpec::TwoPoint { p, x0, x1 } => {
                let mut c = 0.0;
                if x >= x0 {
                    c += p;
                }
                if x >= x1 {
                    c += 1.0 - p;
                }
                c
            }
        }
    }
}

/// A seeded sample `ω`, materialized on a finite window of cells.
#[derive(Debug, Clone)]
pub struct OmegaRealization {
    seed: u64,
    base_shift: GroupElement,
    coupling: DistributionSpec,
    log_scale: DistributionSpec,
    table: Arc<HashMap<GroupElement, (f64, f64)>>,
}

/// Draws `(q, r)` for the underlying key `key = γ + base_shift`.
fn draw(seed: u64, key: &GroupElement, coupling: &DistributionSpec, log_scale: &DistributionSpec) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell_stream(key));
    let u = unit_f64(rng.next_u64());
    let v = unit_f64(rng.next_u64());
    (coupling.quantile(u), log_scale.quantile(v))
}

/// Materializes `ω` for `seed` on `window`, with coupling law `specs.0` and
/// log-scale law `specs.1`.
pub fn sample_omega(seed: u64, window: &CellSet, specs: (DistributionSpec, DistributionSpec)) -> OmegaRealization {
    let dim = window.dim().unwrap_or(1);
    let omega = OmegaRealization {
        seed,
        base_shift: GroupElement::zero(dim),
        coupling: specs.0,
        log_scale: specs.1,
        table: Arc::new(HashMap::new()),
    };
    omega.extend(window)
}

impl OmegaRealization {
    /// A realization with explicitly given `(q_γ, r_γ)` values, for
    /// hand-built configurations.
    pub fn from_values(
        seed: u64,
        specs: (DistributionSpec, DistributionSpec),
        values: impl IntoIterator<Item = (GroupElement, (f64, f64))>,
    ) -> OmegaRealization {
        let table: HashMap<GroupElement, (f64, f64)> = values.into_iter().collect();
        let dim = table.keys().next().map_or(1, GroupElement::dim);
        OmegaRealization {
            seed,
            base_shift: GroupElement::zero(dim),
            coupling: specs.0,
            log_scale: specs.1,
            table: Arc::new(table),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn base_shift(&self) -> &GroupElement {
        &self.base_shift
    }

    pub fn specs(&self) -> (DistributionSpec, DistributionSpec) {
        (self.coupling, self.log_scale)
    }

    /// Number of materialized cells.
    pub fn window_len(&self) -> usize {
        self.table.len()
    }

    /// Adds `window` (in this realization's coordinates); values already
    /// present are untouched.
    pub fn extend(&self, window: &CellSet) -> OmegaRealization {
        let mut table = (*self.table).clone();
        for g in window.iter() {
            let key = g + &self.base_shift;
            table
                .entry(key)
                .or_insert_with_key(|k| draw(self.seed, k, &self.coupling, &self.log_scale));
        }
        OmegaRealization { table: Arc::new(table), ..self.clone() }
    }

    /// `(q_γ, r_γ)`.
    pub fn get(&self, g: &GroupElement) -> Result<(f64, f64)> {
        let key = g + &self.base_shift;
        self.table
            .get(&key)
            .copied()
            .ok_or_else(|| IdsError::WindowTooSmall { cell: g.coords().to_vec() })
    }

    pub fn coupling(&self, g: &GroupElement) -> Result<f64> {
        self.get(g).map(|(q, _)| q)
    }

    pub fn log_scale(&self, g: &GroupElement) -> Result<f64> {
        self.get(g).map(|(_, r)| r)
    }

    /// The translated sample `γω`, with `q'_{γ'} = q_{γ' - γ}`.
    pub fn shift(&self, g: &GroupElement) -> OmegaRealization {
        OmegaRealization { base_shift: &self.base_shift - g, ..self.clone() }
    }

    /// Field-wise equality on the cells of `window`.
    pub fn same_field_on(&self, other: &OmegaRealization, window: &CellSet) -> bool {
        window.iter().all(|g| match (self.get(g), other.get(g)) {
            (Ok(a), Ok(b)) => a.0.to_bits() == b.0.to_bits() && a.1.to_bits() == b.1.to_bits(),
            _ => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteValue {
    pub offset: GroupElement,
    pub vertex: usize,
    pub value: f64,
}

/// A finitely supported nonnegative function on the cover, placed at the
/// origin cell; its translates are weighted by the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SingleSiteFunction {
    pub support: Vec<SiteValue>,
}

impl SingleSiteFunction {
    pub fn new(support: Vec<SiteValue>) -> Self {
        Self { support }
    }

    /// `κ · χ_ℱ`: value `kappa` at every vertex of the origin cell.
    pub fn cell_indicator(dim: usize, m: usize, kappa: f64) -> Self {
        Self::new(
            (0..m)
                .map(|i| SiteValue { offset: GroupElement::zero(dim), vertex: i, value: kappa })
                .collect(),
        )
    }

    /// `min_i v(0, i)`, the covering constant.
    pub fn covering_constant(&self, m: usize) -> f64 {
        (0..m)
            .map(|i| {
                self.support
                    .iter()
                    .filter(|s| s.vertex == i && s.offset.is_zero())
                    .map(|s| s.value)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_offsets v(offset, i)`, the value of the periodized function at local `i`.
    pub fn periodized(&self, i: usize) -> f64 {
        self.support.iter().filter(|s| s.vertex == i).map(|s| s.value).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|s| s.value).sum()
    }

    pub fn reach(&self) -> i64 {
        self.support.iter().map(|s| s.offset.norm_inf()).max().unwrap_or(0)
    }

    pub fn validate(&self, dim: usize, m: usize) -> Result<()> {
        for s in &self.support {
            if s.offset.dim() != dim || s.vertex >= m {
                return Err(invalid(format!("single-site entry {s:?} does not fit the cell")));
            }
            if !(s.value >= 0.0 && s.value.is_finite()) {
                return Err(invalid(format!("single-site value {} must be nonnegative", s.value)));
            }
        }
        if !(self.covering_constant(m) > 0.0) {
            return Err(invalid("single-site function must be strictly positive on the origin cell"));
        }
        Ok(())
    }

    /// Cells whose field value reaches some vertex of `cells`.
    pub fn source_cells(&self, cells: &CellSet) -> CellSet {
        CellSet::from_cells(cells.iter().flat_map(|c| self.support.iter().map(move |s| c - &s.offset)))
    }

    fn lattice_sum(
        &self,
        at: &GroupElement,
        local: usize,
        mut weight: impl FnMut(&GroupElement) -> Result<f64>,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for s in self.support.iter().filter(|s| s.vertex == local) {
            acc += weight(&(at - &s.offset))? * s.value;
        }
        Ok(acc)
    }
}

/// `V_ω(γ₀, i) = v_per(i) + Σ_γ q_γ v(γ₀ - γ, i)` on every region vertex.
pub fn alloy_potential(
    omega: &OmegaRealization,
    region: &CoverRegion,
    v: &SingleSiteFunction,
    v_per: &[f64],
    require_nonnegative: bool,
) -> Result<Vec<f64>> {
    let m = region.cell().m();
    let mut out = Vec::with_capacity(region.n());
    for k in 0..region.n() {
        let (cell, i) = region.vertex(k);
        let per = v_per.get(i).copied().unwrap_or(0.0);
        let value = per + v.lattice_sum(cell, i, |g| omega.coupling(g))?;
        if require_nonnegative && value < 0.0 {
            return Err(IdsError::NegativePotential { vertex: k, value });
        }
        out.push(value);
    }
    debug_assert_eq!(out.len(), region.cells().len() * m);
    Ok(out)
}

/// `a_ω(γ₀, i) = Σ_γ e^{r_γ} u(γ₀ - γ, i)` at a single vertex.
pub fn conformal_factor_at(
    omega: &OmegaRealization,
    u: &SingleSiteFunction,
    cell: &GroupElement,
    local: usize,
) -> Result<f64> {
    u.lattice_sum(cell, local, |g| omega.log_scale(g).map(f64::exp))
}

/// The conformal factor `a_ω` on every region vertex.
pub fn conformal_factor(omega: &OmegaRealization, region: &CoverRegion, u: &SingleSiteFunction) -> Result<Vec<f64>> {
    (0..region.n())
        .map(|k| {
            let (cell, i) = region.vertex(k);
            conformal_factor_at(omega, u, cell, i)
        })
        .collect()
}

/// `[κ e^{min r}, (Σ u) e^{max r}]`.
pub fn conformal_bracket(u: &SingleSiteFunction, m: usize, log_scale: &DistributionSpec) -> (f64, f64) {
    let (lo, hi) = log_scale.support();
    (u.covering_constant(m) * lo.exp(), u.total_mass() * hi.exp())
}

/// Largest `|ln a(x) - ln a(y)|` over edges of the region; a discrete stand-in
/// for a gradient bound on the metric.
pub fn log_ratio_bound(region: &CoverRegion, a: &[f64]) -> f64 {
    region
        .edges()
        .iter()
        .map(|e| (a[e.a].ln() - a[e.b].ln()).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_region, FundamentalCell};

    fn g(v: &[i64]) -> GroupElement {
        GroupElement::new(v.to_vec())
    }

    const U01: DistributionSpec = DistributionSpec::Uniform { a: 0.0, b: 1.0 };

    #[test]
    fn determinism() {
        let w = CellSet::centered_box(2, 3);
        let a = sample_omega(7, &w, (U01, U01));
        let b = sample_omega(7, &w, (U01, U01));
        assert!(a.same_field_on(&b, &w));
        assert_eq!(a.get(&g(&[1, -2])).unwrap(), a.get(&g(&[1, -2])).unwrap());
        let c = sample_omega(8, &w, (U01, U01));
        assert!(!a.same_field_on(&c, &w));
        assert!(a.get(&g(&[9, 9])).is_err());
    }

    #[test]
    fn extension_keeps_seen_values() {
        let small = CellSet::centered_box(1, 2);
        let a = sample_omega(3, &small, (U01, U01));
        let b = a.extend(&CellSet::centered_box(1, 20));
        assert!(a.same_field_on(&b, &small));
        let direct = sample_omega(3, &CellSet::centered_box(1, 20), (U01, U01));
        assert!(b.same_field_on(&direct, &CellSet::centered_box(1, 20)));
    }

    #[test]
    fn uniform_mean() {
        let w = CellSet::anchored_box(1, 10_000);
        let om = sample_omega(11, &w, (U01, U01));
        let mean = w.iter().map(|c| om.coupling(c).unwrap()).sum::<f64>() / 1e4;
        // 3σ = 3 · sqrt(1/12 / 1e4) ≈ 0.0087
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn degenerate_two_point() {
        let w = CellSet::centered_box(1, 5);
        let om = sample_omega(1, &w, (DistributionSpec::TwoPoint { p: 1.0, x0: 0.7, x1: 3.0 }, U01));
        assert!(w.iter().all(|c| om.coupling(c).unwrap() == 0.7));
    }

    #[test]
    fn triangular_cdf_matches_quantile() {
        let t = DistributionSpec::Triangular { a: -1.0, b: 3.0 };
        for k in 1..100 {
            let u = k as f64 / 100.0;
            assert!((t.cdf(t.quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_semantics() {
        let w = CellSet::centered_box(1, 10);
        let om = sample_omega(5, &w, (U01, U01));
        assert!(om.shift(&g(&[0])).same_field_on(&om, &w));
        let s = om.shift(&g(&[3]));
        for x in -7..=13 {
            assert_eq!(s.get(&g(&[x])).unwrap(), om.get(&g(&[x - 3])).unwrap());
        }
        let back = s.shift(&g(&[-3]));
        assert!(back.same_field_on(&om, &w));
    }

    #[test]
    fn potential_examples() {
        let cell = Arc::new(FundamentalCell::hypercubic(1));
        let region = build_region(&cell, &CellSet::anchored_box(1, 5));
        let w = CellSet::centered_box(1, 8);
        let zero = sample_omega(1, &w, (DistributionSpec::constant(0.0), U01));
        let v = SingleSiteFunction::cell_indicator(1, 1, 1.0);
        assert_eq!(alloy_potential(&zero, &region, &v, &[0.25], true).unwrap(), vec![0.25; 5]);

        let om = sample_omega(2, &w, (U01, U01));
        let vals = alloy_potential(&om, &region, &v, &[0.0], true).unwrap();
        for (k, c) in region.cells().iter().enumerate() {
            assert_eq!(vals[k], om.coupling(c).unwrap());
        }

        let v2 = SingleSiteFunction::new(vec![
            SiteValue { offset: g(&[0]), vertex: 0, value: 1.0 },
            SiteValue { offset: g(&[1]), vertex: 0, value: 0.5 },
        ]);
        let vals = alloy_potential(&om, &region, &v2, &[0.0], true).unwrap();
        for (k, c) in region.cells().iter().enumerate() {
            let x = c.coords()[0];
            let expect = om.coupling(&g(&[x])).unwrap() + 0.5 * om.coupling(&g(&[x - 1])).unwrap();
            assert_eq!(vals[k], expect);
        }
    }

    #[test]
    fn negative_potential_is_rejected() {
        let cell = Arc::new(FundamentalCell::hypercubic(1));
        let region = build_region(&cell, &CellSet::anchored_box(1, 3));
        let om = sample_omega(1, &CellSet::centered_box(1, 4), (DistributionSpec::constant(-1.0), U01));
        let v = SingleSiteFunction::cell_indicator(1, 1, 1.0);
        assert!(matches!(
            alloy_potential(&om, &region, &v, &[0.0], true),
            Err(IdsError::NegativePotential { .. })
        ));
        assert!(alloy_potential(&om, &region, &v, &[0.0], false).is_ok());
    }

    #[test]
    fn conformal_examples() {
        let cell = Arc::new(FundamentalCell::hypercubic(1));
        let region = build_region(&cell, &CellSet::centered_box(1, 3));
        let w = CellSet::centered_box(1, 6);
        // two half-weight bumps form a partition of unity
        let u = SingleSiteFunction::new(vec![
            SiteValue { offset: g(&[0]), vertex: 0, value: 0.5 },
            SiteValue { offset: g(&[1]), vertex: 0, value: 0.5 },
        ]);
        let flat = sample_omega(4, &w, (U01, DistributionSpec::constant(0.0)));
        assert_eq!(conformal_factor(&flat, &region, &u).unwrap(), vec![1.0; 7]);

        let c = 0.3f64;
        let scaled = sample_omega(4, &w, (U01, DistributionSpec::constant(c)));
        for a in conformal_factor(&scaled, &region, &u).unwrap() {
            assert!((a - c.exp()).abs() < 1e-15);
        }

        let r = DistributionSpec::Uniform { a: -0.5, b: 0.5 };
        let om = sample_omega(9, &w, (U01, r));
        let chi = SingleSiteFunction::cell_indicator(1, 1, 1.0);
        let a = conformal_factor(&om, &region, &chi).unwrap();
        for (k, cell) in region.cells().iter().enumerate() {
            assert_eq!(a[k], om.log_scale(cell).unwrap().exp());
        }
        let (lo, hi) = conformal_bracket(&chi, 1, &r);
        assert!(a.iter().all(|&x| lo <= x && x <= hi));
        assert!(log_ratio_bound(&region, &a) <= 1.0);
    }

    #[test]
    fn single_site_validation() {
        let ok = SingleSiteFunction::cell_indicator(2, 3, 0.5);
        assert!(ok.validate(2, 3).is_ok());
        assert_eq!(ok.covering_constant(3), 0.5);
        let missing = SingleSiteFunction::new(vec![SiteValue { offset: g(&[0]), vertex: 0, value: 1.0 }]);
        assert!(missing.validate(1, 2).is_err());
        let off_cell = SingleSiteFunction::new(vec![SiteValue { offset: g(&[1]), vertex: 0, value: 1.0 }]);
        assert!(off_cell.validate(1, 1).is_err());
    }
}
