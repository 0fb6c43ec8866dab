//! Integrated density of states for random Schrödinger operators on
//! `Z^d`-periodic covering graphs.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: the deck group, fundamental cells, Følner sequences and
//!   regions `φ(I)` with the group action on them.
//! - [`fields`]: seeded i.i.d. random fields, the alloy potential and the
//!   alloy conformal factor.
//! - [`model`]: a cell together with its random potential and metric.
//! - [`operator`]: assembly of the restricted operator as a pencil `(K, M)`.
//! - [`spectral`]: eigenvalue counting by factorization inertia, with a
//!   dense oracle.
//! - [`ids`]: the estimators built on top.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod ids;
pub mod lattice;
pub mod model;
pub mod operator;
mod par;
pub mod spectral;

pub use error::{IdsError, Result};
pub use fields::{DistributionSpec, OmegaRealization, SingleSiteFunction, SiteValue};
pub use ids::IdsCurve;
pub use lattice::{CellSet, CoverRegion, FolnerSequence, FundamentalCell, GroupElement};
pub use model::{AlloyMetric, AlloyPotential, Model};
pub use operator::{Boundary, WeightedOperator};
