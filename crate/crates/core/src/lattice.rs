//! Covering geometry over the deck group `Z^d`.
//!
//! The cover `X = Z^d × {0..m}` is generated by tiling a [`FundamentalCell`].
//! Finite sets of cells ([`CellSet`]) are mapped to finite vertex sets
//! ([`CoverRegion`]) with a canonical flat indexing: cells in lexicographic
//! order, then local vertex index. Since translation preserves the
//! lexicographic order, all equivariance identities hold exactly against this
//! indexing.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, IdsError, Result};

/// An element of the deck group `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// The `axis`-th unit generator.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut coords = vec![0; dim];
        coords[axis] = 1;
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Max-norm `max_k |c_k|`.
    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl<'a> Add<&'a GroupElement> for &'a GroupElement {
    type Output = GroupElement;

    fn add(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.dim(), rhs.dim());
        GroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a GroupElement> for &'a GroupElement {
    type Output = GroupElement;

    fn sub(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.dim(), rhs.dim());
        GroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;

    fn neg(self) -> GroupElement {
        GroupElement(self.0.iter().map(|a| -a).collect())
    }
}

/// A finite set of cells `I ⊂ Z^d`, iterated in lexicographic order.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellSet(BTreeSet<GroupElement>);

impl CellSet {
    pub fn from_cells(cells: impl IntoIterator<Item = GroupElement>) -> Self {
        Self(cells.into_iter().collect())
    }

    pub fn singleton(cell: GroupElement) -> Self {
        Self::from_cells([cell])
    }

    /// `{-j..=j}^d`.
    pub fn centered_box(dim: usize, radius: u32) -> Self {
        let r = radius as i64;
        Self::product(dim, -r, r)
    }

    /// `{0..side}^d`, a box with `side^d` cells anchored at the origin.
    pub fn anchored_box(dim: usize, side: u32) -> Self {
        Self::product(dim, 0, side as i64 - 1)
    }

    fn product(dim: usize, lo: i64, hi: i64) -> Self {
        let mut cells = BTreeSet::new();
        if hi < lo {
            return Self(cells);
        }
        let mut cur = vec![lo; dim];
        loop {
            cells.insert(GroupElement(cur.clone()));
            let mut k = dim;
            loop {
                if k == 0 {
                    return Self(cells);
                }
                k -= 1;
                if cur[k] < hi {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.0.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> + '_ {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// `I + γ`.
    pub fn translate(&self, g: &GroupElement) -> Self {
        Self(self.0.iter().map(|c| c + g).collect())
    }

    pub fn dim(&self) -> Option<usize> {
        self.0.iter().next().map(GroupElement::dim)
    }

    /// Componentwise `(min, max)` corners.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.0.iter();
        let first = it.next()?;
        let (mut lo, mut hi) = (first.0.clone(), first.0.clone());
        for g in it {
            for (k, &c) in g.0.iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        Some((lo, hi))
    }

    /// Corners if the set is a full axis-parallel box.
    pub fn as_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let (lo, hi) = self.bounding_box()?;
        let volume: usize = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).product();
        (volume == self.len()).then_some((lo, hi))
    }

    pub fn union(&self, other: &CellSet) -> Self {
        Self(self.0.union(&other.0).cloned().collect())
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEdge {
    pub a: usize,
    pub b: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

/// A bond from local vertex `from` in cell `γ` to local vertex `to` in cell
/// `γ + offset`. The reversed bond is implied and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossBond {
    pub from: usize,
    pub offset: GroupElement,
    pub to: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

/// One period of the cover: a finite weighted graph plus bonds to translated
/// copies. Its edge and vertex weights are the periodic reference metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCell", into = "RawCell")]
pub struct FundamentalCell {
    dim: usize,
    vertex_weights: Vec<f64>,
    internal_edges: Vec<CellEdge>,
    cross_bonds: Vec<CrossBond>,
}

#[derive(Serialize, Deserialize)]
struct RawCell {
    dim: usize,
    vertex_weights: Vec<f64>,
    #[serde(default)]
    internal_edges: Vec<CellEdge>,
    cross_bonds: Vec<CrossBond>,
}

impl TryFrom<RawCell> for FundamentalCell {
    type Error = IdsError;

    fn try_from(raw: RawCell) -> Result<Self> {
        FundamentalCell::new(raw.dim, raw.vertex_weights, raw.internal_edges, raw.cross_bonds)
    }
}

impl From<FundamentalCell> for RawCell {
    fn from(c: FundamentalCell) -> Self {
        RawCell {
            dim: c.dim,
            vertex_weights: c.vertex_weights,
            internal_edges: c.internal_edges,
            cross_bonds: c.cross_bonds,
        }
    }
}

impl FundamentalCell {
    pub fn new(
        dim: usize,
        vertex_weights: Vec<f64>,
        internal_edges: Vec<CellEdge>,
        cross_bonds: Vec<CrossBond>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("cell dimension must be at least 1"));
        }
        let m = vertex_weights.len();
        if m == 0 {
            return Err(invalid("cell must have at least one vertex"));
        }
        if let Some(w) = vertex_weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid(format!("vertex weight {w} is not strictly positive")));
        }
        let mut seen = HashSet::new();
        for e in &internal_edges {
            if e.a >= m || e.b >= m || e.a == e.b {
                return Err(invalid(format!("internal edge ({}, {}) is invalid for m = {m}", e.a, e.b)));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(invalid(format!("edge weight {} is not strictly positive", e.weight)));
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(invalid(format!("internal edge ({}, {}) listed twice", e.a, e.b)));
            }
        }
        let mut seen = HashSet::new();
        for b in &cross_bonds {
            if b.from >= m || b.to >= m {
                return Err(invalid(format!("cross bond ({}, {:?}, {}) is invalid for m = {m}", b.from, b.offset, b.to)));
            }
            if b.offset.dim() != dim || b.offset.is_zero() {
                return Err(invalid(format!("cross bond offset {:?} must be a nonzero {dim}-vector", b.offset)));
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(invalid(format!("bond weight {} is not strictly positive", b.weight)));
            }
            if seen.contains(&(b.to, -&b.offset, b.from)) || !seen.insert((b.from, b.offset.clone(), b.to)) {
                return Err(invalid(format!(
                    "cross bond ({}, {:?}, {}) appears twice (bonds are stored in one orientation only)",
                    b.from, b.offset, b.to
                )));
            }
        }
        let cell = Self { dim, vertex_weights, internal_edges, cross_bonds };
        let patch = build_region(&Arc::new(cell.clone()), &CellSet::centered_box(dim, 1));
        if !patch.is_connected() {
            return Err(invalid("the tiled cover is disconnected on the 3^d patch"));
        }
        Ok(cell)
    }

    /// `Z^d` with one vertex per cell and unit nearest-neighbour bonds.
    pub fn hypercubic(dim: usize) -> Self {
        let bonds = (0..dim)
            .map(|k| CrossBond { from: 0, offset: GroupElement::unit(dim, k), to: 0, weight: 1.0 })
            .collect();
        Self::new(dim, vec![1.0], Vec::new(), bonds).expect("hypercubic cell is valid")
    }

    /// Two-leg ladder: one rung inside the cell, two rails of offset +1.
    pub fn ladder() -> Self {
        let rail = |v| CrossBond { from: v, offset: GroupElement::new(vec![1]), to: v, weight: 1.0 };
        Self::new(1, vec![1.0, 1.0], vec![CellEdge { a: 0, b: 1, weight: 1.0 }], vec![rail(0), rail(1)])
            .expect("ladder cell is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vertices per cell.
    pub fn m(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn internal_edges(&self) -> &[CellEdge] {
        &self.internal_edges
    }

    pub fn cross_bonds(&self) -> &[CrossBond] {
        &self.cross_bonds
    }

    /// Largest max-norm of any cross-bond offset.
    pub fn bond_reach(&self) -> i64 {
        self.cross_bonds.iter().map(|b| b.offset.norm_inf()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FolnerShape {
    CenteredBox { dim: usize },
    Custom,
}

/// An increasing sequence of finite cell sets.
#[derive(Debug, Clone, PartialEq)]
pub struct FolnerSequence {
    sets: Vec<CellSet>,
    shape: FolnerShape,
    labels: Vec<u32>,
}

impl FolnerSequence {
    /// Wraps arbitrary nonempty sets; labels default to `1..=len`.
    pub fn new(sets: Vec<CellSet>) -> Result<Self> {
        if sets.is_empty() || sets.iter().any(CellSet::is_empty) {
            return Err(invalid("Følner sequence needs at least one set and no empty sets"));
        }
        let labels = (1..=sets.len() as u32).collect();
        Ok(Self { sets, shape: FolnerShape::Custom, labels })
    }

    /// Centered boxes with the given strictly increasing radii.
    pub fn centered_boxes(dim: usize, radii: &[u32]) -> Result<Self> {
        if dim == 0 || radii.is_empty() {
            return Err(invalid("box sequence needs d >= 1 and at least one radius"));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("box radii must be strictly increasing"));
        }
        Ok(Self {
            sets: radii.iter().map(|&r| CellSet::centered_box(dim, r)).collect(),
            shape: FolnerShape::CenteredBox { dim },
            labels: radii.to_vec(),
        })
    }

    pub fn sets(&self) -> &[CellSet] {
        &self.sets
    }

    pub fn shape(&self) -> FolnerShape {
        self.shape
    }

    /// Radius for box sequences, position (1-based) otherwise.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn check_monotone(&self) -> Result<()> {
        for (i, w) in self.sets.windows(2).enumerate() {
            if !w[0].is_subset(&w[1]) {
                return Err(IdsError::NonMonotoneSequence { index: i });
            }
        }
        Ok(())
    }
}

/// `I_j = {-j..=j}^d` for `j = 1..=j_max`.
pub fn box_folner(dim: usize, j_max: u32) -> Result<FolnerSequence> {
    if dim == 0 || j_max == 0 {
        return Err(invalid("box_folner needs d >= 1 and j_max >= 1"));
    }
    let radii: Vec<u32> = (1..=j_max).collect();
    FolnerSequence::centered_boxes(dim, &radii)
}

/// `|I Δ (I + γ)| / |I|`, by enumeration.
pub fn folner_defect(set: &CellSet, g: &GroupElement) -> Ratio<u64> {
    assert!(!set.is_empty(), "folner_defect on an empty set");
    let shifted = set.translate(g);
    let sym = set.iter().filter(|c| !shifted.contains(c)).count()
        + shifted.iter().filter(|c| !set.contains(c)).count();
    Ratio::new(sym as u64, set.len() as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperedReport {
    pub tempered: bool,
    pub sup_ratio: Ratio<u64>,
    /// `|I_{j+1} - I_j| / |I_{j+1}|` for each consecutive pair.
    pub ratios: Vec<Ratio<u64>>,
}

/// Sumset growth `sup_j |I_{j+1} + (-I_j)| / |I_{j+1}|`, compared to `bound`.
///
/// A one-element sequence is compared against itself.
pub fn is_tempered(seq: &FolnerSequence, bound: f64) -> Result<TemperedReport> {
    seq.check_monotone()?;
    let sets = seq.sets();
    let pairs: Vec<(&CellSet, &CellSet)> = if sets.len() == 1 {
        vec![(&sets[0], &sets[0])]
    } else {
        sets.windows(2).map(|w| (&w[0], &w[1])).collect()
    };
    let ratios: Vec<Ratio<u64>> = pairs
        .into_iter()
        .map(|(small, big)| Ratio::new(difference_set_size(big, small) as u64, big.len() as u64))
        .collect();
    let sup_ratio = *ratios.iter().max().expect("at least one pair");
    let sup = *sup_ratio.numer() as f64 / *sup_ratio.denom() as f64;
    Ok(TemperedReport { tempered: sup < bound, sup_ratio, ratios })
}

/// `|A + (-B)|`. Boxes are handled in closed form (the Minkowski difference
/// of two boxes is a box); other sets are enumerated.
fn difference_set_size(a: &CellSet, b: &CellSet) -> usize {
    match (a.as_box(), b.as_box()) {
        (Some((alo, ahi)), Some((blo, bhi))) => (0..alo.len())
            .map(|k| ((ahi[k] - blo[k]) - (alo[k] - bhi[k]) + 1) as usize)
            .product(),
        _ => enumerate_difference_set(a, b),
    }
}

fn enumerate_difference_set(a: &CellSet, b: &CellSet) -> usize {
    let mut sumset = HashSet::with_capacity(a.len() * 4);
    for x in a.iter() {
        for y in b.iter() {
            sumset.insert(x - y);
        }
    }
    sumset.len()
}

/// A bond with exactly one endpoint in the region.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingBond {
    pub inside: usize,
    pub outside_cell: GroupElement,
    pub outside_vertex: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// The vertex set `φ(I)` of a finite cell set, with canonical flat indices.
#[derive(Debug, Clone)]
pub struct CoverRegion {
    cell: Arc<FundamentalCell>,
    cells: Vec<GroupElement>,
    cell_index: HashMap<GroupElement, usize>,
    edges: Vec<RegionEdge>,
    crossing: Vec<CrossingBond>,
}

impl PartialEq for CoverRegion {
    fn eq(&self, other: &Self) -> bool {
        self.cell == other.cell
            && self.cells == other.cells
            && self.edges == other.edges
            && self.crossing == other.crossing
    }
}

/// Builds `φ(I)`: every copy of the cell's internal edges, cross bonds with
/// both ends in `I`, and the crossing bonds leaving it.
pub fn build_region(cell: &Arc<FundamentalCell>, cells: &CellSet) -> CoverRegion {
    assert!(!cells.is_empty(), "build_region on an empty cell set");
    let m = cell.m();
    let list: Vec<GroupElement> = cells.iter().cloned().collect();
    let cell_index: HashMap<GroupElement, usize> =
        list.iter().enumerate().map(|(k, g)| (g.clone(), k)).collect();
    let mut edges = Vec::new();
    let mut crossing = Vec::new();
    for (k, g) in list.iter().enumerate() {
        let base = k * m;
        for e in cell.internal_edges() {
            edges.push(RegionEdge { a: base + e.a, b: base + e.b, weight: e.weight });
        }
        for b in cell.cross_bonds() {
            let target = g + &b.offset;
            match cell_index.get(&target) {
                Some(&t) => edges.push(RegionEdge { a: base + b.from, b: t * m + b.to, weight: b.weight }),
                None => crossing.push(CrossingBond {
                    inside: base + b.from,
                    outside_cell: target,
                    outside_vertex: b.to,
                    weight: b.weight,
                }),
            }
        }
        for b in cell.cross_bonds() {
            let source = g - &b.offset;
            if !cell_index.contains_key(&source) {
                crossing.push(CrossingBond {
                    inside: base + b.to,
                    outside_cell: source,
                    outside_vertex: b.from,
                    weight: b.weight,
                });
            }
        }
    }
    CoverRegion { cell: Arc::clone(cell), cells: list, cell_index, edges, crossing }
}

impl CoverRegion {
    pub fn cell(&self) -> &Arc<FundamentalCell> {
        &self.cell
    }

    /// Cells in canonical (lexicographic) order.
    pub fn cells(&self) -> &[GroupElement] {
        &self.cells
    }

    pub fn cell_set(&self) -> CellSet {
        CellSet::from_cells(self.cells.iter().cloned())
    }

    pub fn n(&self) -> usize {
        self.cells.len() * self.cell.m()
    }

    /// Edges with both endpoints inside, in canonical order.
    pub fn edges(&self) -> &[RegionEdge] {
        &self.edges
    }

    pub fn crossing_bonds(&self) -> &[CrossingBond] {
        &self.crossing
    }

    pub fn flat_index(&self, g: &GroupElement, local: usize) -> Option<usize> {
        if local >= self.cell.m() {
            return None;
        }
        self.cell_index.get(g).map(|k| k * self.cell.m() + local)
    }

    pub fn vertex(&self, flat: usize) -> (&GroupElement, usize) {
        let m = self.cell.m();
        (&self.cells[flat / m], flat % m)
    }

    /// Flat indices of the vertices in cell `g`, if present.
    pub fn cell_vertices(&self, g: &GroupElement) -> Option<std::ops::Range<usize>> {
        let m = self.cell.m();
        self.cell_index.get(g).map(|k| k * m..(k + 1) * m)
    }

    /// `|crossing bonds| / n`.
    pub fn boundary_ratio(&self) -> f64 {
        self.crossing.len() as f64 / self.n() as f64
    }

    /// Cells of the region and every cell reached by a crossing bond.
    pub fn closure_cells(&self) -> CellSet {
        CellSet::from_cells(
            self.cells.iter().cloned().chain(self.crossing.iter().map(|c| c.outside_cell.clone())),
        )
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }
}

/// A vertex permutation: `map[k]` is the image of flat index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Permutation) -> Permutation {
        Permutation(first.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn is_bijection(&self) -> bool {
        let mut hit = vec![false; self.0.len()];
        self.0.iter().all(|&k| k < hit.len() && !std::mem::replace(&mut hit[k], true))
    }
}

/// The translated region `φ(I + γ)` and the deck transformation as a
/// permutation of flat indices.
pub fn act(g: &GroupElement, region: &CoverRegion) -> (CoverRegion, Permutation) {
    let moved = build_region(&region.cell, &region.cell_set().translate(g));
    let m = region.cell.m();
    let map = (0..region.n())
        .map(|k| {
            let (c, i) = region.vertex(k);
            moved.flat_index(&(c + g), i).expect("translated vertex lies in translated region")
        })
        .collect();
    debug_assert_eq!(moved.n(), region.cells.len() * m);
    (moved, Permutation(map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: &[i64]) -> GroupElement {
        GroupElement::new(v.to_vec())
    }

    fn line() -> Arc<FundamentalCell> {
        Arc::new(FundamentalCell::hypercubic(1))
    }

    #[test]
    fn box_sequence_sizes() {
        let seq = box_folner(1, 2).unwrap();
        assert_eq!(seq.sets()[0], CellSet::from_cells((-1..=1).map(|x| g(&[x]))));
        assert_eq!(seq.sets()[1], CellSet::from_cells((-2..=2).map(|x| g(&[x]))));
        assert_eq!(box_folner(2, 1).unwrap().sets()[0].len(), 9);
        assert_eq!(box_folner(3, 2).unwrap().sets()[1].len(), 125);
        assert!(box_folner(0, 1).is_err());
        assert!(box_folner(1, 0).is_err());
        assert!(box_folner(2, 4).unwrap().check_monotone().is_ok());
    }

    #[test]
    fn defect_examples() {
        for j in 1..=10u32 {
            let d = folner_defect(&CellSet::centered_box(1, j), &g(&[1]));
            assert_eq!(d, Ratio::new(2, 2 * j as u64 + 1));
        }
        assert_eq!(folner_defect(&CellSet::centered_box(2, 3), &g(&[0, 0])), Ratio::new(0, 1));
        assert_eq!(folner_defect(&CellSet::centered_box(2, 2), &g(&[1, 0])), Ratio::new(10, 25));
    }

    #[test]
    fn tempered_examples() {
        let seq = FolnerSequence::centered_boxes(1, &[1, 2]).unwrap();
        let rep = is_tempered(&seq, 3.0).unwrap();
        assert_eq!(rep.sup_ratio, Ratio::new(7, 5));
        assert!(rep.tempered);

        let single = FolnerSequence::new(vec![CellSet::singleton(g(&[0])); 4]).unwrap();
        let rep = is_tempered(&single, 1.5).unwrap();
        assert_eq!(rep.sup_ratio, Ratio::new(1, 1));

        let bad = FolnerSequence::new(vec![CellSet::centered_box(1, 2), CellSet::centered_box(1, 1)]).unwrap();
        assert_eq!(is_tempered(&bad, 3.0), Err(IdsError::NonMonotoneSequence { index: 0 }));
    }

    #[test]
    fn box_difference_set_matches_enumeration() {
        let big = CellSet::centered_box(2, 3);
        let small = CellSet::anchored_box(2, 2);
        assert_eq!(difference_set_size(&big, &small), enumerate_difference_set(&big, &small));
        let ragged = CellSet::from_cells([g(&[0, 0]), g(&[2, 1]), g(&[-1, 3])]);
        assert!(ragged.as_box().is_none());
        assert_eq!(difference_set_size(&big, &ragged), enumerate_difference_set(&big, &ragged));
    }

    #[test]
    fn line_region() {
        let cells = CellSet::from_cells([g(&[0]), g(&[1]), g(&[2])]);
        let r = build_region(&line(), &cells);
        assert_eq!(r.n(), 3);
        assert_eq!(r.edges().len(), 2);
        assert_eq!(r.crossing_bonds().len(), 2);
        assert!(r.is_connected());
    }

    #[test]
    fn single_cell_region() {
        let r = build_region(&Arc::new(FundamentalCell::ladder()), &CellSet::singleton(g(&[0])));
        assert_eq!(r.n(), 2);
        assert_eq!(r.edges().len(), 1);
        assert_eq!(r.crossing_bonds().len(), 4);
    }

    #[test]
    fn ladder_region() {
        let r = build_region(&Arc::new(FundamentalCell::ladder()), &CellSet::from_cells([g(&[0]), g(&[1])]));
        assert_eq!(r.n(), 4);
        // two rungs, two rail segments
        assert_eq!(r.edges().len(), 4);
        // both rails leave through each end
        assert_eq!(r.crossing_bonds().len(), 4);
    }

    #[test]
    fn flat_index_is_bijective() {
        let cell = Arc::new(FundamentalCell::ladder());
        let r = build_region(&cell, &CellSet::centered_box(1, 3));
        let mut hit = vec![false; r.n()];
        for c in r.cells() {
            for i in 0..cell.m() {
                let k = r.flat_index(c, i).unwrap();
                assert!(!hit[k]);
                hit[k] = true;
                assert_eq!(r.vertex(k), (c, i));
            }
        }
        assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn act_identity_and_inverse() {
        let r = build_region(&line(), &CellSet::from_cells([g(&[0]), g(&[1])]));
        let (same, p0) = act(&g(&[0]), &r);
        assert_eq!(same, r);
        assert_eq!(p0, Permutation::identity(2));

        let (moved, p) = act(&g(&[1]), &r);
        assert_eq!(moved.cell_set(), CellSet::from_cells([g(&[1]), g(&[2])]));
        assert!(p.is_bijection());
        let (back, q) = act(&g(&[-1]), &moved);
        assert_eq!(back, r);
        assert_eq!(q.after(&p), Permutation::identity(2));
    }

    #[test]
    fn cell_validation() {
        let b = |f, o: i64, t| CrossBond { from: f, offset: g(&[o]), to: t, weight: 1.0 };
        // reversed duplicate
        assert!(FundamentalCell::new(1, vec![1.0], vec![], vec![b(0, 1, 0), b(0, -1, 0)]).is_err());
        // disconnected: only even sites are linked to each other
        assert!(FundamentalCell::new(1, vec![1.0], vec![], vec![b(0, 2, 0)]).is_err());
        // nonpositive weight
        assert!(FundamentalCell::new(1, vec![0.0], vec![], vec![b(0, 1, 0)]).is_err());
        // zero offset
        assert!(FundamentalCell::new(1, vec![1.0, 1.0], vec![], vec![b(0, 0, 1)]).is_err());
        assert!(FundamentalCell::new(1, vec![1.0, 2.0], vec![CellEdge { a: 0, b: 1, weight: 0.5 }], vec![b(1, 1, 0)]).is_ok());
    }

    #[test]
    fn cell_serde_validates() {
        let json = r#"{"dim":1,"vertex_weights":[1.0],"cross_bonds":[{"from":0,"offset":[1],"to":0}]}"#;
        let cell: FundamentalCell = serde_json::from_str(json).unwrap();
        assert_eq!(cell, FundamentalCell::hypercubic(1));
        let bad = r#"{"dim":1,"vertex_weights":[1.0],"cross_bonds":[{"from":0,"offset":[2],"to":0}]}"#;
        assert!(serde_json::from_str::<FundamentalCell>(bad).is_err());
    }
}
