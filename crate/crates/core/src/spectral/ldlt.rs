//! Envelope (skyline) `LDLᵀ` without pivoting, used only for its inertia.

use std::collections::VecDeque;

use crate::lattice::Permutation;
use crate::operator::SymmetricMatrix;

/// Row-envelope storage of the lower triangle: row `i` holds columns
/// `first[i]..=i` contiguously.
#[derive(Debug, Clone)]
pub struct Envelope {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

/// Inertia of a factorized matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub positive: usize,
}

/// A pivot whose magnitude fell below the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub row: usize,
    pub pivot: f64,
}

impl Envelope {
    /// Envelope of `A - shift · diag(mass)` in the ordering `order`, where
    /// `order.0[k]` is the new position of row `k`.
    pub fn shifted(a: &SymmetricMatrix, mass: &[f64], shift: f64, order: &Permutation) -> Self {
        let n = a.n();
        let p = &order.0;
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in a.upper() {
            let (r, c) = (p[i].max(p[j]), p[i].min(p[j]));
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, f) in first.iter().enumerate() {
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        let mut values = vec![0.0; total];
        for k in 0..n {
            let i = p[k];
            values[start[i] + i - first[i]] = a.diag()[k] - shift * mass[k];
        }
        for &(i, j, v) in a.upper() {
            let (r, c) = (p[i].max(p[j]), p[i].min(p[j]));
            values[start[r] + c - first[r]] += v;
        }
        Self { first, start, values }
    }

    /// Number of stored lower-triangle entries.
    pub fn profile(&self) -> usize {
        self.values.len()
    }

    /// Factorizes in place and returns the pivot signs. Any pivot with
    /// `|d| < tol` aborts with [`Breakdown`].
    pub fn factorize(mut self, tol: f64) -> Result<Inertia, Breakdown> {
        let n = self.first.len();
        let mut d = vec![0.0; n];
        let mut inertia = Inertia { negative: 0, positive: 0 };
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            // w_j = A_ij - Σ_k w_k L_jk, stored in place of A_ij
            for j in fi..i {
                let fj = self.first[j];
                let sj = self.start[j];
                let lo = fi.max(fj);
                let mut s = self.values[si + j - fi];
                for k in lo..j {
                    s -= self.values[si + k - fi] * self.values[sj + k - fj];
                }
                self.values[si + j - fi] = s;
            }
            let mut di = self.values[si + i - fi];
            for j in fi..i {
                let w = self.values[si + j - fi];
                let l = w / d[j];
                di -= w * l;
                self.values[si + j - fi] = l;
            }
            if !(di.abs() >= tol) {
                return Err(Breakdown { row: i, pivot: di });
            }
            d[i] = di;
            if di < 0.0 {
                inertia.negative += 1;
            } else {
                inertia.positive += 1;
            }
        }
        Ok(inertia)
    }
}

/// Profile of `a` in ordering `order`, without building the envelope.
pub fn profile_of(a: &SymmetricMatrix, order: &Permutation) -> usize {
    let n = a.n();
    let mut first: Vec<usize> = (0..n).collect();
    for &(i, j, _) in a.upper() {
        let (r, c) = (order.0[i].max(order.0[j]), order.0[i].min(order.0[j]));
        first[r] = first[r].min(c);
    }
    first.iter().enumerate().map(|(i, f)| i - f + 1).sum()
}

/// Reverse Cuthill–McKee ordering of the sparsity graph, started from a
/// pseudo-peripheral vertex of each component. Returns `order.0[k]` = new
/// position of vertex `k`.
pub fn reverse_cuthill_mckee(a: &SymmetricMatrix) -> Permutation {
    let n = a.n();
    let mut adj = vec![Vec::new(); n];
    for &(i, j, _) in a.upper() {
        adj[i].push(j);
        adj[j].push(i);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut visited = vec![false; n];
    let mut sequence = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        let start = pseudo_peripheral(&adj, root);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            sequence.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut order = vec![0; n];
    for (pos, &v) in sequence.iter().rev().enumerate() {
        order[v] = pos;
    }
    Permutation(order)
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = root;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let depth = level[last];
    (level, depth)
}

fn pseudo_peripheral(adj: &[Vec<usize>], root: usize) -> usize {
    let mut v = root;
    let (mut level, mut depth) = bfs_levels(adj, v);
    loop {
        let candidate = (0..adj.len())
            .filter(|&w| level[w] == depth)
            .min_by_key(|&w| (adj[w].len(), w))
            .unwrap_or(v);
        let (l2, d2) = bfs_levels(adj, candidate);
        if d2 <= depth {
            return v;
        }
        v = candidate;
        level = l2;
        depth = d2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, d: f64, e: f64) -> SymmetricMatrix {
        SymmetricMatrix::new(vec![d; n], (0..n - 1).map(|i| (i, i + 1, e)))
    }

    #[test]
    fn positive_definite_has_no_negative_pivots() {
        let a = tridiag(6, 2.0, -1.0);
        let env = Envelope::shifted(&a, &[1.0; 6], 0.0, &Permutation::identity(6));
        assert_eq!(env.factorize(1e-12).unwrap(), Inertia { negative: 0, positive: 6 });
    }

    #[test]
    fn shifted_inertia_counts_eigenvalues() {
        // eigenvalues of the Dirichlet path n=4: 2 - 2cos(kπ/5)
        let a = tridiag(4, 2.0, -1.0);
        for (shift, below) in [(0.3, 0), (0.4, 1), (1.5, 2), (3.2, 3), (3.7, 4)] {
            let env = Envelope::shifted(&a, &[1.0; 4], shift, &Permutation::identity(4));
            assert_eq!(env.factorize(1e-12).unwrap().negative, below, "shift {shift}");
        }
    }

    #[test]
    fn exact_singularity_breaks_down() {
        let a = tridiag(3, 2.0, -1.0);
        // 2 is an eigenvalue of the 3-path and the first pivot is exactly 0
        let env = Envelope::shifted(&a, &[1.0; 3], 2.0, &Permutation::identity(3));
        assert!(env.factorize(1e-12).is_err());
    }

    #[test]
    fn rcm_reduces_profile_of_scrambled_path() {
        let n = 40;
        // path with vertices numbered by a stride permutation
        let label = |k: usize| (k * 7) % n;
        let a = SymmetricMatrix::new(vec![2.0; n], (0..n - 1).map(|k| (label(k), label(k + 1), -1.0)));
        let natural = profile_of(&a, &Permutation::identity(n));
        let rcm = reverse_cuthill_mckee(&a);
        assert!(rcm.is_bijection());
        assert_eq!(profile_of(&a, &rcm), 2 * n - 1);
        assert!(natural > 2 * n - 1);
    }
}
