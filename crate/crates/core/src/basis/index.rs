use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// A multi-index α ∈ ℕ₀ⁿ.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |α| = Σ α_j.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn max_entry(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// All multi-indices of length `n` and degree exactly `k`, in graded order.
    pub fn of_degree(n: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0; n];
        fill_degree(&mut cur, 0, k, &mut out);
        out.sort();
        out
    }

    /// All multi-indices of length `n` with degree at most `k_max`, graded-lex.
    pub fn up_to_degree(n: usize, k_max: usize) -> Vec<MultiIndex> {
        (0..=k_max).flat_map(|k| Self::of_degree(n, k)).collect()
    }
}

fn fill_degree(cur: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        fill_degree(cur, pos + 1, remaining - v, out);
    }
}

/// Graded lexicographic: first by degree, then entry by entry.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// A mode label (μ, ν) of the special Hermite basis. The twisted Laplacian
/// acts on Φ_μν with eigenvalue 2|ν| + n.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndexPair {
    pub mu: MultiIndex,
    pub nu: MultiIndex,
}

impl MultiIndexPair {
    pub fn new(mu: MultiIndex, nu: MultiIndex) -> Result<Self> {
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: nu.dim(),
            });
        }
        if mu.dim() == 0 {
            return Err(out_of_range("n", "dimension must be at least 1"));
        }
        Ok(MultiIndexPair { mu, nu })
    }

    /// Convenience constructor for n = 1.
    pub fn scalar(mu: usize, nu: usize) -> Self {
        MultiIndexPair {
            mu: MultiIndex(vec![mu]),
            nu: MultiIndex(vec![nu]),
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn eigenvalue(&self) -> usize {
        2 * self.nu.degree() + self.dim()
    }

    pub fn max_entry(&self) -> usize {
        self.mu.max_entry().max(self.nu.max_entry())
    }
}

impl Ord for MultiIndexPair {
    fn cmp(&self, other: &Self) -> Ordering {
        let da = self.mu.degree() + self.nu.degree();
        let db = other.mu.degree() + other.nu.degree();
        da.cmp(&db)
            .then_with(|| self.mu.cmp(&other.mu))
            .then_with(|| self.nu.cmp(&other.nu))
    }
}

impl PartialOrd for MultiIndexPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.mu, self.nu)
    }
}

/// A finite, ordered set of modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    n: usize,
    k_max: usize,
    index_set: Vec<MultiIndexPair>,
}

impl Truncation {
    /// Every pair with |μ|, |ν| ≤ `k_max`, sorted graded-lex.
    pub fn new(n: usize, k_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(out_of_range("n", "dimension must be at least 1"));
        }
        let singles = MultiIndex::up_to_degree(n, k_max);
        let mut index_set = Vec::with_capacity(singles.len() * singles.len());
        for mu in &singles {
            for nu in &singles {
                index_set.push(MultiIndexPair {
                    mu: mu.clone(),
                    nu: nu.clone(),
                });
            }
        }
        index_set.sort();
        Ok(Truncation {
            n,
            k_max,
            index_set,
        })
    }

    /// An explicit set of modes. Duplicates are rejected; the given order is kept.
    pub fn from_pairs(n: usize, pairs: Vec<MultiIndexPair>) -> Result<Self> {
        if n == 0 {
            return Err(out_of_range("n", "dimension must be at least 1"));
        }
        let mut seen = std::collections::HashSet::new();
        let mut k_max = 0;
        for p in &pairs {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            if !seen.insert(p.clone()) {
                return Err(out_of_range("pairs", format!("duplicate mode {p:?}")));
            }
            k_max = k_max.max(p.mu.degree()).max(p.nu.degree());
        }
        Ok(Truncation {
            n,
            k_max,
            index_set: pairs,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn pairs(&self) -> &[MultiIndexPair] {
        &self.index_set
    }

    pub fn position(&self, pair: &MultiIndexPair) -> Option<usize> {
        self.index_set.iter().position(|p| p == pair)
    }

    /// Largest single entry of any μ or ν; drives the 1D tables.
    pub fn max_entry(&self) -> usize {
        self.index_set
            .iter()
            .map(MultiIndexPair::max_entry)
            .max()
            .unwrap_or(0)
    }

    /// Eigenvalues 2|ν| + n aligned with the index set.
    pub fn eigenvalues(&self) -> Vec<usize> {
        self.index_set.iter().map(MultiIndexPair::eigenvalue).collect()
    }
}

/// Number of multi-indices of length `n` with degree ≤ `k`: C(k + n, n).
pub fn count_up_to_degree(n: usize, k: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (k as u128 + i) / i;
    }
    c as usize
}

/// Deterministic graded-lex enumeration of Truncation(n, k_max).
pub fn enumerate_pairs(n: usize, k_max: usize) -> Result<Truncation> {
    Truncation::new(n, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_truncations() {
        let t = enumerate_pairs(1, 0).unwrap();
        assert_eq!(t.pairs(), &[MultiIndexPair::scalar(0, 0)]);
        assert_eq!(enumerate_pairs(1, 1).unwrap().len(), 4);
        assert_eq!(enumerate_pairs(2, 1).unwrap().len(), 9);
        assert_eq!(enumerate_pairs(2, 3).unwrap().len(), 100);
    }

    #[test]
    fn ordering_is_graded_and_stable() {
        let t = enumerate_pairs(1, 2).unwrap();
        let labels: Vec<(usize, usize)> = t
            .pairs()
            .iter()
            .map(|p| (p.mu.entries()[0], p.nu.entries()[0]))
            .collect();
        assert_eq!(
            labels,
            vec![
                (0, 0),
                (0, 1),
                (1, 0),
                (0, 2),
                (1, 1),
                (2, 0),
                (1, 2),
                (2, 1),
                (2, 2)
            ]
        );
        assert_eq!(t, enumerate_pairs(1, 2).unwrap());
    }

    #[test]
    fn degree_sets() {
        assert_eq!(MultiIndex::of_degree(2, 2).len(), 3);
        assert_eq!(MultiIndex::of_degree(3, 2).len(), 6);
        assert_eq!(count_up_to_degree(2, 1), 3);
        assert_eq!(count_up_to_degree(1, 8), 9);
        assert_eq!(count_up_to_degree(3, 2), 10);
    }

    #[test]
    fn eigenvalue_uses_nu() {
        let p = MultiIndexPair::new(vec![3, 0].into(), vec![1, 2].into()).unwrap();
        assert_eq!(p.eigenvalue(), 2 * 3 + 2);
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(MultiIndexPair::new(vec![1].into(), vec![1, 0].into()).is_err());
        let dup = vec![MultiIndexPair::scalar(0, 1), MultiIndexPair::scalar(0, 1)];
        assert!(Truncation::from_pairs(1, dup).is_err());
    }
}
