//! Prüfer codes over labelled trees, exhaustive enumeration, the brute-force
//! optimum, and uniform tree sampling.
//!
//! A code for `n` vertices is a sequence of `n - 2` labels in `1..=n`. Codes
//! and labelled trees are in bijection, which gives both the `n^(n-2)` count
//! of tree orderings and an exactly uniform sampler.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClientGraph, SnrProfile};
use crate::optimal::Objective;
use crate::rate::{evaluate_unchecked, BoundKind};
use crate::rates_agree;

/// Largest `n` enumerated without an explicit override.
pub const DEFAULT_ENUMERATION_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PruferCode {
    n: usize,
    labels: Vec<usize>,
}

impl PruferCode {
    pub fn new(n: usize, labels: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewUsers(n));
        }
        if labels.len() != n - 2 {
            return Err(Error::BadCodeLength {
                n,
                expected: n - 2,
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(Self { n, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The `index`-th code in lexicographic order, `index < n^(n-2)`.
    pub fn from_index(n: usize, mut index: u64) -> Self {
        let mut labels = vec![1; n.saturating_sub(2)];
        for slot in labels.iter_mut().rev() {
            *slot = (index % n as u64) as usize + 1;
            index /= n as u64;
        }
        Self { n, labels }
    }

    /// Position in lexicographic order.
    pub fn index(&self) -> u64 {
        self.labels
            .iter()
            .fold(0u64, |acc, &l| acc * self.n as u64 + (l - 1) as u64)
    }

    /// Edge list of the encoded tree, by repeated smallest-leaf elimination.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut degree = vec![1usize; n + 1];
        for &l in &self.labels {
            degree[l] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        let mut ptr = (1..=n).find(|&v| degree[v] == 1).unwrap_or(1);
        let mut leaf = ptr;
        for &v in &self.labels {
            edges.push((leaf, v));
            degree[v] -= 1;
            if v < ptr && degree[v] == 1 {
                leaf = v;
            } else {
                ptr += 1;
                while degree[ptr] != 1 {
                    ptr += 1;
                }
                leaf = ptr;
            }
        }
        edges.push((leaf, n));
        edges
    }

    pub fn decode(&self) -> ClientGraph {
        ClientGraph::from_edges(self.n, self.edges()).expect("Prüfer code decodes to a valid tree")
    }
}

/// Decodes `code` into a tree on `n` vertices.
pub fn prufer_decode(code: &[usize], n: usize) -> Result<ClientGraph> {
    Ok(PruferCode::new(n, code.to_vec())?.decode())
}

/// Prüfer code of a tree.
pub fn prufer_encode(graph: &ClientGraph) -> Result<PruferCode> {
    if !graph.is_tree() {
        return Err(Error::NotATree {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
        });
    }
    let n = graph.vertex_count();
    let mut degree: Vec<usize> = (0..=n).map(|v| if v == 0 { 0 } else { graph.degree(v) }).collect();
    let mut removed = vec![false; n + 1];
    let mut leaves: BinaryHeap<Reverse<usize>> = (1..=n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut labels = Vec::with_capacity(n - 2);
    while labels.len() < n - 2 {
        let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
        removed[leaf] = true;
        let parent = graph
            .neighbors(leaf)
            .iter()
            .copied()
            .find(|&w| !removed[w])
            .expect("leaf has one remaining neighbour");
        labels.push(parent);
        degree[parent] -= 1;
        if degree[parent] == 1 {
            leaves.push(Reverse(parent));
        }
    }
    PruferCode::new(n, labels)
}

/// `n^(n-2)`, the number of labelled trees on `n` vertices.
pub fn tree_count(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    (n as u64).pow((n - 2) as u32)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewUsers(n));
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    Ok(())
}

/// Every Prüfer code for `n` vertices in lexicographic order.
pub fn enumerate_codes(n: usize, cap: usize) -> Result<impl Iterator<Item = PruferCode>> {
    check_cap(n, cap)?;
    Ok((0..tree_count(n)).map(move |i| PruferCode::from_index(n, i)))
}

/// Every labelled tree on `n` vertices, once each, in lexicographic code
/// order.
pub fn enumerate_trees(n: usize, cap: usize) -> Result<impl Iterator<Item = ClientGraph>> {
    Ok(enumerate_codes(n, cap)?.map(|c| c.decode()))
}

/// Maximum of an objective over all trees and every tree attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub best_value: f64,
    /// Codes within [`crate::REL_TOL`] of `best_value`, lexicographic.
    pub co_optimal: Vec<PruferCode>,
    pub trees_searched: u64,
}

impl BruteForceResult {
    pub fn contains(&self, graph: &ClientGraph) -> bool {
        prufer_encode(graph)
            .map(|c| self.co_optimal.binary_search(&c).is_ok())
            .unwrap_or(false)
    }
}

fn objective_of(index: u64, profile: &SnrProfile, objective: Objective, kind: BoundKind) -> f64 {
    let n = profile.len();
    let tree = PruferCode::from_index(n, index).decode();
    let report = evaluate_unchecked(&tree, profile, kind, n - 1).expect("trees have no isolated vertex");
    objective.value(&report)
}

/// Searches all `N^(N-2)` trees for the best `objective`.
///
/// Runs in parallel over the code space. The maximum is taken first and the
/// co-optimal set collected in a second pass, so the result does not depend
/// on how the work is split.
pub fn brute_force_best(
    profile: &SnrProfile,
    objective: Objective,
    kind: BoundKind,
    cap: usize,
) -> Result<BruteForceResult> {
    let n = profile.len();
    check_cap(n, cap)?;
    let count = tree_count(n);
    let best_value = (0..count)
        .into_par_iter()
        .map(|i| objective_of(i, profile, objective, kind))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let co_optimal = (0..count)
        .into_par_iter()
        .filter(|&i| rates_agree(objective_of(i, profile, objective, kind), best_value))
        .map(|i| PruferCode::from_index(n, i))
        .collect();
    Ok(BruteForceResult {
        best_value,
        co_optimal,
        trees_searched: count,
    })
}

/// Uniformly random Prüfer code for `n` vertices.
pub fn sample_uniform_code<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PruferCode> {
    if n < 2 {
        return Err(Error::TooFewUsers(n));
    }
    let labels = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
    Ok(PruferCode { n, labels })
}

/// Tree drawn uniformly from all `n^(n-2)` labelled trees.
pub fn sample_uniform_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ClientGraph> {
    Ok(sample_uniform_code(n, rng)?.decode())
}
