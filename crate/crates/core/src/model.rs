//! Users, SNR profiles, orderings and client graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-user SNRs in canonical (nondecreasing) order.
///
/// `original_label[i - 1]` is the 1-based position, in the caller's input, of
/// canonical user `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrProfile {
    values: Vec<f64>,
    original_label: Vec<usize>,
}

/// Sorts raw per-user SNRs into a [`SnrProfile`].
///
/// The sort is stable, so users with equal SNR keep their input order.
pub fn canonicalize(raw_snrs: &[f64]) -> Result<SnrProfile> {
    if raw_snrs.len() < 2 {
        return Err(Error::TooFewUsers(raw_snrs.len()));
    }
    for (i, &v) in raw_snrs.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveSnr { index: i + 1, value: v });
        }
    }
    let mut order: Vec<usize> = (0..raw_snrs.len()).collect();
    order.sort_by(|&a, &b| raw_snrs[a].total_cmp(&raw_snrs[b]));
    Ok(SnrProfile {
        values: order.iter().map(|&i| raw_snrs[i]).collect(),
        original_label: order.iter().map(|&i| i + 1).collect(),
    })
}

impl SnrProfile {
    /// Number of users `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// SNR of canonical user `i` (1-based).
    pub fn x(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn original_label(&self) -> &[usize] {
        &self.original_label
    }

    /// Smallest SNR, `x_1`.
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest SNR, `x_N`.
    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Input position of canonical user `i`.
    pub fn to_original(&self, i: usize) -> usize {
        self.original_label[i - 1]
    }

    /// Canonical index of the user given at input position `label`.
    pub fn to_canonical(&self, label: usize) -> Result<usize> {
        self.original_label
            .iter()
            .position(|&l| l == label)
            .map(|p| p + 1)
            .ok_or(Error::IndexOutOfRange {
                index: label,
                n: self.len(),
            })
    }
}

/// A schedule of user pairs, one pair per uplink phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    pairs: Vec<(usize, usize)>,
}

impl Ordering {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyOrdering);
        }
        if let Some(&(a, _)) = pairs.iter().find(|(a, b)| a == b) {
            return Err(Error::SelfPair(a));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of uplink phases `M`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Rewrites canonical indices into the profile's input positions.
    pub fn to_original(&self, profile: &SnrProfile) -> Ordering {
        let pairs = self
            .pairs
            .iter()
            .map(|&(a, b)| (profile.to_original(a), profile.to_original(b)))
            .collect();
        Ordering { pairs }
    }

    /// Rewrites input positions into canonical indices.
    pub fn to_canonical(&self, profile: &SnrProfile) -> Result<Ordering> {
        let pairs = self
            .pairs
            .iter()
            .map(|&(a, b)| Ok((profile.to_canonical(a)?, profile.to_canonical(b)?)))
            .collect::<Result<_>>()?;
        Ok(Ordering { pairs })
    }
}

/// JSON interchange form of an ordering.
///
/// ```json
/// {"n":3,"pairs":[[1,2],[2,3]],"labels":["alice","bob","carol"]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingDoc {
    pub n: usize,
    pub pairs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl OrderingDoc {
    pub fn new(n: usize, ordering: &Ordering) -> Self {
        Self {
            n,
            pairs: ordering.pairs().iter().map(|&(a, b)| [a, b]).collect(),
            labels: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: OrderingDoc = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ordering document always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewUsers(self.n));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.n {
                return Err(Error::LabelCount {
                    n: self.n,
                    labels: labels.len(),
                });
            }
        }
        for &[a, b] in &self.pairs {
            for idx in [a, b] {
                if idx == 0 || idx > self.n {
                    return Err(Error::IndexOutOfRange { index: idx, n: self.n });
                }
            }
        }
        Ok(())
    }

    pub fn ordering(&self) -> Result<Ordering> {
        Ordering::new(self.pairs.iter().map(|&[a, b]| (a, b)).collect())
    }
}

/// Undirected simple graph on vertices `1..=n`, one edge per distinct pair of
/// an ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientGraph {
    n: usize,
    /// Sorted, each edge stored as `(lo, hi)`.
    edges: Vec<(usize, usize)>,
    /// `adjacency[v - 1]` is the sorted neighbour list of `v`.
    adjacency: Vec<Vec<usize>>,
    duplicates: Vec<(usize, usize)>,
}

/// Builds the client graph of `ordering` on `n` users.
///
/// Repeated pairs collapse to a single edge and are listed in
/// [`ClientGraph::collapsed_duplicates`].
pub fn build_client_graph(ordering: &Ordering, n: usize) -> Result<ClientGraph> {
    ClientGraph::from_edges(n, ordering.pairs().iter().copied())
}

fn normalize(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ClientGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewUsers(n));
        }
        let mut set = BTreeSet::new();
        let mut duplicates = Vec::new();
        for (a, b) in edges {
            for idx in [a, b] {
                if idx == 0 || idx > n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            if a == b {
                return Err(Error::SelfPair(a));
            }
            let e = normalize(a, b);
            if !set.insert(e) {
                duplicates.push(e);
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a - 1].push(b);
            adjacency[b - 1].push(a);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(Self {
            n,
            edges,
            adjacency,
            duplicates,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Pairs that appeared more than once in the source ordering.
    pub fn collapsed_duplicates(&self) -> &[(usize, usize)] {
        &self.duplicates
    }

    /// Neighbour set `A_v` of vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v - 1]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v - 1].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&normalize(a, b)).is_ok()
    }

    /// 0/1 adjacency matrix, row `i - 1` for vertex `i`.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.n]; self.n];
        for &(a, b) in &self.edges {
            m[a - 1][b - 1] = 1;
            m[b - 1][a - 1] = 1;
        }
        m
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![1usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w - 1] {
                    seen[w - 1] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Every user can solve for every other user's message.
    ///
    /// Edges on a cycle carry a redundant equation, so solvability reduces to
    /// connectivity. With `N - 1` edges this is the tree condition.
    pub fn is_feasible(&self) -> bool {
        self.is_connected()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.n - 1 && self.is_connected()
    }

    /// Graph with one edge removed.
    pub fn without_edge(&self, a: usize, b: usize) -> Result<Self> {
        if !self.has_edge(a, b) {
            return Err(Error::MissingEdge(a, b));
        }
        let e = normalize(a, b);
        Self::from_edges(self.n, self.edges.iter().copied().filter(|&x| x != e))
    }

    /// Ordering with one pair per edge, in sorted edge order.
    pub fn to_ordering(&self) -> Ordering {
        Ordering {
            pairs: self.edges.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, pairs: &[(usize, usize)]) -> ClientGraph {
        build_client_graph(&Ordering::new(pairs.to_vec()).unwrap(), n).unwrap()
    }

    #[test]
    fn path_graph() {
        let g = graph(3, &[(1, 2), (2, 3)]);
        assert_eq!(g.edges(), &[(1, 2), (2, 3)]);
        assert_eq!(g.neighbors(2), &[1, 3]);
        assert_eq!(g.degree(1), 1);
        assert!(g.is_feasible());
        assert!(g.is_tree());
        assert!(g.collapsed_duplicates().is_empty());
    }

    #[test]
    fn triangle_is_feasible_but_not_tree() {
        let g = graph(3, &[(1, 2), (2, 3), (3, 1)]);
        assert_eq!(g.edge_count(), 3);
        assert!(g.is_feasible());
        assert!(!g.is_tree());
    }

    #[test]
    fn duplicate_pairs_collapse() {
        let g = graph(2, &[(1, 2), (2, 1)]);
        assert_eq!(g.edges(), &[(1, 2)]);
        assert_eq!(g.collapsed_duplicates(), &[(1, 2)]);
        assert!(g.is_tree());
    }

    #[test]
    fn disjoint_edges_infeasible() {
        let g = graph(4, &[(1, 2), (3, 4)]);
        assert!(!g.is_feasible());
        assert!(!g.is_tree());
    }

    #[test]
    fn star_is_tree() {
        let g = graph(4, &[(1, 2), (1, 3), (1, 4)]);
        assert!(g.is_tree());
        assert_eq!(g.degree(1), 3);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn adjacency_matrix_symmetric_zero_diagonal() {
        let g = graph(4, &[(1, 2), (2, 3), (4, 2)]);
        let m = g.adjacency_matrix();
        for i in 0..4 {
            assert_eq!(m[i][i], 0);
            for j in 0..4 {
                assert_eq!(m[i][j], m[j][i]);
                assert_eq!(m[i][j] == 1, g.has_edge(i + 1, j + 1));
            }
        }
    }

    #[test]
    fn build_errors() {
        let o = Ordering::new(vec![(1, 4)]).unwrap();
        assert_eq!(
            build_client_graph(&o, 3),
            Err(Error::IndexOutOfRange { index: 4, n: 3 })
        );
        let o = Ordering::new(vec![(1, 2)]).unwrap();
        assert_eq!(build_client_graph(&o, 1), Err(Error::TooFewUsers(1)));
        assert_eq!(Ordering::new(vec![(2, 2)]), Err(Error::SelfPair(2)));
        assert_eq!(Ordering::new(vec![]), Err(Error::EmptyOrdering));
    }

    #[test]
    fn canonicalize_sorts_and_labels() {
        let p = canonicalize(&[4.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.values(), &[1.0, 2.0, 4.0]);
        assert_eq!(p.original_label(), &[2, 3, 1]);
        assert_eq!(p.to_canonical(1).unwrap(), 3);
    }

    #[test]
    fn canonicalize_stable_on_ties() {
        let p = canonicalize(&[1.0, 1.0]).unwrap();
        assert_eq!(p.values(), &[1.0, 1.0]);
        assert_eq!(p.original_label(), &[1, 2]);
    }

    #[test]
    fn canonicalize_rejects_bad_input() {
        assert_eq!(
            canonicalize(&[0.0, 1.0]),
            Err(Error::NonPositiveSnr { index: 1, value: 0.0 })
        );
        assert!(canonicalize(&[1.0, f64::NAN]).is_err());
        assert_eq!(canonicalize(&[5.0]), Err(Error::TooFewUsers(1)));
    }

    #[test]
    fn ordering_relabel_roundtrip() {
        let p = canonicalize(&[4.0, 1.0, 2.0]).unwrap();
        let chain = Ordering::new(vec![(1, 2), (2, 3)]).unwrap();
        let orig = chain.to_original(&p);
        assert_eq!(orig.pairs(), &[(2, 3), (3, 1)]);
        assert_eq!(orig.to_canonical(&p).unwrap(), chain);
    }

    #[test]
    fn ordering_doc_json() {
        let text = r#"{"n":3,"pairs":[[1,2],[2,3]],"labels":["a","b","c"]}"#;
        let doc = OrderingDoc::from_json(text).unwrap();
        assert_eq!(doc.to_json(), text);
        let bare = r#"{"n":2,"pairs":[[2,1]]}"#;
        assert_eq!(OrderingDoc::from_json(bare).unwrap().to_json(), bare);
        assert!(OrderingDoc::from_json(r#"{"n":2,"pairs":[[1,3]]}"#).is_err());
        assert!(OrderingDoc::from_json(r#"{"n":2,"pairs":[[1,2]],"labels":["a"]}"#).is_err());
        assert!(OrderingDoc::from_json(r#"{"n":2}"#).is_err());
    }
}
