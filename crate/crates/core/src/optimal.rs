//! Optimal orderings, their closed-form rates, and the high-SNR gap bounds.
//!
//! With users sorted by SNR (`x_1 <= ... <= x_N`):
//!
//! - the chain `1-2-...-N` maximises the common rate,
//! - the star centred on user 1 maximises the sum rate under the weak bound.
//!
//! Both are expressed over canonical indices; use
//! [`Ordering::to_original`](crate::model::Ordering::to_original) to map them
//! back to input positions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_client_graph, ClientGraph, Ordering, SnrProfile};
use crate::rate::{self, d_bound, pair_rate_unchecked, BoundKind, RateReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Common,
    Sum,
}

impl Objective {
    pub fn value(self, report: &RateReport) -> f64 {
        match self {
            Objective::Common => report.common_rate,
            Objective::Sum => report.sum_rate,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Common => f.write_str("common"),
            Objective::Sum => f.write_str("sum"),
        }
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "common" => Ok(Objective::Common),
            "sum" => Ok(Objective::Sum),
            other => Err(format!("unknown objective `{other}`, expected common or sum")),
        }
    }
}

/// Path over the SNR-sorted users: `{1,2}, {2,3}, ..., {N-1,N}`.
pub fn chain_ordering(n: usize) -> Result<Ordering> {
    if n < 2 {
        return Err(Error::TooFewUsers(n));
    }
    Ordering::new((1..n).map(|i| (i, i + 1)).collect())
}

/// Star centred on the weakest user: `{2,1}, {3,1}, ..., {N,1}`.
pub fn star_ordering(n: usize) -> Result<Ordering> {
    if n < 2 {
        return Err(Error::TooFewUsers(n));
    }
    Ordering::new((2..=n).map(|i| (i, 1)).collect())
}

/// Largest achievable common rate over all tree orderings:
/// `min_{i<N} log2(x_i + x_i / (x_i + x_{i+1})) / (2(N-1))`.
///
/// Each term is the bound of the weaker endpoint of chain edge `{i, i+1}`.
pub fn max_common_rate_closed_form(profile: &SnrProfile) -> f64 {
    let n = profile.len();
    profile
        .values()
        .windows(2)
        .map(|w| pair_rate_unchecked(w[0], w[1], n - 1, BoundKind::Weak))
        .fold(f64::INFINITY, f64::min)
}

fn star_d_terms(profile: &SnrProfile) -> impl Iterator<Item = f64> + '_ {
    let x1 = profile.min();
    let first = d_bound(x1, profile.max());
    std::iter::once(first).chain(profile.values()[1..].iter().map(move |&x| d_bound(x, x1)))
}

/// Largest sum rate, with every user's factor clamped at `max{1, .}`:
///
/// ```text
/// log2( max{1, x_1 + x_1/(x_1+x_N)} * prod_{i>=2} max{1, x_i/(x_i+x_1) + x_i} ) / (2(N-1))
/// ```
///
/// The log of the product is accumulated as a sum of per-user logs in user
/// order, which is bit-identical to the star's evaluated sum rate.
pub fn max_sum_rate_closed_form(profile: &SnrProfile) -> f64 {
    let m2 = 2.0 * (profile.len() - 1) as f64;
    star_d_terms(profile).map(|d| d.max(1.0).log2() / m2).sum()
}

/// `true` when some factor of the sum-rate closed form is clamped to 1.
pub fn sum_clamp_active(profile: &SnrProfile) -> bool {
    star_d_terms(profile).any(|d| d < 1.0)
}

/// `x_1 + x_1 / (x_1 + x_N) >= 1`: the clamped and unclamped bounds coincide
/// for every tree.
pub fn weak_bound_equivalent(profile: &SnrProfile) -> bool {
    d_bound(profile.min(), profile.max()) >= 1.0
}

/// Upper bounds on how far a random tree can fall behind the optimal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBounds {
    pub common_gap_bound: f64,
    pub sum_gap_bound: f64,
}

/// ```text
/// C_R gap <= log2((1 + 2 x_N) / (2 x_1)) / (2(N-1))
/// S_R gap <= log2(x_N (1 + 2 x_1) / (x_1 (1 + 2 x_N))) / 2
/// ```
pub fn gap_bounds(profile: &SnrProfile) -> GapBounds {
    let n = profile.len() as f64;
    let (x1, xn) = (profile.min(), profile.max());
    GapBounds {
        common_gap_bound: ((1.0 + 2.0 * xn) / (2.0 * x1)).log2() / (2.0 * (n - 1.0)),
        sum_gap_bound: (xn * (1.0 + 2.0 * x1) / (x1 * (1.0 + 2.0 * xn))).log2() / 2.0,
    }
}

/// `V(G, v_i, v_j, v_k)`: replaces edge `v_i v_k` with `v_j v_k`.
///
/// Requires `v_i v_j` and `v_i v_k` to be edges. On a tree this moves the
/// subtree hanging off `v_k` from `v_i` to `v_j` and keeps it a tree.
pub fn v_transform(graph: &ClientGraph, i: usize, j: usize, k: usize) -> Result<ClientGraph> {
    if i == j || j == k || i == k {
        return Err(Error::DegenerateTransform(i, j, k));
    }
    for (a, b) in [(i, j), (i, k)] {
        if !graph.has_edge(a, b) {
            return Err(Error::MissingEdge(a, b));
        }
    }
    let removed = (i.min(k), i.max(k));
    ClientGraph::from_edges(
        graph.vertex_count(),
        graph
            .edges()
            .iter()
            .copied()
            .filter(|&e| e != removed)
            .chain(std::iter::once((j, k))),
    )
}

/// Exchanges the partners of two leaves `a` and `b`.
///
/// With `a`'s sole neighbour `p` and `b`'s sole neighbour `q`, edges `{a,p}`
/// and `{b,q}` become `{a,q}` and `{b,p}`.
pub fn swap_leaf_partners(graph: &ClientGraph, a: usize, b: usize) -> Result<ClientGraph> {
    let (p, q) = match (graph.neighbors(a), graph.neighbors(b)) {
        ([p], [q]) => (*p, *q),
        _ => {
            return Err(Error::NotATree {
                vertices: graph.vertex_count(),
                edges: graph.edge_count(),
            })
        }
    };
    let drop = [(a.min(p), a.max(p)), (b.min(q), b.max(q))];
    ClientGraph::from_edges(
        graph.vertex_count(),
        graph
            .edges()
            .iter()
            .copied()
            .filter(|e| !drop.contains(e))
            .chain([(a, q), (b, p)]),
    )
}

/// Constructive optimum for one objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub objective: Objective,
    /// Over canonical indices.
    pub ordering: Ordering,
    /// Closed-form optimum (clamped at `max{1, .}` for the sum rate).
    pub closed_form: f64,
    /// The same ordering run through [`rate::evaluate`] under the weak bound.
    pub evaluated: f64,
    /// Profile is outside the region where weak and exact bounds agree.
    pub low_snr: bool,
}

/// Optimal ordering for `objective` together with its closed-form and
/// evaluated rates.
pub fn optimum(profile: &SnrProfile, objective: Objective) -> Result<Optimum> {
    let n = profile.len();
    let (ordering, closed_form) = match objective {
        Objective::Common => (chain_ordering(n)?, max_common_rate_closed_form(profile)),
        Objective::Sum => (star_ordering(n)?, max_sum_rate_closed_form(profile)),
    };
    let graph = build_client_graph(&ordering, n)?;
    let report = rate::evaluate(&graph, profile, BoundKind::Weak)?;
    let low_snr = match objective {
        Objective::Common => !weak_bound_equivalent(profile),
        Objective::Sum => !weak_bound_equivalent(profile) || sum_clamp_active(profile),
    };
    Ok(Optimum {
        objective,
        ordering,
        closed_form,
        evaluated: objective.value(&report),
        low_snr,
    })
}
