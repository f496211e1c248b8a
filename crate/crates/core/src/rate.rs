//! FDF rate bounds and the common/sum rate of a client graph.
//!
//! When user `i` shares an uplink phase with user `j`, its rate is bounded by
//!
//! ```text
//! R_i <= (1 / 2M) * log2( x_i / (x_i + x_j) + x_i )
//! ```
//!
//! clamped at zero for [`BoundKind::Exact`] and left unclamped for
//! [`BoundKind::Weak`]. A user paired several times takes the minimum of its
//! per-pair bounds. Rates are in bits per MWRC phase.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClientGraph, SnrProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `max{0, bound}`.
    Exact,
    /// The bound itself, which goes negative at low SNR.
    Weak,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundKind::Exact => f.write_str("exact"),
            BoundKind::Weak => f.write_str("weak"),
        }
    }
}

impl FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(BoundKind::Exact),
            "weak" => Ok(BoundKind::Weak),
            other => Err(format!("unknown bound kind `{other}`, expected exact or weak")),
        }
    }
}

/// `x_i * (1 + 1 / (x_i + x_j))`, the argument of the logarithm in the pair
/// bound.
#[inline]
pub fn d_bound(x_i: f64, x_j: f64) -> f64 {
    x_i / (x_i + x_j) + x_i
}

#[inline]
pub(crate) fn pair_rate_unchecked(x_i: f64, x_j: f64, m: usize, kind: BoundKind) -> f64 {
    let r = d_bound(x_i, x_j).log2() / (2.0 * m as f64);
    match kind {
        BoundKind::Exact => r.max(0.0),
        BoundKind::Weak => r,
    }
}

/// Rate bound of user `i` when paired with user `j` in a schedule of `m`
/// uplink phases.
pub fn pair_rate_bound(x_i: f64, x_j: f64, m: usize, kind: BoundKind) -> Result<f64> {
    for (index, value) in [(1, x_i), (2, x_j)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveSnr { index, value });
        }
    }
    if m == 0 {
        return Err(Error::ZeroPhases);
    }
    Ok(pair_rate_unchecked(x_i, x_j, m, kind))
}

fn check_size(graph: &ClientGraph, profile: &SnrProfile) -> Result<()> {
    if graph.vertex_count() != profile.len() {
        return Err(Error::SizeMismatch {
            graph: graph.vertex_count(),
            profile: profile.len(),
        });
    }
    Ok(())
}

fn check_tree(graph: &ClientGraph) -> Result<()> {
    if !graph.is_feasible() {
        return Err(Error::Infeasible);
    }
    if !graph.is_tree() {
        return Err(Error::NotATree {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
        });
    }
    Ok(())
}

/// Highest-SNR neighbour of `i`, the one whose pair bound binds.
pub fn binding_neighbor(graph: &ClientGraph, i: usize, profile: &SnrProfile) -> Option<usize> {
    graph
        .neighbors(i)
        .iter()
        .copied()
        .reduce(|best, j| if profile.x(j) > profile.x(best) { j } else { best })
}

fn user_rate_unchecked(graph: &ClientGraph, i: usize, profile: &SnrProfile, kind: BoundKind, m: usize) -> Result<f64> {
    let x_i = profile.x(i);
    graph
        .neighbors(i)
        .iter()
        .map(|&j| pair_rate_unchecked(x_i, profile.x(j), m, kind))
        .reduce(f64::min)
        .ok_or(Error::IsolatedVertex(i))
}

/// Achievable rate bound of user `i` on a tree: the minimum of its pair bounds
/// over all neighbours, with `M = N - 1`.
pub fn user_rate(graph: &ClientGraph, i: usize, profile: &SnrProfile, kind: BoundKind) -> Result<f64> {
    check_size(graph, profile)?;
    if i == 0 || i > profile.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: profile.len(),
        });
    }
    user_rate_unchecked(graph, i, profile, kind, profile.len() - 1)
}

/// Per-user rates, common rate and sum rate of one ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Indexed by canonical user.
    pub per_user: Vec<f64>,
    pub common_rate: f64,
    pub sum_rate: f64,
    pub bound_kind: BoundKind,
    /// Phase count in the `1 / 2M` prefactor.
    pub m: usize,
}

/// Serialized form of a [`RateReport`], users in their input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReportDoc {
    pub per_user: Vec<f64>,
    pub common_rate: f64,
    pub sum_rate: f64,
    pub bound_kind: BoundKind,
}

impl RateReport {
    fn from_rates(per_user: Vec<f64>, bound_kind: BoundKind, m: usize) -> Self {
        let common_rate = per_user.iter().copied().fold(f64::INFINITY, f64::min);
        let sum_rate = per_user.iter().sum();
        Self {
            per_user,
            common_rate,
            sum_rate,
            bound_kind,
            m,
        }
    }

    /// Rate of the user given at input position `label`.
    pub fn labeled(&self, profile: &SnrProfile) -> RateReportDoc {
        let mut per_user = vec![0.0; self.per_user.len()];
        for (i, &r) in self.per_user.iter().enumerate() {
            per_user[profile.to_original(i + 1) - 1] = r;
        }
        RateReportDoc {
            per_user,
            common_rate: self.common_rate,
            sum_rate: self.sum_rate,
            bound_kind: self.bound_kind,
        }
    }
}

/// Rates of a tree ordering (`M = N - 1`).
pub fn evaluate(graph: &ClientGraph, profile: &SnrProfile, kind: BoundKind) -> Result<RateReport> {
    check_size(graph, profile)?;
    check_tree(graph)?;
    evaluate_unchecked(graph, profile, kind, profile.len() - 1)
}

/// Rates of any feasible ordering scheduled over `m` uplink phases.
///
/// Used for orderings with cycles or repeated pairs, where `m` exceeds
/// `N - 1`.
pub fn evaluate_with_phases(
    graph: &ClientGraph,
    profile: &SnrProfile,
    kind: BoundKind,
    m: usize,
) -> Result<RateReport> {
    check_size(graph, profile)?;
    if m == 0 {
        return Err(Error::ZeroPhases);
    }
    if !graph.is_feasible() {
        return Err(Error::Infeasible);
    }
    evaluate_unchecked(graph, profile, kind, m)
}

pub(crate) fn evaluate_unchecked(
    graph: &ClientGraph,
    profile: &SnrProfile,
    kind: BoundKind,
    m: usize,
) -> Result<RateReport> {
    let per_user = (1..=profile.len())
        .map(|i| user_rate_unchecked(graph, i, profile, kind, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport::from_rates(per_user, kind, m))
}

/// `d = 2^(2(n-1) rate)`, the exponentiated rate used in the sum-rate
/// argument.
pub fn d_value(rate: f64, n: usize) -> f64 {
    (2.0 * (n as f64 - 1.0) * rate).exp2()
}

/// `D_s`, the product of `d_value` over all users under the weak bound.
pub fn ds_product(graph: &ClientGraph, profile: &SnrProfile) -> Result<f64> {
    let report = evaluate(graph, profile, BoundKind::Weak)?;
    let n = profile.len();
    Ok(report.per_user.iter().map(|&r| d_value(r, n)).product())
}
