//! Property suites that re-derive the optimality results from scratch.
//!
//! Each check returns a [`CheckResult`] counting cases examined and
//! violations found. [`run_all`] bundles them for one range of user counts.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::model::{canonicalize, ClientGraph, SnrProfile};
use crate::optimal::{
    gap_bounds, max_sum_rate_closed_form, sum_clamp_active, swap_leaf_partners, v_transform, weak_bound_equivalent,
    Objective,
};
use crate::prufer::{brute_force_best, sample_uniform_tree, DEFAULT_ENUMERATION_CAP};
use crate::rate::{ds_product, evaluate, BoundKind};
use crate::rates_agree;
use crate::sim::{run_trial, ChannelConfig, OptimalTrees};

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub n: usize,
    pub checked: u64,
    pub violations: u64,
}

impl CheckResult {
    fn new(name: &str, n: usize) -> Self {
        Self {
            name: name.to_string(),
            n,
            checked: 0,
            violations: 0,
        }
    }

    fn record(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} n={:<2} checked={:<8} violations={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.n,
            self.checked,
            self.violations
        )
    }
}

/// All checks of one verification run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

/// Profile with SNRs uniform in `[lo, hi]`.
pub fn uniform_profile<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> SnrProfile {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    canonicalize(&raw).expect("positive SNRs")
}

/// Profile with SNRs log-uniform in `[lo, hi]`, reaching deep into the
/// clamped regime.
pub fn log_uniform_profile<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> SnrProfile {
    let (a, b) = (lo.ln(), hi.ln());
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(a..=b).exp()).collect();
    canonicalize(&raw).expect("positive SNRs")
}

/// Calls `f` on every `k`-subset of `0..m`, in lexicographic order.
fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < m - k + p) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect()
}

/// With `N - 1` edges, feasible (connected) iff tree, over every edge subset.
pub fn check_tree_equivalence(n: usize) -> CheckResult {
    let mut res = CheckResult::new("feasible_iff_tree", n);
    let pairs = all_pairs(n);
    for_each_subset(pairs.len(), n - 1, |subset| {
        let g = ClientGraph::from_edges(n, subset.iter().map(|&i| pairs[i])).expect("valid pairs");
        res.record(g.is_feasible() == g.is_tree());
    });
    res
}

/// Edges lying on some cycle, found from DFS back edges and their tree paths.
pub fn cycle_edges(graph: &ClientGraph) -> Vec<(usize, usize)> {
    let n = graph.vertex_count();
    let mut parent = vec![0usize; n + 1];
    let mut depth = vec![usize::MAX; n + 1];
    let mut on_cycle = std::collections::BTreeSet::new();
    for root in 1..=n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in graph.neighbors(v) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
    }
    for &(a, b) in graph.edges() {
        if parent[a] == b || parent[b] == a {
            continue;
        }
        // non-tree edge closes a cycle through the BFS/DFS forest
        on_cycle.insert((a, b));
        let (mut u, mut v) = (a, b);
        while u != v {
            if depth[u] < depth[v] {
                std::mem::swap(&mut u, &mut v);
            }
            let p = parent[u];
            on_cycle.insert((u.min(p), u.max(p)));
            u = p;
        }
    }
    on_cycle.into_iter().collect()
}

/// Random connected graph: a uniform tree plus `extra` random chords.
pub fn random_connected_graph<R: Rng>(n: usize, extra: usize, rng: &mut R) -> ClientGraph {
    let tree = sample_uniform_tree(n, rng).expect("n >= 2");
    let mut edges = tree.edges().to_vec();
    for _ in 0..extra {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        if a != b {
            edges.push((a, b));
        }
    }
    ClientGraph::from_edges(n, edges).expect("valid edges")
}

/// Dropping any edge of a cycle keeps a feasible graph feasible.
pub fn check_cycle_edge_removal<R: Rng>(n: usize, graphs: usize, rng: &mut R) -> CheckResult {
    let mut res = CheckResult::new("cycle_edge_redundant", n);
    for _ in 0..graphs {
        let extra = rng.random_range(1..=n);
        let g = random_connected_graph(n, extra, rng);
        for (a, b) in cycle_edges(&g) {
            let h = g.without_edge(a, b).expect("edge present");
            res.record(g.is_feasible() && h.is_feasible());
        }
    }
    res
}

/// Chain common rate equals the brute-force maximum and the chain is
/// co-optimal (weak bound, SNRs in `[1, 100]`).
pub fn check_common_optimality<R: Rng>(n: usize, profiles: usize, rng: &mut R) -> Result<CheckResult> {
    let mut res = CheckResult::new("chain_max_common_rate", n);
    let trees = OptimalTrees::new(n)?;
    for _ in 0..profiles {
        let p = uniform_profile(n, 1.0, 100.0, rng);
        let chain = evaluate(&trees.chain, &p, BoundKind::Weak)?.common_rate;
        let best = brute_force_best(&p, Objective::Common, BoundKind::Weak, DEFAULT_ENUMERATION_CAP)?;
        res.record(rates_agree(chain, best.best_value) && best.contains(&trees.chain));
    }
    Ok(res)
}

/// Star sum rate equals the brute-force maximum (weak bound, SNRs in
/// `[1, 100]`), and the closed form is bit-identical to the evaluated star
/// when no clamp is active.
pub fn check_sum_optimality<R: Rng>(n: usize, profiles: usize, rng: &mut R) -> Result<CheckResult> {
    let mut res = CheckResult::new("star_max_sum_rate", n);
    let trees = OptimalTrees::new(n)?;
    for _ in 0..profiles {
        let p = uniform_profile(n, 1.0, 100.0, rng);
        let star = evaluate(&trees.star, &p, BoundKind::Weak)?.sum_rate;
        let best = brute_force_best(&p, Objective::Sum, BoundKind::Weak, DEFAULT_ENUMERATION_CAP)?;
        let closed_ok = sum_clamp_active(&p) || max_sum_rate_closed_form(&p) == star;
        res.record(rates_agree(star, best.best_value) && best.contains(&trees.star) && closed_ok);
    }
    Ok(res)
}

/// The clamped sum-rate closed form equals the brute-force maximum under the
/// exact bound, over SNRs log-uniform in `[0.01, 100]`.
///
/// `closed_form` is injectable so a deliberately broken formula can be shown
/// to fail.
pub fn check_sum_closed_form_with<R: Rng>(
    n: usize,
    profiles: usize,
    rng: &mut R,
    closed_form: impl Fn(&SnrProfile) -> f64,
) -> Result<CheckResult> {
    let mut res = CheckResult::new("sum_closed_form_exact", n);
    for _ in 0..profiles {
        let p = log_uniform_profile(n, 0.01, 100.0, rng);
        let best = brute_force_best(&p, Objective::Sum, BoundKind::Exact, DEFAULT_ENUMERATION_CAP)?;
        res.record(rates_agree(closed_form(&p), best.best_value));
    }
    Ok(res)
}

pub fn check_sum_closed_form<R: Rng>(n: usize, profiles: usize, rng: &mut R) -> Result<CheckResult> {
    check_sum_closed_form_with(n, profiles, rng, max_sum_rate_closed_form)
}

/// Moving the weakest neighbour of `v_N` onto another neighbour never lowers
/// `D_s` (SNRs in `[1, 100]`).
pub fn check_v_transform_lemma<R: Rng>(n: usize, trials: usize, rng: &mut R) -> Result<CheckResult> {
    let mut res = CheckResult::new("v_transform_raises_ds", n);
    let mut attempts = 0;
    while (res.checked as usize) < trials && attempts < 50 * trials {
        attempts += 1;
        let tree = sample_uniform_tree(n, rng)?;
        if tree.degree(n) < 2 {
            continue;
        }
        let p = uniform_profile(n, 1.0, 100.0, rng);
        let nb = tree.neighbors(n);
        let weakest = *nb
            .iter()
            .min_by(|a, b| p.x(**a).total_cmp(&p.x(**b)))
            .expect("degree >= 2");
        let before = ds_product(&tree, &p)?;
        for &other in nb.iter().filter(|&&v| v != weakest) {
            let moved = v_transform(&tree, n, other, weakest)?;
            let after = ds_product(&moved, &p)?;
            res.record(moved.is_tree() && after >= before * (1.0 - crate::REL_TOL));
        }
    }
    Ok(res)
}

/// Random tree in which `v_N` and `v_{N-1}` are leaves.
fn tree_with_top_leaves<R: Rng>(n: usize, rng: &mut R) -> Result<ClientGraph> {
    let core = n - 2;
    let mut edges: Vec<(usize, usize)> = if core >= 2 {
        sample_uniform_tree(core, rng)?.edges().to_vec()
    } else {
        Vec::new()
    };
    edges.push((n, rng.random_range(1..=core)));
    edges.push((n - 1, rng.random_range(1..=core)));
    ClientGraph::from_edges(n, edges)
}

/// With `v_N` and `v_{N-1}` leaves on partners `v_i` and `v_j`, swapping the
/// partners does not raise `D_s` iff `x_i >= x_j`.
pub fn check_leaf_swap_lemma<R: Rng>(n: usize, trials: usize, rng: &mut R) -> Result<CheckResult> {
    let mut res = CheckResult::new("leaf_swap_iff", n);
    if n < 3 {
        return Ok(res);
    }
    for _ in 0..trials {
        let tree = tree_with_top_leaves(n, rng)?;
        let p = uniform_profile(n, 1.0, 100.0, rng);
        let i = tree.neighbors(n)[0];
        let j = tree.neighbors(n - 1)[0];
        let swapped = swap_leaf_partners(&tree, n, n - 1)?;
        let before = ds_product(&tree, &p)?;
        let after = ds_product(&swapped, &p)?;
        let ok = if p.x(i) >= p.x(j) {
            after <= before * (1.0 + crate::REL_TOL)
        } else {
            after >= before * (1.0 - crate::REL_TOL)
        };
        res.record(swapped.is_tree() && ok);
    }
    Ok(res)
}

/// Per-trial common and sum rate gaps of a random tree stay within
/// [`gap_bounds`], for faded profiles inside the weak-bound regime.
pub fn check_gap_bounds(n: usize, trials: usize, seed: u64) -> Result<CheckResult> {
    let mut res = CheckResult::new("gap_within_bounds", n);
    let sweep: Vec<f64> = (0..=15).map(f64::from).collect();
    let config = ChannelConfig {
        trials: trials as u64,
        ..ChannelConfig::new(n, sweep.clone(), seed)
    };
    let trees = OptimalTrees::new(n)?;
    let mut trial = 0u64;
    while (res.checked as usize) < trials && trial < 100 * trials as u64 {
        let t = run_trial(&config, &trees, (trial % sweep.len() as u64) as usize, trial)?;
        trial += 1;
        if !t.in_weak_regime() {
            continue;
        }
        let bounds = gap_bounds(&t.profile);
        let slack = |b: f64| b + crate::REL_TOL * b.abs().max(1.0);
        let common_ok = t.cr_opt - t.cr_rand <= slack(bounds.common_gap_bound);
        let sum_ok = t.sr_opt - t.sr_rand <= slack(bounds.sum_gap_bound);
        res.record(common_ok && sum_ok);
    }
    Ok(res)
}

/// Observed gaps of `trees` random trees at equal SNR `x`.
pub fn equal_snr_gaps<R: Rng>(n: usize, x: f64, trees: usize, rng: &mut R) -> Result<(f64, f64)> {
    let p = canonicalize(&vec![x; n])?;
    let opt = OptimalTrees::new(n)?;
    let cr_opt = evaluate(&opt.chain, &p, BoundKind::Exact)?.common_rate;
    let sr_opt = evaluate(&opt.star, &p, BoundKind::Exact)?.sum_rate;
    let (mut common, mut sum) = (0.0f64, 0.0f64);
    for _ in 0..trees {
        let r = evaluate(&sample_uniform_tree(n, rng)?, &p, BoundKind::Exact)?;
        common = common.max(cr_opt - r.common_rate);
        sum = sum.max(sr_opt - r.sum_rate);
    }
    Ok((common, sum))
}

/// Both gaps at `x = 10^6` with all users equal stay below `1e-4`.
pub fn check_high_snr_vanishing<R: Rng>(n: usize, trees: usize, rng: &mut R) -> Result<CheckResult> {
    let mut res = CheckResult::new("high_snr_gap_vanishes", n);
    let (common, sum) = equal_snr_gaps(n, 1e6, trees, rng)?;
    res.record(weak_bound_equivalent(&canonicalize(&vec![1e6; n])?) && common <= 1e-4 && sum <= 1e-4);
    Ok(res)
}

/// Runs every suite for each `n` in `ns`.
pub fn run_all(ns: impl IntoIterator<Item = usize>, profiles: usize, seed: u64) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for n in ns {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        let checks = &mut report.checks;
        if n <= 7 {
            checks.push(check_tree_equivalence(n));
        }
        checks.push(check_cycle_edge_removal(n, profiles, &mut rng));
        checks.push(check_common_optimality(n, profiles, &mut rng)?);
        checks.push(check_sum_optimality(n, profiles, &mut rng)?);
        checks.push(check_sum_closed_form(n, profiles, &mut rng)?);
        checks.push(check_v_transform_lemma(n, profiles, &mut rng)?);
        checks.push(check_leaf_swap_lemma(n, profiles, &mut rng)?);
        checks.push(check_gap_bounds(n, profiles, seed)?);
        checks.push(check_high_snr_vanishing(n, profiles, &mut rng)?);
    }
    Ok(report)
}
