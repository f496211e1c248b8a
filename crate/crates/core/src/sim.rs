//! Monte Carlo comparison of optimal and random orderings under Rayleigh
//! fading.
//!
//! Each trial draws a complex channel gain `g = a + ib` per user with `a, b`
//! zero-mean Gaussian of variance `fading_variance`, sets
//! `x_i = P_i |g|^2 / sigma^2`, and evaluates the chain, the star and one
//! uniformly random tree under the exact bound. The sweep variable is
//! `10 log10(1 / sigma^2)`.
//!
//! Every trial owns a ChaCha stream keyed by `(seed, sweep index, trial
//! index)`, and trial results are reduced in fixed-size blocks in index
//! order, so output is bit-identical for any thread count.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_client_graph, canonicalize, ClientGraph, SnrProfile};
use crate::optimal::{chain_ordering, star_ordering, weak_bound_equivalent};
use crate::prufer::sample_uniform_tree;
use crate::rate::{evaluate_unchecked, BoundKind};

const BLOCK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_users: usize,
    /// `P_i` per user.
    pub transmit_power: Vec<f64>,
    /// Variance of each of the real and imaginary channel components.
    pub fading_variance: f64,
    /// Values of `1 / sigma^2` in dB.
    pub snr_sweep_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl ChannelConfig {
    /// Unit power, component variance 1/2, 10^5 trials.
    pub fn new(n_users: usize, snr_sweep_db: Vec<f64>, seed: u64) -> Self {
        Self {
            n_users,
            transmit_power: vec![1.0; n_users],
            fading_variance: 0.5,
            snr_sweep_db,
            trials: 100_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users < 2 {
            return Err(Error::TooFewUsers(self.n_users));
        }
        if self.transmit_power.len() != self.n_users {
            return Err(Error::InvalidConfig(format!(
                "{} transmit powers for {} users",
                self.transmit_power.len(),
                self.n_users
            )));
        }
        if let Some(p) = self.transmit_power.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidConfig(format!("transmit power {p} is not positive")));
        }
        if !(self.fading_variance > 0.0 && self.fading_variance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fading variance {} is not positive",
                self.fading_variance
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.trials >= 1 << 40 {
            return Err(Error::InvalidConfig("trials must be below 2^40".into()));
        }
        if self.snr_sweep_db.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidConfig("sweep values must be finite".into()));
        }
        Ok(())
    }
}

/// `sigma^2` for a sweep point given as `10 log10(1 / sigma^2)`.
pub fn noise_power(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Draws one fading realisation and returns the canonical SNR profile.
pub fn sample_snr_profile(config: &ChannelConfig, sigma2: f64, rng: &mut ChaCha8Rng) -> Result<SnrProfile> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise power {sigma2} is not positive")));
    }
    let normal = Normal::new(0.0, config.fading_variance.sqrt()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let raw: Vec<f64> = config
        .transmit_power
        .iter()
        .map(|&p| {
            let a = normal.sample(rng);
            let b = normal.sample(rng);
            p * (a * a + b * b) / sigma2
        })
        .collect();
    canonicalize(&raw)
}

/// RNG for one trial.
pub fn trial_rng(seed: u64, sweep_index: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((sweep_index as u64) << 40) | trial);
    rng
}

/// Rates seen in one Monte Carlo trial, exact bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub profile: SnrProfile,
    pub random_tree: ClientGraph,
    pub cr_opt: f64,
    pub cr_rand: f64,
    pub sr_opt: f64,
    pub sr_rand: f64,
}

impl TrialOutcome {
    pub fn in_weak_regime(&self) -> bool {
        weak_bound_equivalent(&self.profile)
    }
}

/// The fixed chain and star trees for `n` users.
#[derive(Debug, Clone)]
pub struct OptimalTrees {
    pub chain: ClientGraph,
    pub star: ClientGraph,
}

impl OptimalTrees {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            chain: build_client_graph(&chain_ordering(n)?, n)?,
            star: build_client_graph(&star_ordering(n)?, n)?,
        })
    }
}

/// Runs trial `trial` of sweep point `sweep_index`.
pub fn run_trial(config: &ChannelConfig, trees: &OptimalTrees, sweep_index: usize, trial: u64) -> Result<TrialOutcome> {
    let mut rng = trial_rng(config.seed, sweep_index, trial);
    let sigma2 = noise_power(config.snr_sweep_db[sweep_index]);
    let profile = sample_snr_profile(config, sigma2, &mut rng)?;
    let random_tree = sample_uniform_tree(config.n_users, &mut rng)?;
    let m = config.n_users - 1;
    let exact = |g: &ClientGraph| evaluate_unchecked(g, &profile, BoundKind::Exact, m);
    let chain = exact(&trees.chain)?;
    let star = exact(&trees.star)?;
    let random = exact(&random_tree)?;
    Ok(TrialOutcome {
        cr_opt: chain.common_rate,
        cr_rand: random.common_rate,
        sr_opt: star.sum_rate,
        sr_rand: random.sum_rate,
        profile,
        random_tree,
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockSums {
    cr_opt: Compensated,
    cr_rand: Compensated,
    sr_opt: Compensated,
    sr_rand: Compensated,
    out_of_regime: u64,
    dominance_violations: u64,
}

impl BlockSums {
    fn push(&mut self, t: &TrialOutcome) {
        self.cr_opt.add(t.cr_opt);
        self.cr_rand.add(t.cr_rand);
        self.sr_opt.add(t.sr_opt);
        self.sr_rand.add(t.sr_rand);
        if t.in_weak_regime() {
            let worse = |opt: f64, rand: f64| opt < rand && !crate::rates_agree(opt, rand);
            if worse(t.cr_opt, t.cr_rand) || worse(t.sr_opt, t.sr_rand) {
                self.dominance_violations += 1;
            }
        } else {
            self.out_of_regime += 1;
        }
    }

    fn merge(&mut self, other: &BlockSums) {
        self.cr_opt.add(other.cr_opt.value());
        self.cr_rand.add(other.cr_rand.value());
        self.sr_opt.add(other.sr_opt.value());
        self.sr_rand.add(other.sr_rand.value());
        self.out_of_regime += other.out_of_regime;
        self.dominance_violations += other.dominance_violations;
    }
}

/// Averages for one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub snr_db: f64,
    pub n: usize,
    pub trials: u64,
    pub mean_cr_opt: f64,
    pub mean_cr_rand: f64,
    pub mean_sr_opt: f64,
    pub mean_sr_rand: f64,
    /// `(mean_cr_opt - mean_cr_rand) / mean_cr_opt`.
    pub g_c: f64,
    /// `(mean_sr_opt - mean_sr_rand) / mean_sr_opt`.
    pub g_s: f64,
    /// Trials whose profile lies outside the weak-bound regime.
    pub out_of_regime: u64,
    /// In-regime trials where an optimal ordering lost to the random tree.
    pub dominance_violations: u64,
}

fn relative_gap(opt: f64, rand: f64) -> f64 {
    if opt > 0.0 {
        (opt - rand) / opt
    } else {
        0.0
    }
}

fn run_point(config: &ChannelConfig, trees: &OptimalTrees, sweep_index: usize) -> Result<GapStats> {
    let blocks = config.trials.div_ceil(BLOCK);
    let partials = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut sums = BlockSums::default();
            for trial in b * BLOCK..((b + 1) * BLOCK).min(config.trials) {
                sums.push(&run_trial(config, trees, sweep_index, trial)?);
            }
            Ok(sums)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = BlockSums::default();
    for p in &partials {
        total.merge(p);
    }
    let t = config.trials as f64;
    let mean_cr_opt = total.cr_opt.value() / t;
    let mean_cr_rand = total.cr_rand.value() / t;
    let mean_sr_opt = total.sr_opt.value() / t;
    let mean_sr_rand = total.sr_rand.value() / t;
    Ok(GapStats {
        snr_db: config.snr_sweep_db[sweep_index],
        n: config.n_users,
        trials: config.trials,
        mean_cr_opt,
        mean_cr_rand,
        mean_sr_opt,
        mean_sr_rand,
        g_c: relative_gap(mean_cr_opt, mean_cr_rand),
        g_s: relative_gap(mean_sr_opt, mean_sr_rand),
        out_of_regime: total.out_of_regime,
        dominance_violations: total.dominance_violations,
    })
}

/// One [`GapStats`] per sweep point, in sweep order.
pub fn run_gap_experiment(config: &ChannelConfig) -> Result<Vec<GapStats>> {
    config.validate()?;
    let trees = OptimalTrees::new(config.n_users)?;
    (0..config.snr_sweep_db.len())
        .map(|k| run_point(config, &trees, k))
        .collect()
}

pub const CSV_HEADER: &str = "snr_db,n,trials,mean_cr_opt,mean_cr_rand,mean_sr_opt,mean_sr_rand,g_c,g_s";

/// Formats like C's `%.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV table of a sweep, LF line endings, 12 significant digits.
pub fn to_csv(stats: &[GapStats]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in stats {
        let f = |x: f64| format_significant(x, 12);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            f(s.snr_db),
            s.n,
            s.trials,
            f(s.mean_cr_opt),
            f(s.mean_cr_rand),
            f(s.mean_sr_opt),
            f(s.mean_sr_rand),
            f(s.g_c),
            f(s.g_s)
        )
        .expect("writing to a String cannot fail");
    }
    out
}
