//! Achievable rates of pairwise functional-decode-forward (FDF) multiway relay
//! channels.
//!
//! `N` users exchange their messages through a relay, one user pair per uplink
//! phase. The sequence of pairs is an [`Ordering`]; its [`ClientGraph`] has one
//! vertex per user and one edge per scheduled pair. Minimal feasible orderings
//! are exactly the spanning trees of the complete graph, and the rate each user
//! can sustain depends on which partners it is scheduled with.
//!
//! The crate is organised as:
//!
//! - [`model`]: SNR profiles, orderings, client graphs, feasibility.
//! - [`rate`]: per-pair FDF rate bounds, common and sum rate of a tree.
//! - [`optimal`]: the chain (max common rate) and star (max sum rate)
//!   orderings, their closed forms, the V-transform and the high-SNR gap bounds.
//! - [`prufer`]: Prüfer codes, exhaustive tree enumeration, brute-force
//!   optimisation and uniform tree sampling.
//! - [`sim`]: Rayleigh-fading Monte Carlo comparison of optimal vs. random
//!   orderings.
//! - [`verify`]: property suites that re-check the optimality results against
//!   the brute-force oracle.
//!
//! User indices are 1-based everywhere in the public API and refer to the
//! canonical (SNR-sorted) order unless stated otherwise.

pub mod error;
pub mod model;
pub mod optimal;
pub mod prufer;
pub mod rate;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use model::{canonicalize, ClientGraph, Ordering, OrderingDoc, SnrProfile};
pub use optimal::{GapBounds, Objective, Optimum};
pub use prufer::{BruteForceResult, PruferCode};
pub use rate::{BoundKind, RateReport};
pub use sim::{ChannelConfig, GapStats};

/// Relative tolerance used when comparing rates of different orderings.
pub const REL_TOL: f64 = 1e-12;

/// `true` when `a` and `b` agree to within [`REL_TOL`] relative.
pub fn rates_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}
