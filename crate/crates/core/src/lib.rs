//! Simulation and exact computation for general erased-word processes.
//!
//! A word process `(W_n, η_n)` shrinks by erasing the letter at a uniformly chosen,
//! past-independent slot. Ergodic processes are indexed by measures ρ on
//! `A × [0, 1]` with uniform position marginal; this crate simulates them, computes
//! their finite-dimensional laws exactly where feasible, and checks the limit theory
//! numerically.

pub mod error;
mod fenwick;
pub mod filtration;
pub mod kernels;
pub mod measures;
pub mod order;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod word;

pub use error::{Error, Result};
pub use kernels::{
    chapman_kolmogorov_check, count_embeddings, density, erase_chain, rss_exact, rss_sample,
    tv_words, WordDistribution,
};
pub use measures::{FiniteMeasure2D, PointSet2D, RhoKind, RhoSpec};
pub use order::{EraserPrefix, LinearOrderPrefix, OrderQuadruple, SPrefix, UPrefix};
pub use sim::{simulate_gewp, GewpTrajectory};
pub use filtration::{DualInnovations, FcRepresentation};
pub use word::{erase, ios, os, ps, Alphabet, Letter, Permutation, Word};
