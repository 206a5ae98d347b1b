//! Exponential-family random graph models (ERGMs) for undirected binary
//! networks: model specification with curved (geometrically weighted)
//! parameterizations, exact enumeration on small graphs, Markov-chain
//! simulation, likelihood-based estimation from complete and incomplete
//! observations, and goodness-of-fit / degeneracy diagnostics.
//!
//! The crate is organized along the pipeline:
//!
//! * [`graph`] — undirected binary graphs with incremental bookkeeping;
//! * [`terms`] — sufficient statistics and single-dyad change statistics;
//! * [`model`] — the map from curved parameters θ to natural parameters η,
//!   its Jacobian, offsets, and unnormalized log-densities;
//! * [`exact`] — brute-force enumeration for small node counts: exact
//!   normalizers, moments, maximum likelihood, and marginal likelihoods
//!   under partial observation;
//! * [`sampler`] — Metropolis-Hastings simulation, unconditional and
//!   conditional on observed dyads;
//! * [`estimate`] — maximum pseudo-likelihood, Monte Carlo maximum
//!   likelihood, stochastic approximation, pooled fits, standard errors;
//! * [`missing`] — observation-design simulators (ego, link-tracing,
//!   subgraph, missing-at-random) and incomplete-data maximum likelihood;
//! * [`gof`] — goodness-of-fit simulation and degeneracy scans;
//! * [`formats`] — text formats for graphs, masks, attributes, model
//!   configurations, and fit reports.

pub mod error;
pub mod estimate;
pub mod exact;
pub mod formats;
pub mod gof;
pub mod graph;
pub mod missing;
pub mod model;
pub mod sampler;
pub mod terms;

mod util;

pub use error::{Error, Result};
