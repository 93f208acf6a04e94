//! Persistent homology of Čech / Alpha / Vietoris-Rips filtrations over Poisson
//! point clouds, with the machinery needed to study cycles of near-maximal
//! lifetime: smallest-enclosing-ball geometry, Z/2 boundary reduction, cluster
//! detection, Monte Carlo threshold curves (`v`, `g`, `h`) with analytic
//! cross-checks, extremal-point extraction, and the simulation experiments
//! (annealed optimal configurations, Weibull tail slopes, deathtime
//! correlations, Poisson-limit diagnostics).
//!
//! Organization mirrors the pipeline:
//!
//! * [`geometry`] — metrics (Euclidean / flat torus), enclosing balls, circumspheres
//! * [`filtration`] — Čech, Vietoris-Rips, Delaunay and Alpha complexes
//! * [`persistence`] — boundary reduction, feature records, associated loops
//! * [`pointprocess`] — Poisson samplers and r-level clustering
//! * [`regime`] — maximal lifetimes, threshold curves and their inversion,
//!   extremal extraction
//! * [`experiments`] — reproducible simulation studies and statistical checks
//!
//! Everything downstream of a seed is deterministic, including under `rayon`
//! parallelism: per-sample RNG streams are derived from (master seed, index),
//! never from worker identity.

pub mod error;
pub mod experiments;
pub mod filtration;
pub mod geometry;
pub mod persistence;
pub mod pointprocess;
pub mod regime;
pub mod rng;
pub mod stats;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
