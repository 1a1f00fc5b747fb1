//! Planted subgraph detection in `G(n, p)` through signed subgraph counts.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph_core`]: graphs, shapes, canonical forms, labelled copy counts and
//!   intersecting patterns. All counts are exact big integers.
//! * [`models`]: the null distribution `G(n, p)` and the planted distribution
//!   (a `G(n, p)` sample united with a uniformly random labelled copy of `H`).
//! * [`statistics`]: Walsh-Fourier characters, signed shape counts and the two
//!   counterexample statistics (unsigned clique counts, closed-path traces).
//! * [`advantage`]: closed-form advantages, the degree-profile star criterion,
//!   regime classification and exhaustive small-`n` oracles.
//! * [`montecarlo`]: deterministic, seed-addressed empirical verification.
//! * [`report`]: the stable structured text format shared by all reports.

pub mod advantage;
pub mod error;
pub mod graph_core;
pub mod models;
pub mod montecarlo;
pub mod report;
pub mod statistics;
mod work;

pub use error::{Error, Result};
pub use work::{parse_count, WorkLimit, DEFAULT_WORK_LIMIT, WORK_LIMIT_ENV};
