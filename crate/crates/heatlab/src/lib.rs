//! Numerical laboratory for growth classes of nonnegative solutions of the
//! heat equation on R^n.
//!
//! The crate is organized around a handful of cooperating modules:
//!
//! * [`logscalar`] — exact-sign log-domain scalars; every quantity that can
//!   reach `exp(±10^3)` scales is carried as a sign plus a natural-log
//!   magnitude instead of a raw `f64`.
//! * [`growth`] — growth-function families `L(r)` and curvature families
//!   `k(r)`, with analytic and numeric classification of the divergence
//!   integrals `∫ r/L(r) dr` and `∫ dr/k(r)`.
//! * [`schedule`] — the backward-in-time vanishing schedule: exponential
//!   radius doubling, greedy time steps `R²/(16 L(2R))`, telescoped bound
//!   terms, and the small-time vanishing probe.
//! * [`kernel`] — heat-kernel evolution of radial-plus-spike initial data by
//!   direct quadrature, plus a radial finite-difference oracle.
//! * [`estimator`] — weighted space-time L² integrals over balls and the
//!   growth-class membership checks built on them.
//! * [`spikes`] — the concentric spike construction that escapes every
//!   quadratic growth class while staying under the L¹ dispersion envelope.
//!
//! Supporting modules: [`special`] (incomplete gamma, erf), [`quad`]
//! (adaptive Gauss–Legendre panels in real and log domain), [`config`]
//! (plain-text key/value run configuration), and [`report`] (deterministic
//! JSON/CSV emission).

pub mod config;
pub mod estimator;
pub mod fdm;
pub mod growth;
pub mod kernel;
pub mod logscalar;
pub mod quad;
pub mod report;
pub mod schedule;
pub mod special;
pub mod spikes;

pub use logscalar::{LogScalar, Sign};
