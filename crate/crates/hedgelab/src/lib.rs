//! Monte-Carlo laboratory for discrete option hedging under proportional
//! transaction costs in stochastic-volatility markets.
//!
//! The library is organized around the lifecycle of a hedging experiment:
//!
//! * [`schedule`] — revision grids and deterministic enlarged-volatility
//!   profiles, parameterized by the cumulated variance `lambda`;
//! * [`analytics`] — the pricing kernel (price, delta, gamma and the delta
//!   time derivative) in the `lambda` variable;
//! * [`models`] — a catalog of stochastic-volatility markets and reproducible
//!   correlated path simulation;
//! * [`hedging`] — the plain and drift-corrected discrete strategies, cost
//!   regimes and exact wealth accounting;
//! * [`limits`] — closed-form and quadrature evaluation of the limiting cost
//!   functionals that center the replication error;
//! * [`quantile`] — shortfall-constrained pricing from terminal samples;
//! * [`experiments`] — the Monte-Carlo harness that reproduces the reference
//!   tables, fits convergence rates and checks super-hedging.

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod hedging;
pub mod limits;
pub mod models;
pub mod quantile;
pub mod schedule;

pub use error::{Error, Result};
