//! Stochastic-volatility market models and correlated path simulation.
//!
//! The risky asset follows `dS = sigma(y) S dW^1` with the volatility factor
//! `dy = F1(t,y) dt + F2(t,y) (r dW^1 + sqrt(1-r^2) dW^2)`. Paths are sampled
//! on the fine grid of a [`RevisionSchedule`]: the log-price step is exact for
//! the volatility frozen over a substep, the factor uses an Euler step
//! (truncated at zero for the square-root diffusion), so prices stay positive
//! by construction.

use crate::error::{Error, Result};
use crate::schedule::RevisionSchedule;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Volatility-factor dynamics catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    /// Degenerate entry with a frozen factor: `sigma(y) = sigma0`.
    ConstantVol { sigma0: f64 },
    /// `sigma(y) = y + sigma_min`, `dy = y (a dt + b dZ)`.
    HullWhite { sigma_min: f64, a: f64, b: f64 },
    /// `sigma(y) = y^2 + sigma_min`, `dy = (a - b y) dt + dZ`.
    UniformElliptic { sigma_min: f64, a: f64, b: f64 },
    /// `sigma(y) = sqrt(y^2 + sigma_min)`, `dy = (a - b y) dt + dZ`.
    SteinStein { sigma_min: f64, a: f64, b: f64 },
    /// `sigma(y) = sqrt(y + sigma_min)`, `dy = (a - b y) dt + sqrt(y) dZ`.
    Heston { sigma_min: f64, a: f64, b: f64 },
    /// `sigma(y) = exp(delta y) + sigma_min`, `dy = (a - b y) dt + dZ`.
    Scott { sigma_min: f64, delta: f64, a: f64, b: f64 },
    /// `sigma(y) = sin^2(y) + sigma_min`, `dy = y (a dt + b dZ)`.
    SineSquared { sigma_min: f64, a: f64, b: f64 },
    /// Frozen-coefficient diagnostic model: constant volatility `sigma0` with
    /// factor drift and diffusion held at fixed values.
    Custom { sigma0: f64, drift: f64, diffusion: f64 },
}

/// A market: factor dynamics plus correlation and initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketModel {
    pub kind: ModelKind,
    /// Correlation between the price and factor drivers, in `[-1, 1]`.
    pub corr: f64,
    pub s0: f64,
    pub y0: f64,
}

impl MarketModel {
    /// Validates parameters against each model's domain.
    pub fn new(kind: ModelKind, corr: f64, s0: f64, y0: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&corr) {
            return Err(Error::ParameterDomain(format!(
                "correlation must lie in [-1, 1], got {corr}"
            )));
        }
        if !(s0 > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "initial price must be positive, got {s0}"
            )));
        }
        match kind {
            ModelKind::ConstantVol { sigma0 } | ModelKind::Custom { sigma0, .. } => {
                if !(sigma0 > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "sigma0 must be positive, got {sigma0}"
                    )));
                }
            }
            ModelKind::HullWhite { sigma_min, .. } | ModelKind::SineSquared { sigma_min, .. } => {
                if !(sigma_min > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "sigma_min must be positive, got {sigma_min}"
                    )));
                }
            }
            ModelKind::UniformElliptic { sigma_min, b, .. }
            | ModelKind::SteinStein { sigma_min, b, .. } => {
                if !(sigma_min > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "sigma_min must be positive, got {sigma_min}"
                    )));
                }
                if !(b > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "mean-reversion rate b must be positive, got {b}"
                    )));
                }
            }
            ModelKind::Heston { sigma_min, a, b } => {
                if !(sigma_min > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "sigma_min must be positive, got {sigma_min}"
                    )));
                }
                if !(b > 0.0) || !(a >= 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "square-root factor requires a >= 0 and b > 0, got a={a}, b={b}"
                    )));
                }
                if !(y0 >= 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "square-root factor requires y0 >= 0, got {y0}"
                    )));
                }
            }
            ModelKind::Scott {
                sigma_min,
                delta,
                b,
                ..
            } => {
                if !(sigma_min > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "sigma_min must be positive, got {sigma_min}"
                    )));
                }
                if !(delta >= 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "exponent delta must be non-negative, got {delta}"
                    )));
                }
                if !(b > 0.0) {
                    return Err(Error::ParameterDomain(format!(
                        "mean-reversion rate b must be positive, got {b}"
                    )));
                }
            }
        }
        Ok(Self { kind, corr, s0, y0 })
    }

    /// Volatility map `y -> sigma(y)`.
    #[inline]
    pub fn sigma(&self, y: f64) -> f64 {
        match self.kind {
            ModelKind::ConstantVol { sigma0 } | ModelKind::Custom { sigma0, .. } => sigma0,
            ModelKind::HullWhite { sigma_min, .. } => y + sigma_min,
            ModelKind::UniformElliptic { sigma_min, .. } => y * y + sigma_min,
            ModelKind::SteinStein { sigma_min, .. } => (y * y + sigma_min).sqrt(),
            ModelKind::Heston { sigma_min, .. } => (y + sigma_min).sqrt(),
            ModelKind::Scott {
                sigma_min, delta, ..
            } => (delta * y).exp() + sigma_min,
            ModelKind::SineSquared { sigma_min, .. } => y.sin().powi(2) + sigma_min,
        }
    }

    /// Factor drift `F1(t, y)`.
    #[inline]
    pub fn factor_drift(&self, _t: f64, y: f64) -> f64 {
        match self.kind {
            ModelKind::ConstantVol { .. } => 0.0,
            ModelKind::HullWhite { a, .. } | ModelKind::SineSquared { a, .. } => a * y,
            ModelKind::UniformElliptic { a, b, .. }
            | ModelKind::SteinStein { a, b, .. }
            | ModelKind::Heston { a, b, .. }
            | ModelKind::Scott { a, b, .. } => a - b * y,
            ModelKind::Custom { drift, .. } => drift,
        }
    }

    /// Factor diffusion `F2(t, y)`.
    #[inline]
    pub fn factor_diffusion(&self, _t: f64, y: f64) -> f64 {
        match self.kind {
            ModelKind::ConstantVol { .. } => 0.0,
            ModelKind::HullWhite { b, .. } | ModelKind::SineSquared { b, .. } => b * y,
            ModelKind::UniformElliptic { .. } | ModelKind::SteinStein { .. } => 1.0,
            ModelKind::Scott { .. } => 1.0,
            ModelKind::Heston { .. } => y.max(0.0).sqrt(),
            ModelKind::Custom { diffusion, .. } => diffusion,
        }
    }

    fn is_square_root_factor(&self) -> bool {
        matches!(self.kind, ModelKind::Heston { .. })
    }
}

/// One simulated path sampled on the fine grid of a schedule.
///
/// Reproducible from `(seed, index)` alone; prices are positive everywhere and
/// revision dates are the fine-grid subsequence at the schedule's substep
/// stride, never re-interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
    pub index: u64,
}

/// One simulation substep shared by the production sampler and the
/// grid-refinement tests: exact lognormal price step for the volatility
/// frozen at the left node, Euler factor step (truncated for the square-root
/// diffusion).
#[inline]
pub(crate) fn step(
    model: &MarketModel,
    t: f64,
    dt: f64,
    s: f64,
    y: f64,
    xi1: f64,
    xi2: f64,
) -> (f64, f64) {
    let sqrt_dt = dt.sqrt();
    let sig = model.sigma(y);
    let s_next = s * ((-0.5 * sig * sig) * dt + sig * sqrt_dt * xi1).exp();

    let driver = model.corr * xi1 + (1.0 - model.corr * model.corr).sqrt() * xi2;
    let y_next = y + model.factor_drift(t, y) * dt + model.factor_diffusion(t, y) * sqrt_dt * driver;
    let y_next = if model.is_square_root_factor() {
        y_next.max(0.0)
    } else {
        y_next
    };
    (s_next, y_next)
}

/// Simulates a single path; the RNG substream is derived statelessly from
/// `(seed, index)`, with the two normal draws per substep consumed in fixed
/// order.
pub fn simulate_path(
    model: &MarketModel,
    schedule: &RevisionSchedule,
    seed: u64,
    index: u64,
) -> PathBundle {
    let times = schedule.fine_times();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);

    let mut s = Vec::with_capacity(times.len());
    let mut y = Vec::with_capacity(times.len());
    s.push(model.s0);
    y.push(model.y0);

    let (mut s_cur, mut y_cur) = (model.s0, model.y0);
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        let xi1: f64 = rng.sample(StandardNormal);
        let xi2: f64 = rng.sample(StandardNormal);
        let (s_next, y_next) = step(model, times[k - 1], dt, s_cur, y_cur, xi1, xi2);
        s_cur = s_next;
        y_cur = y_next;
        s.push(s_cur);
        y.push(y_cur);
    }

    PathBundle { s, y, seed, index }
}

/// Lazily yields `n_paths` independent paths. Consumers that need
/// parallelism map [`simulate_path`] over path indices instead.
pub fn simulate_paths<'a>(
    model: &'a MarketModel,
    schedule: &'a RevisionSchedule,
    n_paths: u64,
    seed: u64,
) -> impl Iterator<Item = PathBundle> + 'a {
    (0..n_paths).map(move |i| simulate_path(model, schedule, seed, i))
}

/// Applies the volatility map pointwise along a path.
pub fn sigma_path(model: &MarketModel, path: &PathBundle) -> Vec<f64> {
    path.y.iter().map(|&y| model.sigma(y)).collect()
}
