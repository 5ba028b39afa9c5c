//! Shortfall-constrained pricing from simulated terminal prices.
//!
//! The seller charges `delta_eps * S_0` instead of the full super-hedging
//! price `S_0`, where `delta_eps` is the smallest capital fraction whose
//! terminal shortfall probability stays below the significance level. On a
//! finite sample the infimum reduces to an empirical quantile of
//! `X = (1 - kappa*) min(S_1, K)`.

use crate::error::{Error, Result};
use crate::models::{simulate_path, MarketModel};
use crate::schedule::RevisionSchedule;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Configuration of a quantile-pricing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantileConfig {
    pub model: MarketModel,
    pub strike: f64,
    /// Significance level in `(0, 1)`.
    pub epsilon: f64,
    pub kappa_star: f64,
    /// Sample size; quantiles are refused when `epsilon * n_paths < 1`.
    pub n_paths: u64,
    pub seed: u64,
    /// Uniform simulation steps used to sample the terminal price.
    #[serde(default = "default_fine_steps")]
    pub fine_steps: usize,
}

fn default_fine_steps() -> usize {
    500
}

impl QuantileConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "significance level must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.kappa_star) {
            return Err(Error::ParameterDomain(format!(
                "kappa_star must satisfy 0 <= kappa_star < 1, got {}",
                self.kappa_star
            )));
        }
        if self.n_paths == 0 || self.fine_steps == 0 {
            return Err(Error::ParameterDomain(
                "n_paths and fine_steps must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Simulates the terminal-price sample, in path-index order.
    pub fn terminal_samples(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let schedule = RevisionSchedule::new(self.fine_steps, 1.0, 1)?;
        Ok((0..self.n_paths)
            .into_par_iter()
            .map(|i| {
                let path = simulate_path(&self.model, &schedule, self.seed, i);
                *path.s.last().expect("path has nodes")
            })
            .collect())
    }
}

/// Empirical success probability
/// `Upsilon(a) = (1/N) #{ (1 - kappa*) min(S_1, K) > (1 - a) S_0 }`.
pub fn upsilon(a: f64, samples: &[f64], kappa_star: f64, s0: f64, strike: f64) -> f64 {
    debug_assert!(!samples.is_empty());
    let cutoff = (1.0 - a) * s0;
    let hits = samples
        .iter()
        .filter(|&&s1| (1.0 - kappa_star) * s1.min(strike) > cutoff)
        .count();
    hits as f64 / samples.len() as f64
}

/// Smallest capital fraction `delta_eps = inf { a : Upsilon(a) >= 1 - eps }`,
/// evaluated on the sample as `1 - Q_eps / S_0` with `Q_eps` the lower
/// empirical `eps`-quantile of `X = (1 - kappa*) min(S_1, K)`.
pub fn delta_epsilon(
    samples: &[f64],
    epsilon: f64,
    kappa_star: f64,
    s0: f64,
    strike: f64,
) -> Result<f64> {
    let n = samples.len();
    let rank = (epsilon * n as f64).ceil() as usize;
    if rank < 1 {
        return Err(Error::ParameterDomain(format!(
            "epsilon * N = {} < 1: the quantile is unresolvable on this sample",
            epsilon * n as f64
        )));
    }
    let mut x: Vec<f64> = samples
        .iter()
        .map(|&s1| (1.0 - kappa_star) * s1.min(strike))
        .collect();
    x.sort_by(f64::total_cmp);
    let q = x[rank - 1];
    Ok(1.0 - q / s0)
}

/// The price-reduction surface over an `(epsilon, r)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSurface {
    pub epsilons: Vec<f64>,
    pub r_values: Vec<f64>,
    /// `values[i][j] = (1 - delta_eps(epsilons[i])) * epsilons[i]^(-r_values[j])`.
    pub values: Vec<Vec<f64>>,
    /// `(1 - delta_eps) * price` per epsilon, for the reduction-amount panel.
    pub reduction_amount: Vec<f64>,
}

/// Evaluates `(1 - delta_eps) eps^(-r)` over a grid, plus the reduction
/// amount scaled by `price` (the caller chooses the spot or a model price).
pub fn reduction_surface(
    eps_grid: &[f64],
    r_grid: &[f64],
    samples: &[f64],
    kappa_star: f64,
    s0: f64,
    strike: f64,
    price: f64,
) -> Result<ReductionSurface> {
    let mut values = Vec::with_capacity(eps_grid.len());
    let mut reduction_amount = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let d = delta_epsilon(samples, eps, kappa_star, s0, strike)?;
        let row: Vec<f64> = r_grid.iter().map(|&r| (1.0 - d) * eps.powf(-r)).collect();
        values.push(row);
        reduction_amount.push((1.0 - d) * price);
    }
    Ok(ReductionSurface {
        epsilons: eps_grid.to_vec(),
        r_values: r_grid.to_vec(),
        values,
        reduction_amount,
    })
}

impl ReductionSurface {
    /// Flat `(epsilon, r, value)` CSV for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,r,value\n");
        for (i, &eps) in self.epsilons.iter().enumerate() {
            for (j, &r) in self.r_values.iter().enumerate() {
                out.push_str(&format!("{eps},{r},{:.7}\n", self.values[i][j]));
            }
        }
        out
    }

    /// `(epsilon, reduction_amount)` CSV for the second panel.
    pub fn reduction_csv(&self) -> String {
        let mut out = String::from("epsilon,reduction\n");
        for (i, &eps) in self.epsilons.iter().enumerate() {
            out.push_str(&format!("{eps},{:.7}\n", self.reduction_amount[i]));
        }
        out
    }
}
